"""Post-selection, repetition sampling, non-linear gadget search, fit tests."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .circuit import Angle, BitString, IqpCircuit, IqpGate
from .distribution import OutcomeDistribution, total_variation_distance
from .engine import output_distribution, sample_indices, walsh_hadamard_inplace
from .errors import DimensionError, PostselectionFailed, ZeroProbabilityEvent
from .gf2 import index_bits, is_affine

DETERMINISM_TOL = 1e-9
EVENT_FLOOR = 1e-9


@dataclass(frozen=True)
class PostselectionSpec:
    """Require outcome bit ``positions[i]`` to equal ``required[i]``."""

    positions: tuple[int, ...]
    required: BitString

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if len(set(self.positions)) != len(self.positions):
            raise ValueError(f"duplicate post-selection positions {self.positions}")
        if len(self.positions) != len(self.required):
            raise ValueError("positions and required values differ in length")
        if any(p < 0 for p in self.positions):
            raise ValueError("post-selection positions must be non-negative")

    @classmethod
    def all_zeros(cls, positions: Sequence[int]) -> PostselectionSpec:
        return cls(tuple(positions), BitString.zeros(len(positions)))

    @classmethod
    def parse(cls, text: str) -> PostselectionSpec:
        """Parse ``"<index>=<bit>,<index>=<bit>,..."``."""
        positions, bits = [], []
        for item in text.split(","):
            item = item.strip()
            key, sep, value = item.partition("=")
            if not sep or value.strip() not in ("0", "1"):
                raise ValueError(f"bad post-selection term {item!r}; expected <index>=<bit>")
            try:
                positions.append(int(key))
            except ValueError:
                raise ValueError(f"bad post-selection index {key!r}") from None
            bits.append(int(value))
        return cls(tuple(positions), BitString(tuple(bits)))

    def __str__(self) -> str:
        return ",".join(f"{p}={b}" for p, b in zip(self.positions, self.required))

    def shifted(self, offset: BitString) -> PostselectionSpec:
        """The same event after every outcome is xored with ``offset``."""
        return PostselectionSpec(
            self.positions, BitString(tuple(b ^ offset[p] for p, b in zip(self.positions, self.required)))
        )

    def remaining(self, k: int) -> tuple[int, ...]:
        return tuple(j for j in range(k) if j not in self.positions)

    def check(self, k: int) -> None:
        if any(p >= k for p in self.positions):
            raise DimensionError(f"post-selection position out of range for {k} bits")
        if len(self.positions) >= k:
            raise ValueError("post-selection must leave at least one bit unconditioned")


@dataclass(frozen=True)
class PostselectionResult:
    dist: OutcomeDistribution
    probability: float
    kept: tuple[int, ...]


def _event_mask(k: int, spec: PostselectionSpec) -> np.ndarray:
    bits = index_bits(k)
    mask = np.ones(1 << k, dtype=bool)
    for p, b in zip(spec.positions, spec.required):
        mask &= bits[:, p] == b
    return mask


def _project(k: int, kept: Sequence[int]) -> np.ndarray:
    bits = index_bits(k)[:, list(kept)].astype(np.int64)
    weights = 1 << np.arange(len(kept) - 1, -1, -1)
    return bits @ weights


def postselect(dist: OutcomeDistribution, spec: PostselectionSpec) -> PostselectionResult:
    """Condition on the event and marginalise onto the unconditioned bits (original order)."""
    spec.check(dist.k)
    mask = _event_mask(dist.k, spec)
    prob = float(dist.probs[mask].sum())
    if prob <= 0.0:
        raise ZeroProbabilityEvent(f"post-selection event {{{spec}}} has probability zero")
    kept = spec.remaining(dist.k)
    weights = np.bincount(_project(dist.k, kept)[mask], weights=dist.probs[mask], minlength=1 << len(kept))
    return PostselectionResult(OutcomeDistribution(len(kept), weights / prob), prob, kept)


@dataclass(frozen=True)
class RepetitionResult:
    outcome: BitString
    tries: int


def _repeat_until(dist, spec, mask, kept_index, rng, max_tries) -> RepetitionResult:
    tries = 0
    while tries < max_tries:
        block = sample_indices(dist, rng, min(1024, max_tries - tries))
        hits = np.flatnonzero(mask[block])
        if hits.size:
            first = int(hits[0])
            k_out = dist.k - len(spec.positions)
            return RepetitionResult(BitString.from_int(int(kept_index[block[first]]), k_out), tries + first + 1)
        tries += block.size
    raise PostselectionFailed(f"event {{{spec}}} not observed in {max_tries} tries", max_tries)


def postselect_by_repetition(
    circuit: IqpCircuit,
    x: BitString | str,
    spec: PostselectionSpec,
    seed: int,
    max_tries: int = 1000,
) -> RepetitionResult:
    """Sample the circuit until the event occurs; return the kept bits and the try count."""
    if max_tries < 1:
        raise ValueError("max_tries must be positive")
    dist = output_distribution(circuit, x)
    spec.check(dist.k)
    rng = np.random.default_rng(seed)
    return _repeat_until(
        dist, spec, _event_mask(dist.k, spec), _project(dist.k, spec.remaining(dist.k)), rng, max_tries
    )


def postselected_samples(
    circuit: IqpCircuit,
    x: BitString | str,
    spec: PostselectionSpec,
    seed: int,
    count: int,
    max_tries: int = 1000,
) -> list[RepetitionResult]:
    """``count`` successive repetition runs sharing one seeded generator."""
    dist = output_distribution(circuit, x)
    spec.check(dist.k)
    rng = np.random.default_rng(seed)
    mask = _event_mask(dist.k, spec)
    kept_index = _project(dist.k, spec.remaining(dist.k))
    return [_repeat_until(dist, spec, mask, kept_index, rng, max_tries) for _ in range(count)]


# ---------------------------------------------------------------------------
# non-linear gadget search


@dataclass(frozen=True)
class GadgetWitness:
    """Circuit plus post-selection whose output bit is a non-affine function of the inputs."""

    circuit: IqpCircuit
    spec: PostselectionSpec
    output: int
    truth_table: tuple[int, ...]
    event_probabilities: tuple[float, ...]
    candidates_checked: int = field(default=0, compare=False)


def _quarter_class(angle: Angle) -> Fraction | float:
    """Angle modulo pi/2, in units of pi when exact."""
    if angle.pi_multiple is not None:
        return angle.pi_multiple % Fraction(1, 2)
    r = math.fmod(angle.value, math.pi / 2)
    return round(r / math.pi, 12) % 0.5


def _representative_angles(angle_set: Sequence[Angle]) -> list[Angle]:
    """One angle per class modulo pi/2, first-seen order, dropping the Pauli class.

    exp(i (theta + pi/2) X[z]) = i X[z] exp(i theta X[z]), so the two angles
    give output laws that differ by an xor with z; angles that are
    multiples of pi/2 give a Pauli gate, equivalent to a shorter circuit.
    """
    seen = set()
    reps = []
    for a in angle_set:
        cls = _quarter_class(a)
        if cls == 0 or cls in seen:
            continue
        seen.add(cls)
        reps.append(a)
    return reps


@dataclass
class _Columns:
    event: np.ndarray  # (2^q, S*X) indicator of the conditioning event
    one: np.ndarray  # (2^q, S*X) indicator of event and output == 1
    specs: list[tuple[int, PostselectionSpec]]


def _spec_columns(q: int, n: int) -> _Columns:
    bits = index_bits(q).astype(bool)
    size = 1 << q
    ev_cols, one_cols, specs = [], [], []
    xbars = [np.array([(x >> (n - 1 - j)) & 1 if j < n else 0 for j in range(q)], dtype=bool) for x in range(1 << n)]
    for o in range(q):
        others = [j for j in range(q) if j != o]
        for r in range(1, len(others) + 1):
            for positions in itertools.combinations(others, r):
                for req in range(1 << r):
                    required = BitString.from_int(req, r)
                    for xbar in xbars:
                        # P(m | x) = P(m xor xbar | 0): condition the zero-input table on shifted values
                        ev = np.ones(size, dtype=bool)
                        for i, p in enumerate(positions):
                            ev &= bits[:, p] == (bool(required[i]) ^ xbar[p])
                        ev_cols.append(ev)
                        one_cols.append(ev & (bits[:, o] ^ xbar[o]))
                    specs.append((o, PostselectionSpec(positions, required)))
    return _Columns(
        np.array(ev_cols, dtype=float).T,
        np.array(one_cols, dtype=float).T,
        specs,
    )


def _affine_codes(n: int) -> np.ndarray:
    size = 1 << n
    table = np.zeros(1 << size, dtype=bool)
    for code in range(1 << size):
        tt = [(code >> (size - 1 - x)) & 1 for x in range(size)]
        table[code] = is_affine(tt)
    return table


def _zero_input_probs(q: int, supports: Sequence[int], thetas: np.ndarray) -> np.ndarray:
    """Batch of zero-input output tables, one row per row of ``thetas``."""
    size = 1 << q
    index = np.arange(size)
    signs = np.array([1.0 - 2.0 * (np.bitwise_count(index & z) & 1) for z in supports])
    amps = np.exp(1j * (thetas @ signs))
    walsh_hadamard_inplace(amps)
    amps /= size
    return amps.real**2 + amps.imag**2


def find_nonlinear_gadget(
    angle_set: Sequence[Angle],
    max_qubits: int,
    max_gates: int,
    n_inputs: int = 2,
) -> GadgetWitness | None:
    """Exhaustive search for a post-selected IQP* circuit computing a non-affine function.

    Inputs occupy the first ``n_inputs`` qubits.  For every candidate the
    search tries every output position and every post-selection (subset of
    the other positions, any required values); a candidate qualifies when,
    for each of the 2^n inputs, the event has positive probability and the
    output bit is deterministic given the event.

    Order: gate count, then qubit count, then supports (lexicographic, all
    distinct), then angles in ``angle_set`` order.  Angles are reduced
    modulo pi/2 first, which changes which of several equivalent witnesses
    is examined but never which one is returned.
    """
    reps = _representative_angles(angle_set)
    if not reps or max_qubits <= n_inputs:
        return None
    rep_values = np.array([a.value for a in reps])
    affine = _affine_codes(n_inputs)
    n_x = 1 << n_inputs
    code_weights = 1 << np.arange(n_x - 1, -1, -1)
    checked = 0
    columns = {q: _spec_columns(q, n_inputs) for q in range(n_inputs + 1, max_qubits + 1)}
    for n_gates in range(1, max_gates + 1):
        combos = np.array(list(itertools.product(range(len(reps)), repeat=n_gates)))
        thetas = rep_values[combos]
        for q in range(n_inputs + 1, max_qubits + 1):
            cols = columns[q]
            S = len(cols.specs)
            for supports in itertools.combinations(range(1, 1 << q), n_gates):
                # big-endian support integers sort lexicographically as strings
                probs = _zero_input_probs(q, supports, thetas)
                checked += len(thetas)
                ev = (probs @ cols.event).reshape(-1, S, n_x)
                one = (probs @ cols.one).reshape(-1, S, n_x)
                frac = one / np.maximum(ev, 1e-300)
                good = (ev > EVENT_FLOOR).all(-1)
                good &= ((frac < DETERMINISM_TOL) | (frac > 1.0 - DETERMINISM_TOL)).all(-1)
                if not good.any():
                    continue
                codes = ((frac > 0.5) * code_weights).sum(-1)
                good &= ~affine[codes]
                hits = np.argwhere(good)
                if hits.size == 0:
                    continue
                b, s = (int(v) for v in hits[0])
                o, spec = cols.specs[s]
                gates = tuple(
                    IqpGate(reps[combos[b, g]], BitString.from_int(z, q)) for g, z in enumerate(supports)
                )
                return GadgetWitness(
                    IqpCircuit(q, n_inputs, gates),
                    spec,
                    o,
                    tuple(int(v > 0.5) for v in frac[b, s]),
                    tuple(float(v) for v in ev[b, s]),
                    checked,
                )
    return None


@dataclass(frozen=True)
class GadgetReplay:
    truth_table: tuple[int, ...]
    output_probabilities: tuple[float, ...]
    event_probabilities: tuple[float, ...]


def replay_gadget(witness: GadgetWitness) -> GadgetReplay:
    """Re-evaluate a witness through the fast engine and ``postselect``."""
    circuit = witness.circuit
    kept = witness.spec.remaining(circuit.q)
    out_pos = kept.index(witness.output)
    table, p_one, p_event = [], [], []
    for x in circuit.inputs():
        res = postselect(output_distribution(circuit, x), witness.spec)
        ones = sum(p for b, p in res.dist.items() if b[out_pos] == 1)
        p_one.append(ones)
        p_event.append(res.probability)
        table.append(int(ones > 0.5))
    return GadgetReplay(tuple(table), tuple(p_one), tuple(p_event))


# ---------------------------------------------------------------------------
# goodness of fit

CHI2_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class FitReport:
    samples: int
    tvd: float
    chi2: float
    dof: int
    p_value: float
    alpha: float
    bins: int
    impossible: int
    passed: bool

    def as_pairs(self) -> list[tuple[str, str]]:
        return [
            ("samples", str(self.samples)),
            ("tvd", f"{self.tvd:.15g}"),
            ("chi2", f"{self.chi2:.15g}"),
            ("dof", str(self.dof)),
            ("p_value", f"{self.p_value:.15g}"),
            ("alpha", f"{self.alpha:g}"),
            ("bins", str(self.bins)),
            ("impossible_samples", str(self.impossible)),
            ("result", "pass" if self.passed else "fail"),
        ]

    def to_keyvalue(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_pairs())

    def to_text(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"goodness of fit over {self.samples} samples: {verdict}\n"
            f"  empirical TVD      {self.tvd:.6g}\n"
            f"  chi-square         {self.chi2:.6g} on {self.dof} dof ({self.bins} bins)\n"
            f"  p-value            {self.p_value:.6g} (alpha {self.alpha:g})\n"
        )


def empirical_distribution(indices: np.ndarray, k: int) -> OutcomeDistribution:
    counts = np.bincount(indices, minlength=1 << k).astype(float)
    return OutcomeDistribution(k, counts / counts.sum())


def _as_indices(samples, k: int) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return samples.astype(np.int64)
    out = []
    for s in samples:
        if isinstance(s, str):
            s = BitString.from_str(s)
        if len(s) != k:
            raise DimensionError(f"sample {s} has length {len(s)}, expected {k}")
        out.append(s.to_int())
    return np.array(out, dtype=np.int64)


def goodness_of_fit(samples, exact: OutcomeDistribution, alpha: float = 0.01) -> FitReport:
    """Empirical TVD plus a pooled chi-square test against the exact table.

    Outcomes with expected count below 5 are pooled into one tail bin; if
    that bin is still below 5 it is merged into the smallest regular bin.
    Any sample on a zero-probability outcome fails the test outright.
    """
    idx = _as_indices(samples, exact.k)
    N = idx.size
    if N == 0:
        raise ValueError("goodness of fit needs at least one sample")
    observed = np.bincount(idx, minlength=1 << exact.k).astype(float)
    tvd = total_variation_distance(OutcomeDistribution(exact.k, observed / N), exact)
    expected = exact.probs * N
    impossible = int(observed[exact.probs == 0].sum())

    big = expected >= CHI2_MIN_EXPECTED
    obs_bins = list(observed[big])
    exp_bins = list(expected[big])
    tail_exp = float(expected[~big].sum())
    tail_obs = float(observed[~big].sum())
    if tail_exp > 0 or tail_obs > 0:
        if tail_exp >= CHI2_MIN_EXPECTED or not exp_bins:
            obs_bins.append(tail_obs)
            exp_bins.append(tail_exp)
        else:
            j = int(np.argmin(exp_bins))
            obs_bins[j] += tail_obs
            exp_bins[j] += tail_exp
    o = np.array(obs_bins)
    e = np.array(exp_bins)
    dof = len(e) - 1
    if impossible:
        chi2, p = math.inf, 0.0
    elif dof < 1:
        chi2, p = 0.0, 1.0
    else:
        chi2 = float(((o - e) ** 2 / e).sum())
        p = float(stats.chi2.sf(chi2, dof))
    return FitReport(N, tvd, chi2, max(dof, 0), p, alpha, len(e), impossible, p >= alpha)
