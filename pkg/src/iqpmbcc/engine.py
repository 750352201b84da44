"""Fast exact simulation of IQP* circuits.

Every gate exp(i theta X[z]) is diagonal in the X eigenbasis, so the whole
circuit is described by the phase function

    phi(a) = sum over gates of theta * (-1)^(a . z)

and the zero-input amplitudes are a Walsh-Hadamard transform of
exp(i phi).  Inputs other than zero only permute the outcome table
(P(m | x) = P(m xor xbar | 0)), so they never require a second transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import BitString, IqpCircuit, embed_input
from .distribution import NEGATIVE_TOL, NORM_TOL, OutcomeDistribution
from .errors import SizeLimitError

MAX_QUBITS = 26
SAMPLER_ID = "numpy-pcg64/inverse-cdf/v1"


@dataclass(frozen=True, eq=False)
class PhaseVector:
    q: int
    phases: np.ndarray


@dataclass(frozen=True, eq=False)
class AmplitudeVector:
    q: int
    amps: np.ndarray

    def __post_init__(self):
        norm = float(np.vdot(self.amps, self.amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitude vector has squared norm {norm!r}")

    def __getitem__(self, y: BitString | int) -> complex:
        return complex(self.amps[int(y)])


def _check_size(q: int) -> None:
    if q > MAX_QUBITS:
        raise SizeLimitError(f"q={q} exceeds the engine limit of {MAX_QUBITS} qubits")


def parity_signs(q: int, mask: int, index: np.ndarray | None = None) -> np.ndarray:
    """(-1)^(a . mask) for every a in [0, 2^q), as float."""
    if index is None:
        index = np.arange(1 << q, dtype=np.int64 if q > 30 else np.int32)
    odd = np.bitwise_count(index & mask) & 1
    return 1.0 - 2.0 * odd


def phase_vector(circuit: IqpCircuit) -> PhaseVector:
    _check_size(circuit.q)
    q = circuit.q
    index = np.arange(1 << q, dtype=np.int32)
    phases = np.zeros(1 << q)
    for gate in circuit.gates:
        odd = np.bitwise_count(index & gate.mask) & 1
        # theta * (1 - 2*odd), accumulated without a second full-size temporary
        phases += gate.theta.value
        phases -= (2.0 * gate.theta.value) * odd
    return PhaseVector(q, phases)


def walsh_hadamard_inplace(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^q vector, in place."""
    size = v.shape[-1]
    if size & (size - 1):
        raise ValueError(f"length {size} is not a power of two")
    h = 1
    while h < size:
        blocks = v.reshape(v.shape[:-1] + (-1, 2, h))
        lo = blocks[..., 0, :]
        hi = blocks[..., 1, :]
        # (lo, hi) -> (lo + hi, lo - hi) with no temporaries
        lo += hi
        hi *= -2
        hi += lo
        h *= 2
    return v


def zero_input_amplitudes(pv: PhaseVector) -> AmplitudeVector:
    _check_size(pv.q)
    amps = np.exp(1j * pv.phases)
    walsh_hadamard_inplace(amps)
    amps *= 1.0 / (1 << pv.q)
    return AmplitudeVector(pv.q, amps)


def _probabilities(amps: np.ndarray) -> np.ndarray:
    p = amps.real**2 + amps.imag**2
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ArithmeticError(f"internal error: probabilities sum to {total!r}")
    if np.any(p < -NEGATIVE_TOL):
        raise ArithmeticError("internal error: negative probability")
    return p


def zero_input_distribution(circuit: IqpCircuit) -> OutcomeDistribution:
    amps = zero_input_amplitudes(phase_vector(circuit)).amps
    return OutcomeDistribution(circuit.q, _probabilities(amps))


def output_distribution(circuit: IqpCircuit, x: BitString | str) -> OutcomeDistribution:
    """Exact P(m | x), obtained from the zero-input table by an xor relabeling."""
    xbar = embed_input(circuit, x)
    base = zero_input_distribution(circuit)
    if xbar.weight() == 0:
        return base
    return base.permuted_by_xor(xbar)


def sample_indices(dist: OutcomeDistribution, rng: np.random.Generator, count: int) -> np.ndarray:
    """Inverse-CDF draws, returned as big-endian outcome indices."""
    if count < 1:
        raise ValueError("count must be positive")
    cdf = np.cumsum(dist.probs)
    u = rng.random(count) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    # u < cdf[-1] always, but guard against landing on a trailing zero-probability slot
    last = int(np.flatnonzero(dist.probs)[-1])
    return np.minimum(idx, last)


def sample(circuit: IqpCircuit, x: BitString | str, seed: int, count: int) -> list[BitString]:
    if count < 1:
        raise ValueError("count must be positive")
    dist = output_distribution(circuit, x)
    rng = np.random.default_rng(seed)
    return [BitString.from_int(int(i), circuit.q) for i in sample_indices(dist, rng, count)]
