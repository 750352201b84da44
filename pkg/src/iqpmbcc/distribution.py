"""Exact probability tables over k-bit outcomes and their text format.

File layout::

    dist k=<bits>
    <bitstring> <probability>
    ...

Only outcomes with nonzero probability are listed, sorted
lexicographically.  Probabilities carry at least 15 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .circuit import BitString
from .errors import DimensionError, ParseError

NORM_TOL = 1e-12
# rounding noise below this is clipped to zero; anything more negative is a bug
NEGATIVE_TOL = 1e-14
# entries at or below this are omitted when writing a file
WRITE_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    k: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (1 << self.k,):
            raise DimensionError(f"expected {1 << self.k} probabilities for k={self.k}, got shape {p.shape}")
        if np.any(p < -NEGATIVE_TOL):
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_unnormalized(cls, k: int, weights: np.ndarray) -> OutcomeDistribution:
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        return cls(k, w / w.sum())

    @classmethod
    def point_mass(cls, outcome: BitString) -> OutcomeDistribution:
        p = np.zeros(1 << len(outcome))
        p[outcome.to_int()] = 1.0
        return cls(len(outcome), p)

    @classmethod
    def uniform(cls, k: int) -> OutcomeDistribution:
        return cls(k, np.full(1 << k, 1.0 / (1 << k)))

    def __getitem__(self, outcome: BitString | str) -> float:
        if isinstance(outcome, str):
            outcome = BitString.from_str(outcome)
        if len(outcome) != self.k:
            raise DimensionError(f"outcome {outcome} has length {len(outcome)}, expected {self.k}")
        return float(self.probs[outcome.to_int()])

    def items(self, floor: float = 0.0) -> Iterator[tuple[BitString, float]]:
        """Yield (outcome, probability) above ``floor`` in lexicographic order."""
        for idx in np.flatnonzero(self.probs > floor):
            yield BitString.from_int(int(idx), self.k), float(self.probs[idx])

    def as_dict(self, floor: float = 0.0) -> dict[str, float]:
        return {str(b): p for b, p in self.items(floor)}

    def permuted_by_xor(self, offset: BitString) -> OutcomeDistribution:
        """Distribution of m XOR offset."""
        if len(offset) != self.k:
            raise DimensionError("offset length does not match distribution")
        idx = np.arange(1 << self.k) ^ offset.to_int()
        return OutcomeDistribution(self.k, self.probs[idx])

    def allclose(self, other: OutcomeDistribution, atol: float) -> bool:
        return self.k == other.k and bool(np.max(np.abs(self.probs - other.probs)) <= atol)


def total_variation_distance(p: OutcomeDistribution, r: OutcomeDistribution) -> float:
    if p.k != r.k:
        raise DimensionError(f"distributions over {p.k} and {r.k} bits")
    return float(0.5 * np.abs(p.probs - r.probs).sum())


def format_probability(p: float) -> str:
    """Fixed-point with at least 15 significant digits."""
    if p <= 0.0:
        return "0." + "0" * 15
    decimals = max(15, 14 - math.floor(math.log10(p)))
    return f"{p:.{decimals}f}"


def format_distribution(dist: OutcomeDistribution) -> str:
    lines = [f"dist k={dist.k}"]
    lines += [f"{b} {format_probability(p)}" for b, p in dist.items(WRITE_FLOOR)]
    return "\n".join(lines) + "\n"


def format_histogram(dist: OutcomeDistribution) -> str:
    """Every outcome, zeros included, as plot-ready rows."""
    return "".join(
        f"{BitString.from_int(i, dist.k)} {format_probability(float(p))}\n" for i, p in enumerate(dist.probs)
    )


def parse_distribution(text: str, source: str | None = None, tol: float = 1e-9) -> OutcomeDistribution:
    """Read the distribution format; the table is renormalized after a ``tol`` check."""
    k = None
    probs = None
    seen: set[int] = set()
    last = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if k is None:
            if len(parts) != 2 or parts[0] != "dist" or not parts[1].startswith("k="):
                raise ParseError("expected header 'dist k=<bits>'", lineno, source)
            try:
                k = int(parts[1][2:])
            except ValueError:
                raise ParseError(f"bad bit count {parts[1]!r}", lineno, source) from None
            if k < 1:
                raise ParseError("bit count must be >= 1", lineno, source)
            probs = np.zeros(1 << k)
            continue
        if len(parts) != 2:
            raise ParseError("expected '<bitstring> <probability>'", lineno, source)
        word, value = parts
        if len(word) != k or any(c not in "01" for c in word):
            raise ParseError(f"outcome {word!r} is not a {k}-bit string", lineno, source)
        try:
            p = float(value)
        except ValueError:
            raise ParseError(f"bad probability {value!r}", lineno, source) from None
        if not math.isfinite(p) or p < 0:
            raise ParseError(f"probability {value!r} must be finite and >= 0", lineno, source)
        idx = int(word, 2)
        if idx in seen:
            raise ParseError(f"duplicate outcome {word}", lineno, source)
        if idx < last:
            raise ParseError(f"outcome {word} out of lexicographic order", lineno, source)
        seen.add(idx)
        last = idx
        probs[idx] = p
    if k is None:
        raise ParseError("empty distribution file", None, source)
    total = probs.sum()
    if abs(total - 1.0) > tol:
        raise ParseError(f"probabilities sum to {total!r}, not 1", None, source)
    return OutcomeDistribution(k, probs / total)
