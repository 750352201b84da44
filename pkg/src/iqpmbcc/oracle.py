"""Dense state-vector reference simulator.

This is the ground truth the fast engine, the pattern compiler and the
MBCC runtime are checked against.  It deliberately works gate by gate with
explicit index arithmetic and shares no code path with the transform-based
engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Angle, BitString, IqpCircuit, embed_input
from .distribution import NORM_TOL, OutcomeDistribution, total_variation_distance
from .errors import DimensionError, SizeLimitError

MAX_QUBITS = 14

__all__ = [
    "MAX_QUBITS",
    "StateVector",
    "apply_cz",
    "apply_hadamard",
    "apply_x_exponential",
    "apply_z_exponential",
    "measure_all_distribution",
    "simulate_iqp_dense",
    "simulate_iqp_state",
    "total_variation_distance",
]


@dataclass(frozen=True, eq=False)
class StateVector:
    k: int
    amps: np.ndarray

    def __post_init__(self):
        if self.k > MAX_QUBITS:
            raise SizeLimitError(f"oracle is capped at {MAX_QUBITS} qubits, got {self.k}")
        a = np.asarray(self.amps, dtype=complex)
        if a.shape != (1 << self.k,):
            raise DimensionError(f"expected {1 << self.k} amplitudes, got shape {a.shape}")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state has squared norm {norm!r}")
        object.__setattr__(self, "amps", a)

    @classmethod
    def basis(cls, bits: BitString | str) -> StateVector:
        if isinstance(bits, str):
            bits = BitString.from_str(bits)
        a = np.zeros(1 << len(bits), dtype=complex)
        a[bits.to_int()] = 1.0
        return cls(len(bits), a)

    @classmethod
    def plus(cls, k: int) -> StateVector:
        return cls(k, np.full(1 << k, 2.0 ** (-k / 2), dtype=complex))

    def __getitem__(self, w: BitString | str | int) -> complex:
        if isinstance(w, str):
            w = BitString.from_str(w)
        return complex(self.amps[int(w)])


def _site_mask(k: int, i: int) -> int:
    if not 0 <= i < k:
        raise IndexError(f"qubit {i} out of range for {k} qubits")
    return 1 << (k - 1 - i)


def _support_mask(state: StateVector, support: BitString) -> int:
    if len(support) != state.k:
        raise DimensionError(f"support length {len(support)} != {state.k} qubits")
    return support.to_int()


def _parity(w: int) -> int:
    return bin(w).count("1") & 1


def apply_x_exponential(state: StateVector, theta: Angle | float, support: BitString) -> StateVector:
    """exp(i theta X[z]) = cos(theta) I + i sin(theta) X[z]."""
    z = _support_mask(state, support)
    t = float(theta)
    old = state.amps
    partner = np.arange(1 << state.k) ^ z
    new = math.cos(t) * old + 1j * math.sin(t) * old[partner]
    return StateVector(state.k, new)


def apply_z_exponential(state: StateVector, theta: Angle | float, support: BitString) -> StateVector:
    z = _support_mask(state, support)
    t = float(theta)
    new = state.amps.copy()
    for w in range(1 << state.k):
        new[w] *= complex(math.cos(t), math.sin(t)) if not _parity(w & z) else complex(math.cos(t), -math.sin(t))
    return StateVector(state.k, new)


def apply_cz(state: StateVector, i: int, j: int) -> StateVector:
    if i == j:
        raise ValueError("controlled-Z needs two distinct qubits")
    both = _site_mask(state.k, i) | _site_mask(state.k, j)
    new = state.amps.copy()
    for w in range(1 << state.k):
        if w & both == both:
            new[w] = -new[w]
    return StateVector(state.k, new)


def apply_hadamard(state: StateVector, i: int) -> StateVector:
    m = _site_mask(state.k, i)
    old = state.amps
    new = np.empty_like(old)
    s = 1.0 / math.sqrt(2.0)
    for w in range(1 << state.k):
        if w & m:
            new[w] = s * (old[w ^ m] - old[w])
        else:
            new[w] = s * (old[w] + old[w | m])
    return StateVector(state.k, new)


def measure_all_distribution(state: StateVector) -> OutcomeDistribution:
    return OutcomeDistribution(state.k, np.abs(state.amps) ** 2)


def simulate_iqp_state(circuit: IqpCircuit, x: BitString | str) -> StateVector:
    """U|xbar>, gates applied in list order."""
    if circuit.q > MAX_QUBITS:
        raise SizeLimitError(f"oracle is capped at {MAX_QUBITS} qubits, got q={circuit.q}")
    state = StateVector.basis(embed_input(circuit, x))
    for gate in circuit.gates:
        state = apply_x_exponential(state, gate.theta, gate.support)
    return state


def simulate_iqp_dense(circuit: IqpCircuit, x: BitString | str) -> OutcomeDistribution:
    return measure_all_distribution(simulate_iqp_state(circuit, x))


def matrix_element(circuit: IqpCircuit, out: BitString, inp: BitString) -> complex:
    """<out| U |inp> for an arbitrary q-bit input, via a full column of U."""
    if len(inp) != circuit.q or len(out) != circuit.q:
        raise DimensionError("matrix element strings must have length q")
    state = StateVector.basis(inp)
    for gate in circuit.gates:
        state = apply_x_exponential(state, gate.theta, gate.support)
    return state[out]
