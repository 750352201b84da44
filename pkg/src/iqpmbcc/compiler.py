"""Compile IQP* circuits into non-adaptive graph-state measurement patterns.

Conjugating the circuit by Hadamards turns it into: prepare |+> on every
register qubit, apply exp(i theta Z[z]) gates, measure X.  Each such gate
is realised by one ancilla prepared in |+>, joined by CZ to the register
nodes in supp(z), and measured in the fixed basis

    U_X(-theta) Z U_X(theta),   U_X(t) = exp(i t X)

i.e. rotate by exp(i theta X) and read out Z.  Outcome s of that
measurement leaves the byproduct Z[z]^s on the registers.  Z byproducts
commute with every remaining gate and, right before the X readout, merely
flip register outcomes, so all corrections are classical parities:

    m_j = r_j  xor  (xor of s_g over gates g with z_j = 1)

No measurement basis ever depends on an earlier outcome.

Node numbering is 0-based in code: registers 0..q-1, then one ancilla per
gate in gate-list order.  The text format numbers nodes from 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .circuit import Angle, BitString, IqpCircuit, IqpGate
from .distribution import OutcomeDistribution
from .errors import DimensionError, ParseError, SizeLimitError
from .gf2 import pushforward

#: basis entry for a Pauli-X measured node
PAULI_X = None

PATTERN_SIM_LIMIT = oracle.MAX_QUBITS

# CZ(u, v) = exp(i pi/4) exp(-i pi/4 Z_u) exp(-i pi/4 Z_v) exp(i pi/4 Z_u Z_v)
_QUARTER = Angle.pi(1, 4)
_MINUS_QUARTER = Angle.pi(7, 4)

SIGN_CONVENTION = (
    "rot <theta> measures U_X(-theta) Z U_X(theta) with U_X(t) = exp(i t X); "
    "outcome s of a gate ancilla leaves byproduct Z[z]^s"
)


@dataclass(frozen=True, eq=False)
class MeasurementPattern:
    """Graph state plus fixed single-node measurement bases.

    ``basis[v]`` is ``PAULI_X`` (None) or the Angle of a rotated
    measurement.  ``correction`` is a registers x total_nodes GF(2) matrix:
    corrected bit j is the parity of the raw outcomes selected by row j.
    """

    total_nodes: int
    registers: int
    edges: frozenset[tuple[int, int]]
    basis: tuple[Angle | None, ...]
    correction: np.ndarray
    inputs: int | None = None
    source_gates: tuple[IqpGate, ...] = field(default=(), repr=False)

    def __post_init__(self):
        N, q = self.total_nodes, self.registers
        if not 1 <= q <= N:
            raise ValueError(f"need 1 <= registers={q} <= nodes={N}")
        n = q if self.inputs is None else self.inputs
        if not 1 <= n <= q:
            raise ValueError(f"inputs={n} must lie in [1, registers={q}]")
        object.__setattr__(self, "inputs", n)
        edges = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < N and 0 <= v < N):
                raise ValueError(f"edge ({u}, {v}) out of range")
            edges.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(edges))
        basis = tuple(self.basis)
        if len(basis) != N:
            raise ValueError(f"{len(basis)} bases for {N} nodes")
        for v, b in enumerate(basis):
            if b is not PAULI_X and not isinstance(b, Angle):
                raise TypeError(f"basis of node {v} must be PAULI_X or a fixed Angle, got {b!r}")
        if any(b is not PAULI_X for b in basis[:q]):
            raise ValueError("register nodes must be measured in the Pauli-X basis")
        object.__setattr__(self, "basis", basis)
        c = np.array(self.correction, dtype=np.uint8, ndmin=2)
        if c.shape != (q, N):
            raise DimensionError(f"correction matrix has shape {c.shape}, expected {(q, N)}")
        if np.any(c > 1):
            raise ValueError("correction matrix must be 0/1")
        c.setflags(write=False)
        object.__setattr__(self, "correction", c)

    @property
    def rotated_nodes(self) -> tuple[int, ...]:
        return tuple(v for v, b in enumerate(self.basis) if b is not PAULI_X)

    def neighbors(self, v: int) -> tuple[int, ...]:
        out = [b for a, b in self.edges if a == v] + [a for a, b in self.edges if b == v]
        return tuple(sorted(out))

    def is_non_adaptive(self) -> bool:
        """Every basis is a compile-time constant (PAULI_X or a concrete Angle)."""
        return all(b is PAULI_X or isinstance(b, Angle) for b in self.basis)


def compile_to_pattern(circuit: IqpCircuit) -> MeasurementPattern:
    q = circuit.q
    N = q + len(circuit.gates)
    edges = set()
    basis: list[Angle | None] = [PAULI_X] * q
    correction = np.zeros((q, N), dtype=np.uint8)
    correction[:, :q] = np.eye(q, dtype=np.uint8)
    for g, gate in enumerate(circuit.gates):
        anc = q + g
        basis.append(gate.theta)
        for j in gate.support.support():
            edges.add((j, anc))
            correction[j, anc] = 1
    return MeasurementPattern(N, q, frozenset(edges), tuple(basis), correction, circuit.n, circuit.gates)


def pattern_state(pattern: MeasurementPattern) -> oracle.StateVector:
    """Pre-readout state: every node rotated so that a Z readout is its measurement."""
    N = pattern.total_nodes
    if N > PATTERN_SIM_LIMIT:
        raise SizeLimitError(f"pattern has {N} nodes; dense simulation is capped at {PATTERN_SIM_LIMIT}")
    state = oracle.StateVector.plus(N)
    for u, v in sorted(pattern.edges):
        state = oracle.apply_cz(state, u, v)
    for v, b in enumerate(pattern.basis):
        if b is PAULI_X:
            state = oracle.apply_hadamard(state, v)
        else:
            state = oracle.apply_x_exponential(state, b, BitString.from_int(1 << (N - 1 - v), N))
    return state


def pattern_distribution(pattern: MeasurementPattern) -> OutcomeDistribution:
    """Joint distribution of all raw outcomes, node order as in the pattern."""
    return oracle.measure_all_distribution(pattern_state(pattern))


def input_offset(pattern: MeasurementPattern, x: BitString | str) -> BitString:
    if isinstance(x, str):
        x = BitString.from_str(x)
    if len(x) != pattern.inputs:
        raise DimensionError(f"input has length {len(x)}, pattern expects {pattern.inputs}")
    return BitString(x.bits + (0,) * (pattern.registers - pattern.inputs))


def corrected_output_distribution(pattern: MeasurementPattern, x: BitString | str) -> OutcomeDistribution:
    xbar = input_offset(pattern, x)
    raw = pattern_distribution(pattern)
    probs = pushforward(raw.probs, pattern.correction, xbar.to_int())
    return OutcomeDistribution(pattern.registers, probs)


def _unit(N: int, v: int) -> int:
    return 1 << (N - 1 - v)


def pattern_to_iqp(pattern: MeasurementPattern) -> IqpCircuit:
    """IQP* circuit on total_nodes qubits whose zero-input output law is the pattern's.

    CZ edges between X-measured nodes follow the Hadamard-sandwich identity
    and become three X-diagonal gates.  A rotated node v with neighbour set
    n_v becomes D(pi/4, n_v + e_v) and D(theta, n_v): the CZ fan-in, the
    rotation and the readout of v collapse to those two parity gates (up to
    an outcome-dependent global phase).  Rotated nodes must not be adjacent
    to each other.
    """
    N = pattern.total_nodes
    rotated = set(pattern.rotated_nodes)
    gates: list[IqpGate] = []
    for u, v in sorted(pattern.edges):
        if u in rotated and v in rotated:
            raise ValueError(f"edge ({u}, {v}) joins two rotated nodes; no IQP rewrite is defined")
        if u in rotated or v in rotated:
            continue
        gates.append(IqpGate(_QUARTER, BitString.from_int(_unit(N, u) | _unit(N, v), N)))
        gates.append(IqpGate(_MINUS_QUARTER, BitString.from_int(_unit(N, u), N)))
        gates.append(IqpGate(_MINUS_QUARTER, BitString.from_int(_unit(N, v), N)))
    for v in sorted(rotated):
        nbr = 0
        for w in pattern.neighbors(v):
            nbr |= _unit(N, w)
        gates.append(IqpGate(_QUARTER, BitString.from_int(nbr | _unit(N, v), N)))
        if nbr:
            gates.append(IqpGate(pattern.basis[v], BitString.from_int(nbr, N)))
    return IqpCircuit(N, N, tuple(gates))


def serialize_pattern(pattern: MeasurementPattern) -> str:
    lines = [
        f"pattern nodes={pattern.total_nodes} registers={pattern.registers} inputs={pattern.inputs}",
        f"# {SIGN_CONVENTION}",
        "# nodes are numbered from 1; registers first, then one ancilla per gate",
    ]
    lines += [f"edge {u + 1} {v + 1}" for u, v in sorted(pattern.edges)]
    for v, b in enumerate(pattern.basis):
        lines.append(f"basis {v + 1} X" if b is PAULI_X else f"basis {v + 1} rot {b}")
    for j, row in enumerate(pattern.correction):
        nodes = " ".join(str(v + 1) for v in np.flatnonzero(row))
        lines.append(f"correct {j + 1} {nodes}".rstrip())
    return "\n".join(lines) + "\n"


def _header_fields(parts: list[str]) -> dict[str, int]:
    out = {}
    for token in parts:
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"bad header field {token!r}")
        out[key] = int(value)
    return out


def parse_pattern(text: str, source: str | None = None) -> MeasurementPattern:
    header = None
    edges: set[tuple[int, int]] = set()
    bases: dict[int, Angle | None] = {}
    rows: dict[int, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()

        def fail(msg: str):
            raise ParseError(msg, lineno, source)

        def node(token: str) -> int:
            try:
                v = int(token)
            except ValueError:
                fail(f"bad node number {token!r}")
            if not 1 <= v <= header["nodes"]:
                fail(f"node {v} out of range 1..{header['nodes']}")
            return v - 1

        if header is None:
            if parts[0] != "pattern":
                fail("expected header 'pattern nodes=<N> registers=<q>'")
            try:
                header = _header_fields(parts[1:])
            except ValueError as exc:
                fail(str(exc))
            if "nodes" not in header or "registers" not in header:
                fail("header needs nodes= and registers=")
            continue
        key = parts[0]
        if key == "edge":
            if len(parts) != 3:
                fail("'edge' takes two node numbers")
            u, v = node(parts[1]), node(parts[2])
            if u == v:
                fail("self-loop edge")
            edges.add((min(u, v), max(u, v)))
        elif key == "basis":
            if len(parts) < 3:
                fail("'basis' takes a node and 'X' or 'rot <angle>'")
            v = node(parts[1])
            if v in bases:
                fail(f"duplicate basis for node {v + 1}")
            if parts[2] == "X" and len(parts) == 3:
                bases[v] = PAULI_X
            elif parts[2] == "rot" and len(parts) == 4:
                try:
                    bases[v] = Angle.parse(parts[3])
                except ValueError as exc:
                    fail(str(exc))
            else:
                fail("basis must be 'X' or 'rot <angle>'")
        elif key == "correct":
            if len(parts) < 2:
                fail("'correct' takes an output bit and a node list")
            try:
                j = int(parts[1])
            except ValueError:
                fail(f"bad output bit {parts[1]!r}")
            if not 1 <= j <= header["registers"]:
                fail(f"output bit {j} out of range 1..{header['registers']}")
            if j - 1 in rows:
                fail(f"duplicate correction row {j}")
            rows[j - 1] = [node(t) for t in parts[2:]]
        else:
            fail(f"unknown declaration {key!r}")
    if header is None:
        raise ParseError("empty pattern file", None, source)
    N, q = header["nodes"], header["registers"]
    correction = np.zeros((q, N), dtype=np.uint8)
    for j in range(q):
        for v in rows.get(j, [j]):
            correction[j, v] ^= 1
    basis = tuple(bases.get(v, PAULI_X) for v in range(N))
    try:
        return MeasurementPattern(N, q, frozenset(edges), basis, correction, header.get("inputs"))
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), None, source) from None
