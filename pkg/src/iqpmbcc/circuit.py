"""Bit strings, angles and IQP* circuits, plus the circuit text format.

Bit ``j`` of a string is the ``j``-th character from the left.  When a
string is used as an array index it is read as a big-endian integer, so
bit 0 is the most significant bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionError, ParseError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BitString:
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ValueError("bit string must have length >= 1")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bit string elements must be 0 or 1, got {self.bits!r}")

    @classmethod
    def from_str(cls, text: str) -> BitString:
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_int(cls, value: int, length: int) -> BitString:
        if value < 0 or value >= 1 << length:
            raise ValueError(f"{value} does not fit in {length} bits")
        return cls(tuple((value >> (length - 1 - j)) & 1 for j in range(length)))

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls((0,) * length)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, j: int) -> int:
        return self.bits[j]

    def __int__(self) -> int:
        return self.to_int()

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def __xor__(self, other: BitString) -> BitString:
        return xor(self, other)

    def to_int(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def weight(self) -> int:
        return sum(self.bits)

    def support(self) -> tuple[int, ...]:
        """Positions holding a 1."""
        return tuple(j for j, b in enumerate(self.bits) if b)


def xor(a: BitString, b: BitString) -> BitString:
    if len(a) != len(b):
        raise DimensionError(f"cannot xor strings of length {len(a)} and {len(b)}")
    return BitString(tuple(x ^ y for x, y in zip(a.bits, b.bits)))


def _as_bits(value: BitString | str) -> BitString:
    return value if isinstance(value, BitString) else BitString.from_str(value)


_PI_TOKEN = re.compile(r"^pi\*(-?\d+)(?:/(\d+))?$")


@dataclass(frozen=True)
class Angle:
    """Rotation angle in radians, canonical in (0, 2pi].

    ``pi_multiple`` is set when the angle is an exact rational multiple of
    pi; it is then reduced to lowest terms and lies in (0, 2].
    """

    value: float
    pi_multiple: Fraction | None = None

    @classmethod
    def pi(cls, numerator: int | Fraction, denominator: int = 1) -> Angle:
        f = Fraction(numerator, denominator) % 2
        if f == 0:
            f = Fraction(2)
        return cls(float(f) * math.pi, f)

    @classmethod
    def radians(cls, value: float) -> Angle:
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"angle must be finite, got {value}")
        r = math.fmod(value, TWO_PI)
        if r <= 0.0:
            r += TWO_PI
        return cls(r)

    @classmethod
    def parse(cls, token: str) -> Angle:
        m = _PI_TOKEN.match(token)
        if m:
            den = int(m.group(2) or 1)
            if den == 0:
                raise ValueError("zero denominator in angle")
            return cls.pi(int(m.group(1)), den)
        try:
            value = float(token)
        except ValueError:
            raise ValueError(f"bad angle {token!r}; expected decimal radians or pi*p/q") from None
        return cls.radians(value)

    @property
    def is_exact(self) -> bool:
        return self.pi_multiple is not None

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.pi_multiple is not None:
            f = self.pi_multiple
            return f"pi*{f.numerator}/{f.denominator}"
        return repr(self.value)

    def negated(self) -> Angle:
        if self.pi_multiple is not None:
            return Angle.pi(-self.pi_multiple)
        return Angle.radians(-self.value)


@dataclass(frozen=True)
class IqpGate:
    """The commuting gate exp(i * theta * X[support])."""

    theta: Angle
    support: BitString

    def __post_init__(self):
        if self.support.weight() == 0:
            raise ValueError("all-zeros support is the identity and is not a gate")

    @property
    def mask(self) -> int:
        return self.support.to_int()


@dataclass(frozen=True)
class IqpCircuit:
    q: int
    n: int
    gates: tuple[IqpGate, ...] = ()

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"need at least one qubit, got q={self.q}")
        if not 1 <= self.n <= self.q:
            raise ValueError(f"input length n={self.n} must satisfy 1 <= n <= q={self.q}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if len(g.support) != self.q:
                raise ValueError(f"gate support {g.support} has length {len(g.support)}, expected {self.q}")

    @classmethod
    def build(cls, q: int, n: int, gates: Iterable[tuple[Angle | float, BitString | str]]) -> IqpCircuit:
        """Convenience constructor from (angle, support) pairs."""
        out = []
        for theta, support in gates:
            if not isinstance(theta, Angle):
                theta = Angle.radians(theta)
            out.append(IqpGate(theta, _as_bits(support)))
        return cls(q, n, tuple(out))

    def with_gates(self, gates: Sequence[IqpGate]) -> IqpCircuit:
        return IqpCircuit(self.q, self.n, tuple(gates))

    def inputs(self) -> Iterator[BitString]:
        """All 2^n input strings in lexicographic order."""
        for v in range(1 << self.n):
            yield BitString.from_int(v, self.n)


def embed_input(circuit: IqpCircuit, x: BitString | str) -> BitString:
    """Pad the input with q - n trailing zeros."""
    x = _as_bits(x)
    if len(x) != circuit.n:
        raise DimensionError(f"input has length {len(x)}, circuit expects n={circuit.n}")
    return BitString(x.bits + (0,) * (circuit.q - circuit.n))


def parse_circuit(text: str, source: str | None = None) -> IqpCircuit:
    q = n = None
    q_line = n_line = None
    gates: list[IqpGate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key, args = parts[0], parts[1:]

        def fail(msg: str):
            raise ParseError(msg, lineno, source)

        if key in ("qubits", "inputs"):
            if len(args) != 1:
                fail(f"'{key}' takes one integer")
            try:
                value = int(args[0])
            except ValueError:
                fail(f"'{key}' value {args[0]!r} is not an integer")
            if value < 1:
                fail(f"'{key}' must be >= 1")
            if key == "qubits":
                if q is not None:
                    fail("duplicate 'qubits' declaration")
                q, q_line = value, lineno
            else:
                if n is not None:
                    fail("duplicate 'inputs' declaration")
                n, n_line = value, lineno
            if q is not None and n is not None and n > q:
                fail(f"inputs n={n} exceeds qubits q={q}")
        elif key == "gate":
            if q is None:
                fail("'gate' before 'qubits' declaration")
            if len(args) != 2:
                fail("'gate' takes an angle and a support string")
            try:
                theta = Angle.parse(args[0])
            except ValueError as exc:
                fail(str(exc))
            if not 0.0 < theta.value <= TWO_PI:
                fail(f"angle {args[0]} outside (0, 2pi]")
            support = args[1]
            if any(c not in "01" for c in support):
                fail(f"support {support!r} is not a 0/1 string")
            if len(support) != q:
                fail(f"support {support!r} has length {len(support)}, expected {q}")
            if "1" not in support:
                fail("all-zeros support (identity gate) is not allowed")
            gates.append(IqpGate(theta, BitString.from_str(support)))
        else:
            fail(f"unknown declaration {key!r}")
    if q is None:
        raise ParseError("missing 'qubits' declaration", None, source)
    if n is None:
        raise ParseError("missing 'inputs' declaration", None, source)
    return IqpCircuit(q, n, tuple(gates))


def serialize_circuit(circuit: IqpCircuit) -> str:
    lines = [f"qubits {circuit.q}", f"inputs {circuit.n}"]
    lines += [f"gate {g.theta} {g.support}" for g in circuit.gates]
    return "\n".join(lines) + "\n"


def random_circuit(
    rng: np.random.Generator,
    q: int,
    n: int | None = None,
    n_gates: int | None = None,
    max_gates: int = 8,
) -> IqpCircuit:
    """Random circuit with uniformly drawn nonzero supports and angles in (0, 2pi]."""
    if n is None:
        n = int(rng.integers(1, q + 1))
    if n_gates is None:
        n_gates = int(rng.integers(0, max_gates + 1))
    gates = []
    for _ in range(n_gates):
        mask = int(rng.integers(1, 1 << q))
        # 2pi - U[0, 2pi) lies in (0, 2pi]
        theta = Angle.radians(TWO_PI - rng.uniform(0.0, TWO_PI))
        gates.append(IqpGate(theta, BitString.from_int(mask, q)))
    return IqpCircuit(q, n, tuple(gates))
