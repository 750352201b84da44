import math

import numpy as np
import pytest
from hypothesis import strategies as st

from iqpmbcc.circuit import Angle, BitString, IqpCircuit, IqpGate


def bitstrings(length):
    return st.lists(st.integers(0, 1), min_size=length, max_size=length).map(lambda b: BitString(tuple(b)))


def nonzero_supports(q):
    return st.integers(1, (1 << q) - 1).map(lambda m: BitString.from_int(m, q))


angles = st.one_of(
    st.builds(Angle.pi, st.integers(-32, 32), st.sampled_from([1, 2, 3, 4, 5, 6, 8, 16])),
    st.floats(1e-6, 2 * math.pi, allow_nan=False).map(Angle.radians),
)


@st.composite
def circuits(draw, min_q=1, max_q=6, max_gates=6):
    q = draw(st.integers(min_q, max_q))
    n = draw(st.integers(1, q))
    gates = draw(st.lists(st.builds(IqpGate, angles, nonzero_supports(q)), max_size=max_gates))
    return IqpCircuit(q, n, tuple(gates))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked_q2():
    """Two-qubit circuit used by several examples: (pi/8, 10), (pi/3, 11)."""
    return IqpCircuit.build(2, 2, [(Angle.pi(1, 8), "10"), (Angle.pi(1, 3), "11")])
