import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from iqpmbcc.circuit import BitString
from iqpmbcc.distribution import (
    OutcomeDistribution,
    format_distribution,
    format_histogram,
    format_probability,
    parse_distribution,
)
from iqpmbcc.errors import DimensionError, ParseError
from iqpmbcc.gf2 import affine_image, all_affine_tables, is_affine, pushforward


def test_validation():
    with pytest.raises(ValueError):
        OutcomeDistribution(1, [0.7, 0.7])
    with pytest.raises(ValueError):
        OutcomeDistribution(1, [1.1, -0.1])
    with pytest.raises(DimensionError):
        OutcomeDistribution(2, [0.5, 0.5])
    d = OutcomeDistribution(1, [1 + 1e-15, -1e-15])
    assert d.probs[1] == 0.0
    with pytest.raises(ValueError):
        d.probs[0] = 0.5


def test_format_examples():
    assert format_probability(1.0) == "1.000000000000000"
    assert format_probability(0.5) == "0.500000000000000"
    assert format_probability(0.0366116523516816) == "0.0366116523516816"
    assert format_distribution(OutcomeDistribution.point_mass(BitString.from_str("01"))) == "dist k=2\n01 1.000000000000000\n"


def test_format_skips_zeros_histogram_keeps_them():
    d = OutcomeDistribution(2, [0.5, 0, 0, 0.5])
    assert format_distribution(d) == "dist k=2\n00 0.500000000000000\n11 0.500000000000000\n"
    assert format_histogram(d).splitlines()[1] == "01 0.000000000000000"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("k=2\n", "header"),
        ("dist k=2\n0 1\n", "2-bit"),
        ("dist k=1\n0 x\n", "bad probability"),
        ("dist k=1\n0 -0.5\n1 1.5\n", ">= 0"),
        ("dist k=1\n1 0.5\n0 0.5\n", "order"),
        ("dist k=1\n0 0.5\n0 0.5\n", "duplicate"),
        ("dist k=1\n0 0.5\n", "sum"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_distribution(text, "d.txt")


@st.composite
def distributions(draw):
    k = draw(st.integers(1, 6))
    w = draw(arrays(float, 1 << k, elements=st.floats(0, 1)))
    if w.sum() == 0:
        w[0] = 1.0
    return OutcomeDistribution.from_unnormalized(k, w)


@settings(max_examples=60)
@given(distributions())
def test_format_parse_round_trip(d):
    back = parse_distribution(format_distribution(d))
    assert back.k == d.k
    assert np.abs(back.probs - d.probs).max() <= 1e-14


@given(distributions(), st.data())
def test_permute_by_xor_involution(d, data):
    off = BitString(tuple(data.draw(st.lists(st.integers(0, 1), min_size=d.k, max_size=d.k))))
    assert d.permuted_by_xor(off).permuted_by_xor(off).allclose(d, 0.0)


def test_pushforward_examples():
    uniform2 = np.full(4, 0.25)
    assert pushforward(uniform2, np.array([[1, 1]]), 0).tolist() == [0.5, 0.5]
    point11 = np.array([0, 0, 0, 1.0])
    assert pushforward(point11, np.eye(2, dtype=np.uint8), 0b01).tolist() == [0, 0, 1, 0]
    with pytest.raises(DimensionError):
        affine_image(np.eye(2, dtype=np.uint8), 0, 3)


def test_affine_tables():
    for n in range(1, 4):
        tables = set(all_affine_tables(n))
        assert len(tables) == 2 ** (n + 1)
        everything = set(itertools.product((0, 1), repeat=1 << n))
        assert {t for t in everything if is_affine(t)} == tables
    assert not is_affine((0, 0, 0, 1))
    assert not is_affine((0, 1, 1, 1))
    assert is_affine((0, 1, 1, 0))
    with pytest.raises(ValueError):
        is_affine((0, 1, 1))
