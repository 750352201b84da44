import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import circuits
from iqpmbcc import engine, oracle
from iqpmbcc.circuit import Angle, BitString, IqpCircuit
from iqpmbcc.distribution import OutcomeDistribution, total_variation_distance
from iqpmbcc.errors import DimensionError, PostselectionFailed, ZeroProbabilityEvent
from iqpmbcc.gf2 import is_affine
from iqpmbcc.postselect import (
    GadgetWitness,
    PostselectionSpec,
    empirical_distribution,
    find_nonlinear_gadget,
    goodness_of_fit,
    postselect,
    postselect_by_repetition,
    postselected_samples,
    replay_gadget,
)

PI8 = [Angle.pi(k, 8) for k in range(1, 17)]

Q3 = IqpCircuit.build(
    3, 3, [(Angle.pi(1, 8), "110"), (Angle.pi(1, 5), "011"), (Angle.pi(3, 7), "101"), (Angle.pi(1, 6), "010")]
)
# bits 0 and 2 of Q3 given bit 1 = 0, and the event probability, frozen from the dense oracle
Q3_POST = [0.10243780600691421, 0.04764750464034569, 0.1284825754561463, 0.7214321138965939]
Q3_EVENT = 0.5546270030561027

# six-gate OR gadget found by the search over pi/8 multiples
OR_GADGET = IqpCircuit.build(
    4,
    2,
    [
        (Angle.pi(1, 8), "0001"),
        (Angle.pi(1, 8), "0011"),
        (Angle.pi(1, 8), "0100"),
        (Angle.pi(3, 8), "0110"),
        (Angle.pi(1, 4), "1000"),
        (Angle.pi(1, 4), "1101"),
    ],
)


def spec(text):
    return PostselectionSpec.parse(text)


def test_spec_parse_and_validation():
    s = spec("0=1, 2=0")
    assert s.positions == (0, 2) and str(s.required) == "10"
    assert str(s) == "0=1,2=0"
    for bad in ("0", "0=2", "a=1", "0=1,0=0", "-1=0"):
        with pytest.raises(ValueError):
            spec(bad)
    with pytest.raises(ValueError):
        PostselectionSpec((0, 1), BitString.from_str("0"))


def test_postselect_uniform():
    r = postselect(OutcomeDistribution.uniform(2), spec("0=0"))
    assert r.probability == 0.5
    assert r.dist.probs.tolist() == [0.5, 0.5]
    assert r.kept == (1,)


def test_postselect_zero_probability():
    with pytest.raises(ZeroProbabilityEvent, match="0=0"):
        postselect(OutcomeDistribution.point_mass(BitString.from_str("10")), spec("0=0"))


def test_postselect_frozen_table():
    r = postselect(oracle.simulate_iqp_dense(Q3, "000"), spec("1=0"))
    np.testing.assert_allclose(r.dist.probs, Q3_POST, atol=1e-12)
    assert r.probability == pytest.approx(Q3_EVENT, abs=1e-12)
    assert r.kept == (0, 2)


def test_postselect_range_checks():
    d = OutcomeDistribution.uniform(2)
    with pytest.raises(DimensionError):
        postselect(d, spec("2=0"))
    with pytest.raises(ValueError, match="unconditioned"):
        postselect(d, spec("0=0,1=0"))


@st.composite
def dist_and_spec(draw):
    c = draw(circuits(min_q=2, max_q=5))
    r = draw(st.integers(1, c.q - 1))
    positions = draw(st.permutations(range(c.q)))[:r]
    required = BitString(tuple(draw(st.lists(st.integers(0, 1), min_size=r, max_size=r))))
    return c, PostselectionSpec(tuple(positions), required)


@settings(max_examples=60, deadline=None)
@given(dist_and_spec())
def test_postselect_normalization_and_mass(cs):
    c, s = cs
    d = engine.zero_input_distribution(c)
    mass = sum(p for b, p in d.items() if all(b[i] == v for i, v in zip(s.positions, s.required)))
    if mass == 0:
        return
    r = postselect(d, s)
    assert r.dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert r.probability == pytest.approx(mass, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(dist_and_spec(), st.data())
def test_postselect_commutes_with_offset(cs, data):
    c, s = cs
    d = engine.zero_input_distribution(c)
    off = BitString(tuple(data.draw(st.lists(st.integers(0, 1), min_size=c.q, max_size=c.q))))
    try:
        a = postselect(d, s)
    except ZeroProbabilityEvent:
        return
    b = postselect(d.permuted_by_xor(off), s.shifted(off))
    kept_off = BitString(tuple(off[j] for j in a.kept))
    assert b.probability == pytest.approx(a.probability, abs=1e-12)
    assert b.dist.allclose(a.dist.permuted_by_xor(kept_off), 1e-12)


def test_repetition_certain_event():
    c = IqpCircuit(3, 1)
    res = postselect_by_repetition(c, "1", spec("1=0,2=0"), seed=4)
    assert res.tries == 1
    assert str(res.outcome) == "1"


def test_repetition_failure():
    c = IqpCircuit(2, 2)
    with pytest.raises(PostselectionFailed) as info:
        postselect_by_repetition(c, "00", spec("0=1"), seed=0, max_tries=50)
    assert info.value.tries == 50


def test_repetition_half_event_geometric():
    c = IqpCircuit.build(2, 1, [(Angle.pi(1, 4), "10")])
    runs = postselected_samples(c, "0", spec("0=1"), seed=3, count=2000, max_tries=64)
    mean = np.mean([r.tries for r in runs])
    assert mean == pytest.approx(2.0, abs=0.15)


def test_repetition_frequencies():
    N = 20_000
    runs = postselected_samples(Q3, "000", spec("1=0"), seed=8, count=N)
    emp = empirical_distribution(np.array([r.outcome.to_int() for r in runs]), 2)
    exact = OutcomeDistribution(2, Q3_POST)
    assert total_variation_distance(emp, exact) <= 3 * math.sqrt(4 / N)


def test_repetition_reproducible():
    a = postselected_samples(Q3, "010", spec("2=1"), seed=5, count=30)
    b = postselected_samples(Q3, "010", spec("2=1"), seed=5, count=30)
    assert a == b


def test_gadget_none_for_pauli_angles():
    assert find_nonlinear_gadget([Angle.pi(1, 2)], max_qubits=1, max_gates=4) is None
    assert find_nonlinear_gadget([Angle.pi(1, 2), Angle.pi(1)], max_qubits=4, max_gates=3) is None


def test_gadget_none_for_one_input():
    # every Boolean function of one bit is affine
    assert find_nonlinear_gadget(PI8, max_qubits=3, max_gates=2, n_inputs=1) is None


def test_gadget_none_at_three_qubits():
    assert find_nonlinear_gadget(PI8, max_qubits=3, max_gates=3) is None


def test_or_gadget_replays():
    w = GadgetWitness(OR_GADGET, spec("0=0,1=0,3=0"), 2, (0, 1, 1, 1), (0.125,) * 4)
    r = replay_gadget(w)
    assert r.truth_table == (0, 1, 1, 1)
    assert not is_affine(r.truth_table)
    np.testing.assert_allclose(r.output_probabilities, [0, 1, 1, 1], atol=1e-9)
    np.testing.assert_allclose(r.event_probabilities, [0.125] * 4, atol=1e-12)


def test_fit_passes_on_own_samples(worked_q2):
    exact = engine.output_distribution(worked_q2, "11")
    report = goodness_of_fit(engine.sample(worked_q2, "11", seed=1, count=10_000), exact)
    assert report.passed
    assert report.samples == 10_000
    assert report.tvd <= 3 * math.sqrt(4 / 10_000)
    assert "result=pass" in report.to_keyvalue()


def test_fit_fails_point_mass_vs_uniform():
    k = 3
    report = goodness_of_fit(["000"] * 500, OutcomeDistribution.uniform(k))
    assert not report.passed
    assert report.tvd == pytest.approx(1 - 2**-k)


def test_fit_flags_impossible_samples():
    exact = OutcomeDistribution(2, [0.5, 0.5, 0, 0])
    report = goodness_of_fit(["00"] * 50 + ["01"] * 49 + ["10"], exact)
    assert report.impossible == 1
    assert not report.passed


def test_fit_pools_small_bins():
    exact = OutcomeDistribution(3, [0.9, 0.09, 0.004, 0.003, 0.001, 0.001, 0.0005, 0.0005])
    rng = np.random.default_rng(2)
    idx = engine.sample_indices(exact, rng, 1000)
    report = goodness_of_fit(idx, exact)
    assert report.bins < 8
    assert report.dof == report.bins - 1


def test_fit_rejects_empty_and_bad_lengths():
    with pytest.raises(ValueError):
        goodness_of_fit([], OutcomeDistribution.uniform(1))
    with pytest.raises(DimensionError):
        goodness_of_fit(["01"], OutcomeDistribution.uniform(1))
