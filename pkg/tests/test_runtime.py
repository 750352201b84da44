import math
import threading
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import circuits
from iqpmbcc import engine
from iqpmbcc.circuit import Angle, BitString, IqpCircuit
from iqpmbcc.compiler import PAULI_X, MeasurementPattern, compile_to_pattern
from iqpmbcc.distribution import OutcomeDistribution, format_distribution, total_variation_distance
from iqpmbcc.errors import DimensionError, ParseError
from iqpmbcc.gf2 import all_affine_tables
from iqpmbcc.runtime import (
    LinearProcessor,
    MbccInstance,
    ResourceDistribution,
    exact_mbcc_distribution,
    format_manifest,
    instance_from_pattern,
    load_manifest,
    parse_manifest,
    processor_from_pattern,
    resource_from_pattern,
)


def bs(s):
    return BitString.from_str(s)


def point(s):
    return ResourceDistribution(OutcomeDistribution.point_mass(bs(s)))


def test_resource_examples():
    # the q=1 empty-circuit resource is a point mass at 0 (|+> read out in X)
    r = resource_from_pattern(compile_to_pattern(IqpCircuit(1, 1)))
    assert r.bits == 1
    np.testing.assert_allclose(r.probs, [1.0, 0.0], atol=1e-15)
    # a lone rotated node is uniform whatever its angle
    p = MeasurementPattern(2, 1, frozenset(), (PAULI_X, Angle.pi(1, 2)), [[1, 0]])
    np.testing.assert_allclose(resource_from_pattern(p).probs, [0.5, 0.5, 0, 0], atol=1e-15)
    worked = compile_to_pattern(IqpCircuit.build(2, 2, [(Angle.pi(1, 4), "11"), (Angle.pi(1, 8), "10")]))
    r = resource_from_pattern(worked)
    assert r.bits == 4 and r.probs.shape == (16,)
    assert "nodes=4" in r.provenance


def test_processor_examples():
    p = processor_from_pattern(compile_to_pattern(IqpCircuit(1, 1)), "1")
    assert p.matrix.tolist() == [[1]] and str(p.offset) == "1"
    worked = compile_to_pattern(IqpCircuit.build(2, 2, [(0.3, "11"), (0.2, "10")]))
    for x in ("00", "10"):
        p = processor_from_pattern(worked, x)
        assert p.matrix.tolist() == worked.correction.tolist()
        assert str(p.offset) == x
    with pytest.raises(DimensionError):
        processor_from_pattern(worked, "1")


def test_run_once_examples():
    inst = MbccInstance(point("110"), LinearProcessor(np.eye(3, dtype=np.uint8), bs("000")))
    assert str(inst.run_once(1)) == "110"
    const = MbccInstance(
        ResourceDistribution(OutcomeDistribution.uniform(3)), LinearProcessor(np.zeros((3, 3), dtype=np.uint8), bs("101"))
    )
    assert {str(const.run_once(s)) for s in range(20)} == {"101"}


def test_single_gate_frequencies():
    inst = instance_from_pattern(compile_to_pattern(IqpCircuit.build(1, 1, [(Angle.pi(1, 4), "1")])), "0")
    N = 4000
    outs = [inst.run_once(seed).to_int() for seed in range(N)]
    freq = np.bincount(outs, minlength=2) / N
    assert np.abs(freq - 0.5).max() <= 3 * math.sqrt(2 / N)


def test_poll_counting():
    inst = instance_from_pattern(compile_to_pattern(IqpCircuit.build(2, 1, [(0.4, "11")])), "1")
    assert inst.polls == 0
    inst.run_once(0)
    assert inst.polls == 1
    inst.run_once(0)
    assert inst.polls == 2
    inst.run_many(3, 25)
    assert inst.polls == 27


def test_poll_counter_is_thread_safe():
    inst = MbccInstance(point("1"), LinearProcessor([[1]], bs("0")))
    workers = [threading.Thread(target=lambda: [inst.run_once(i) for i in range(200)]) for _ in range(4)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    assert inst.polls == 800


def test_exact_examples():
    parity = MbccInstance(ResourceDistribution(OutcomeDistribution.uniform(2)), LinearProcessor([[1, 1]], bs("0")))
    assert exact_mbcc_distribution(parity).probs.tolist() == [0.5, 0.5]
    flip = MbccInstance(point("11"), LinearProcessor(np.eye(2, dtype=np.uint8), bs("01")))
    assert exact_mbcc_distribution(flip).probs.tolist() == [0, 0, 1, 0]


def test_dimension_checks():
    with pytest.raises(DimensionError):
        LinearProcessor(np.eye(2, dtype=np.uint8), bs("1"))
    with pytest.raises(DimensionError):
        MbccInstance(point("11"), LinearProcessor([[1]], bs("0")))
    with pytest.raises(DimensionError):
        LinearProcessor([[1, 0]], bs("0")).apply(bs("1"))


@settings(max_examples=25, deadline=None)
@given(circuits(max_q=4, max_gates=5))
def test_pipeline_equals_engine(c):
    pattern = compile_to_pattern(c)
    for x in c.inputs():
        got = exact_mbcc_distribution(instance_from_pattern(pattern, x))
        assert total_variation_distance(got, engine.output_distribution(c, x)) <= 1e-10


def test_run_many_matches_exact(worked_q2):
    inst = instance_from_pattern(compile_to_pattern(worked_q2), "01")
    N = 20_000
    outs = np.array([b.to_int() for b in inst.run_many(11, N)])
    emp = OutcomeDistribution(2, np.bincount(outs, minlength=4) / N)
    assert total_variation_distance(emp, exact_mbcc_distribution(inst)) <= 3 * math.sqrt(4 / N)


def test_processor_only_expresses_affine_maps(rng):
    # every constructible processor computes an affine function of each resource bit pattern
    affine = {n: set(all_affine_tables(n)) for n in (1, 2, 3)}
    for n in (1, 2, 3):
        for _ in range(30):
            a = rng.integers(0, 2, size=(2, n), dtype=np.uint8)
            c = BitString(tuple(int(v) for v in rng.integers(0, 2, size=2)))
            table = LinearProcessor(a, c).truth_table()
            for col in table.T:
                assert tuple(int(v) for v in col) in affine[n]


def test_manifest_round_trip(tmp_path: Path):
    dist = OutcomeDistribution(2, [0.1, 0.2, 0.3, 0.4])
    (tmp_path / "res.txt").write_text(format_distribution(dist))
    proc = LinearProcessor([[1, 1], [0, 1]], bs("10"))
    (tmp_path / "m.txt").write_text(format_manifest("res.txt", proc))
    inst = load_manifest(tmp_path / "m.txt")
    assert inst.processor.matrix.tolist() == [[1, 1], [0, 1]]
    assert str(inst.processor.offset) == "10"
    np.testing.assert_allclose(inst.resource.probs, dist.probs, atol=1e-15)


def test_manifest_multiple_matrix_lines():
    m = parse_manifest("resource r.txt\nmatrix 10\nmatrix 01\n")
    assert m.processor.matrix.tolist() == [[1, 0], [0, 1]]
    assert str(m.processor.offset) == "00"


@pytest.mark.parametrize(
    "text, line",
    [
        ("matrix 1\n", None),
        ("resource r\n", None),
        ("resource r\nmatrix 12\n", 2),
        ("resource r\nmatrix 10 1\n", 2),
        ("resource r\nmatrix 10\noffset 2\n", 3),
        ("resource r\nweights 1\n", 2),
        ("resource r\nmatrix 10\noffset 11\n", None),
    ],
)
def test_manifest_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_manifest(text, "m.txt")
    assert info.value.line == line
