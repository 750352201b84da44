"""Measurement-based classical computation.

An MBCC instance polls one sample from a multi-bit resource distribution
and applies an affine GF(2) map (XOR network plus NOT mask) to it.  For
fixed-basis patterns the resource is simply the joint table of the
pattern's measurement outcomes; no density matrix is ever formed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import BitString
from .compiler import MeasurementPattern, input_offset, pattern_distribution
from .distribution import OutcomeDistribution, parse_distribution
from .engine import sample_indices
from .errors import DimensionError, ParseError
from .gf2 import as_matrix, index_bits, matvec, pushforward


@dataclass(frozen=True, eq=False)
class ResourceDistribution:
    table: OutcomeDistribution
    provenance: str = "external"

    @property
    def bits(self) -> int:
        return self.table.k

    @property
    def probs(self) -> np.ndarray:
        return self.table.probs


@dataclass(frozen=True, eq=False)
class LinearProcessor:
    """b -> A.b xor c over GF(2); nothing else is expressible."""

    matrix: np.ndarray
    offset: BitString

    def __post_init__(self):
        a = as_matrix(self.matrix)
        if a.shape[0] != len(self.offset):
            raise DimensionError(f"matrix has {a.shape[0]} rows, offset has {len(self.offset)} bits")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def outputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def inputs(self) -> int:
        return self.matrix.shape[1]

    def apply(self, b: BitString) -> BitString:
        if len(b) != self.inputs:
            raise DimensionError(f"processor takes {self.inputs} bits, got {len(b)}")
        out = matvec(self.matrix, np.array(b.bits)) ^ np.array(self.offset.bits)
        return BitString(tuple(int(v) for v in out))

    def truth_table(self) -> np.ndarray:
        """Output bits for every input index, shape (2^inputs, outputs)."""
        bits = index_bits(self.inputs).astype(np.int64)
        return ((bits @ self.matrix.T.astype(np.int64)) & 1) ^ np.array(self.offset.bits)


class MbccInstance:
    """Resource plus processor; counts how many samples have been polled."""

    def __init__(self, resource: ResourceDistribution, processor: LinearProcessor):
        if processor.inputs != resource.bits:
            raise DimensionError(f"processor takes {processor.inputs} bits, resource provides {resource.bits}")
        self.resource = resource
        self.processor = processor
        self._polls = 0
        self._lock = threading.Lock()

    @property
    def polls(self) -> int:
        return self._polls

    def _poll(self, rng: np.random.Generator, count: int) -> np.ndarray:
        idx = sample_indices(self.resource.table, rng, count)
        with self._lock:
            self._polls += count
        return idx

    def run_once(self, seed: int) -> BitString:
        """Poll exactly one resource sample and post-process it."""
        idx = int(self._poll(np.random.default_rng(seed), 1)[0])
        return self.processor.apply(BitString.from_int(idx, self.resource.bits))

    def run_many(self, seed: int, count: int) -> list[BitString]:
        """``count`` independent runs (one poll each) from a single seeded stream."""
        idx = self._poll(np.random.default_rng(seed), count)
        bits = index_bits(self.resource.bits, idx).astype(np.int64)
        out = ((bits @ self.processor.matrix.T.astype(np.int64)) & 1) ^ np.array(self.processor.offset.bits)
        return [BitString(tuple(int(v) for v in row)) for row in out]


def resource_from_pattern(pattern: MeasurementPattern) -> ResourceDistribution:
    edges = len(pattern.edges)
    rot = len(pattern.rotated_nodes)
    label = f"pattern nodes={pattern.total_nodes} registers={pattern.registers} edges={edges} rotated={rot}"
    return ResourceDistribution(pattern_distribution(pattern), label)


def processor_from_pattern(pattern: MeasurementPattern, x: BitString | str) -> LinearProcessor:
    return LinearProcessor(pattern.correction, input_offset(pattern, x))


def instance_from_pattern(pattern: MeasurementPattern, x: BitString | str) -> MbccInstance:
    return MbccInstance(resource_from_pattern(pattern), processor_from_pattern(pattern, x))


def exact_mbcc_distribution(instance: MbccInstance) -> OutcomeDistribution:
    p = instance.processor
    probs = pushforward(instance.resource.probs, p.matrix, p.offset.to_int())
    return OutcomeDistribution(p.outputs, probs)


@dataclass(frozen=True)
class Manifest:
    resource: Path
    processor: LinearProcessor


def parse_manifest(text: str, source: str | None = None, base: Path | None = None) -> Manifest:
    """Read ``resource <path>``, ``matrix <row> <row> ...`` and ``offset <bits>`` lines.

    Several ``matrix`` lines append rows.  A relative resource path is taken
    relative to ``base``.
    """
    resource = None
    rows: list[str] = []
    offset = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "resource":
            if not rest:
                raise ParseError("'resource' needs a path", lineno, source)
            resource = Path(rest)
        elif key == "matrix":
            for row in rest.split():
                if any(c not in "01" for c in row):
                    raise ParseError(f"matrix row {row!r} is not a 0/1 string", lineno, source)
                if rows and len(row) != len(rows[0]):
                    raise ParseError("matrix rows differ in length", lineno, source)
                rows.append(row)
        elif key == "offset":
            try:
                offset = BitString.from_str(rest)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, source) from None
        else:
            raise ParseError(f"unknown declaration {key!r}", lineno, source)
    if resource is None:
        raise ParseError("missing 'resource' line", None, source)
    if not rows:
        raise ParseError("missing 'matrix' line", None, source)
    if offset is None:
        offset = BitString.zeros(len(rows))
    if base is not None and not resource.is_absolute():
        resource = base / resource
    matrix = np.array([[int(c) for c in row] for row in rows], dtype=np.uint8)
    try:
        return Manifest(resource, LinearProcessor(matrix, offset))
    except DimensionError as exc:
        raise ParseError(str(exc), None, source) from None


def load_manifest(path: Path) -> MbccInstance:
    manifest = parse_manifest(path.read_text(), str(path), path.parent)
    table = parse_distribution(manifest.resource.read_text(), str(manifest.resource))
    return MbccInstance(ResourceDistribution(table, f"file {manifest.resource}"), manifest.processor)


def format_manifest(resource_path: str, processor: LinearProcessor) -> str:
    rows = " ".join("".join(str(int(v)) for v in row) for row in processor.matrix)
    return f"resource {resource_path}\nmatrix {rows}\noffset {processor.offset}\n"
