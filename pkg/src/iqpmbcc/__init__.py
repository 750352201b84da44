"""IQP* circuit simulation, MBQC compilation and MBCC post-processing."""

from .circuit import Angle, BitString, IqpCircuit, IqpGate, parse_circuit, random_circuit, serialize_circuit, xor
from .compiler import MeasurementPattern, compile_to_pattern, parse_pattern, pattern_to_iqp, serialize_pattern
from .distribution import OutcomeDistribution, format_distribution, parse_distribution, total_variation_distance
from .engine import output_distribution, sample
from .errors import (
    DimensionError,
    IqpError,
    ParseError,
    PostselectionFailed,
    SizeLimitError,
    ZeroProbabilityEvent,
)
from .oracle import simulate_iqp_dense
from .postselect import PostselectionSpec, find_nonlinear_gadget, goodness_of_fit
from .runtime import LinearProcessor, MbccInstance, ResourceDistribution, instance_from_pattern

__version__ = "0.1.0"

__all__ = [
    "Angle", "BitString", "IqpCircuit", "IqpGate", "parse_circuit", "random_circuit", "serialize_circuit", "xor",
    "MeasurementPattern", "compile_to_pattern", "parse_pattern", "pattern_to_iqp", "serialize_pattern",
    "OutcomeDistribution", "format_distribution", "parse_distribution", "total_variation_distance",
    "output_distribution", "sample", "simulate_iqp_dense",
    "DimensionError", "IqpError", "ParseError", "PostselectionFailed", "SizeLimitError", "ZeroProbabilityEvent",
    "PostselectionSpec", "find_nonlinear_gadget", "goodness_of_fit",
    "LinearProcessor", "MbccInstance", "ResourceDistribution", "instance_from_pattern",
]
