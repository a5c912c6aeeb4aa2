"""Marker and marking constructions for renewal processes with exponential tails."""

from .common import PipelineError, PipelineWitness, split_to_entropy
from .hazard import AlphaError, AlphaSequence, HazardChain, build_hazard_chain, compute_alpha
from .marker import (
    MarkerConstruction,
    build_marker_construction,
    joint_with_age,
    verify_age_independence,
    verify_b_probability,
    verify_marker_independence,
)
from .prop1 import StringingChoice, pair_indicator, prop1_pipeline, stringing_reduction
from .prop2 import marker_recurrence, prop2_pipeline

__all__ = [
    "AlphaError",
    "AlphaSequence",
    "HazardChain",
    "MarkerConstruction",
    "PipelineError",
    "PipelineWitness",
    "StringingChoice",
    "build_hazard_chain",
    "build_marker_construction",
    "compute_alpha",
    "joint_with_age",
    "marker_recurrence",
    "pair_indicator",
    "prop1_pipeline",
    "prop2_pipeline",
    "split_to_entropy",
    "stringing_reduction",
    "verify_age_independence",
    "verify_b_probability",
    "verify_marker_independence",
]
