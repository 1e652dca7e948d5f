"""Descriptor-agnostic sequence-based visual place recognition.

Core pieces: per-dimension set normalization of place descriptors (batch,
streaming, and segment-scoped), cosine cost matrices for whole-image and
left/right composite descriptors, slope-swept sequence search with a
trajectory-uniqueness acceptance score, and a precision-recall evaluation
protocol, all verifiable end-to-end on synthetic traverses.
"""

from .descriptors import (
    CompositeDescriptor,
    DescriptorSet,
    NormStats,
    composites_from_halves,
    make_composite,
    normalize_batch,
    normalize_segmented,
    normalize_with,
    split_composites,
    stats_update,
)
from .evaluation import (
    GroundTruth,
    PRCurve,
    PRPoint,
    Traverse,
    associate_ground_truth,
    interpolate_anchors,
    pca_project,
    principal_axes,
    resample_by_distance,
    score_matches,
    sweep_sequence_length,
)
from .matching import (
    CostMatrix,
    build_composite_cost_matrix,
    build_cost_matrix,
    composite_distance,
    cosine_distance,
)
from .sequence import (
    MatchResult,
    SearchParams,
    apply_acceptance,
    match_all,
    search,
    sequence_cost,
    slope_grid,
)
from .synth import SynthConfig, SynthWorld, generate

__version__ = "0.1.0"

__all__ = [
    "CompositeDescriptor",
    "CostMatrix",
    "DescriptorSet",
    "GroundTruth",
    "MatchResult",
    "NormStats",
    "PRCurve",
    "PRPoint",
    "SearchParams",
    "SynthConfig",
    "SynthWorld",
    "Traverse",
    "apply_acceptance",
    "associate_ground_truth",
    "build_composite_cost_matrix",
    "build_cost_matrix",
    "composite_distance",
    "composites_from_halves",
    "cosine_distance",
    "generate",
    "interpolate_anchors",
    "make_composite",
    "match_all",
    "normalize_batch",
    "normalize_segmented",
    "normalize_with",
    "pca_project",
    "principal_axes",
    "resample_by_distance",
    "score_matches",
    "search",
    "sequence_cost",
    "slope_grid",
    "split_composites",
    "stats_update",
    "sweep_sequence_length",
]
