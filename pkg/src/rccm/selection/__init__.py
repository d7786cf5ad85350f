"""Tuning-parameter and cluster-count selection."""

from ..core.linalg import make_positive_definite
from .estimators import EstimatorFactory, GlassoPerSubjectEstimator, PathEstimator, RCCMEstimator
from .gap import (
    GapReport,
    gap_select,
    generate_reference_panel,
    select_cluster_count,
    within_cluster_dispersion,
)
from .stars import (
    CandidateStability,
    StabilityReport,
    edge_set,
    instability,
    stars_select,
    subsample_panel,
    subsample_size,
)

__all__ = [
    "CandidateStability",
    "EstimatorFactory",
    "GapReport",
    "GlassoPerSubjectEstimator",
    "PathEstimator",
    "RCCMEstimator",
    "StabilityReport",
    "edge_set",
    "gap_select",
    "generate_reference_panel",
    "instability",
    "make_positive_definite",
    "select_cluster_count",
    "stars_select",
    "subsample_panel",
    "subsample_size",
    "within_cluster_dispersion",
]
