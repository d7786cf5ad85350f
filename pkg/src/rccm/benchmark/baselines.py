"""Two-step comparators: per-subject GLasso with k-means, and Ward clustering with pooled GLasso."""

from typing import List, Optional, Tuple

import numpy as np

from ..clustering import frobenius_distance_matrix, kmeans_vectorized, ward_cluster
from ..config.models import SolverOptions
from ..core.em import initial_subject_estimates
from ..core.panel import TimeSeriesPanel
from ..core.solvers import glasso_fit
from ..utils.logging import get_logger

logger = get_logger(__name__)


def glasso_kmeans_baseline(
    panel: TimeSeriesPanel,
    lambda1: float,
    G: int,
    seed: int,
    restarts: int = 10,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Per-subject graphical lasso, then k-means on the vectorized estimates.

    Solver errors propagate. There are no group-level estimates.

    Returns:
        Labels and subject-level precision matrices
    """
    opts = opts or SolverOptions()
    precisions = [glasso_fit(subject.sample_cov, lambda1, opts) for subject in panel.subjects]
    labels = kmeans_vectorized(precisions, G, seed, restarts)
    return labels, precisions


def ward_pooled_baseline(
    panel: TimeSeriesPanel,
    lambda1: float,
    G: int,
    init_glasso_lambda: float = 1e-3,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
    """
    Ward clustering of lightly penalized estimates, then one graphical lasso per cluster.

    Each cluster's estimate is fitted on the pooled covariance
    ``sum n_k S_k / sum n_k`` of its members and copied to them.

    Returns:
        Labels, subject-level precisions (cluster estimates copied) and group-level precisions
    """
    opts = opts or SolverOptions()
    initial = initial_subject_estimates(panel, init_glasso_lambda, opts)
    labels = ward_cluster(frobenius_distance_matrix(initial), G)
    group_precisions = []
    for g in range(G):
        members = np.flatnonzero(labels == g)
        total = sum(panel.subjects[k].n for k in members)
        pooled = sum(panel.subjects[k].n * panel.subjects[k].sample_cov for k in members) / total
        group_precisions.append(glasso_fit(pooled, lambda1, opts))
    subject_precisions = [group_precisions[g].copy() for g in labels]
    return labels, subject_precisions, group_precisions
