"""Gap statistic for the number of clusters."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..config.models import FitOptions, GapConfig, TuningParams
from ..core.em import initial_subject_estimates
from ..core.linalg import inv_pd, make_positive_definite
from ..core.panel import TimeSeriesPanel, build_panel
from ..core.restarts import fit_with_restarts
from ..core.state import hard_assignments
from ..exceptions import InvalidInputError
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from ..utils.parallel import parallel_map
from ..utils.random import substream

logger = get_logger(__name__)

DISPERSION_FLOOR = 1e-12


class GapReport(BaseModel):
    """Gap curve over G = 2..G_max and the selected number of clusters."""

    G_values: List[int] = Field(..., description="Numbers of clusters evaluated")
    observed: List[float] = Field(..., description="Log within-cluster dispersion of the data per G")
    reference: List[List[float]] = Field(..., description="Reference dispersions, one row per reference dataset")
    gap: List[float] = Field(..., description="Mean reference dispersion minus observed, per G")
    sigma: List[float] = Field(..., description="Reference standard deviation times sqrt(1 + 1/B), per G")
    selected_G: int = Field(..., description="Selected number of clusters")
    criterion_met: bool = Field(..., description="False when no G satisfied the rule and G_max was taken")
    B: int = Field(..., description="Number of reference datasets")
    seed: int = Field(..., description="Seed of the reference stream")
    reference_glasso_lambda: float = Field(..., description="Penalty of the dispersion estimates")
    tuning: TuningParams = Field(..., description="Penalties reused at every G")
    warnings: List[str] = Field(default_factory=list, description="Non-fatal issues")


def within_cluster_dispersion(glasso_estimates: Sequence[np.ndarray], labels, G: int) -> float:
    """
    Log of the within-cluster variability of precision matrices.

    ``log( sum_g sum_{k in g} ||Omega_k - mean_g||_F^2 / (G p^2) )`` with the
    inner sum floored at 1e-12.

    Raises:
        InvalidInputError: If a label is outside 0..G-1 or a cluster is empty
    """
    labels = np.asarray(labels, dtype=int)
    if labels.shape[0] != len(glasso_estimates):
        raise InvalidInputError(f"Got {labels.shape[0]} labels for {len(glasso_estimates)} matrices")
    if labels.size and (labels.min() < 0 or labels.max() >= G):
        raise InvalidInputError(f"Labels must lie in 0..{G - 1}")
    stacked = np.stack([np.asarray(m, dtype=float) for m in glasso_estimates])
    p = stacked.shape[1]
    total = 0.0
    for g in range(G):
        members = stacked[labels == g]
        if members.shape[0] == 0:
            raise InvalidInputError(f"Cluster {g} is empty")
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return float(np.log(max(total / (G * p * p), DISPERSION_FLOOR)))


def _occupied_dispersion(estimates, labels, G: int, warnings: List[str], context: str) -> float:
    occupied = np.unique(labels)
    if occupied.size < G:
        message = f"{context}: only {occupied.size} of {G} clusters occupied; dispersion uses the occupied ones"
        logger.warning(message)
        warnings.append(message)
    remap = {int(g): i for i, g in enumerate(occupied)}
    return within_cluster_dispersion(estimates, [remap[int(g)] for g in labels], int(occupied.size))


def generate_reference_panel(
    panel: TimeSeriesPanel,
    glasso_estimates: Sequence[np.ndarray],
    seed: int,
    index: int = 0,
) -> TimeSeriesPanel:
    """
    Simulate a reference panel without cluster structure.

    Each subject's precision matrix has entries drawn uniformly between the
    entrywise minimum and maximum of the observed estimates, is shifted to be
    positive definite, and generates ``n_k`` Gaussian observations.

    Args:
        panel: Observed panel (sizes, names, standardization)
        glasso_estimates: Observed per-subject estimates
        seed: Seed of the reference stream
        index: Reference dataset number

    Returns:
        The reference panel
    """
    stacked = np.stack([np.asarray(m, dtype=float) for m in glasso_estimates])
    low, high = stacked.min(axis=0), stacked.max(axis=0)
    p = panel.p
    upper = np.triu(np.ones((p, p), dtype=bool))
    matrices = []
    for k, subject in enumerate(panel.subjects):
        rng = substream(seed, "reference", index, k)
        draw = np.where(upper, rng.uniform(low, high), 0.0)
        precision = make_positive_definite(draw + np.triu(draw, k=1).T)
        covariance = inv_pd(precision)
        matrices.append(rng.multivariate_normal(np.zeros(p), covariance, size=subject.n, method="cholesky"))
    return build_panel(matrices, standardize=panel.standardized, roi_names=panel.roi_names)


def select_cluster_count(G_values: Sequence[int], gaps: Sequence[float], sigmas: Sequence[float]) -> Tuple[int, bool]:
    """
    Smallest G with ``Gap(G) >= Gap(G+1) - sigma(G+1)``.

    Returns:
        The selected G and whether the rule held; the largest G is returned
        with False when it never does
    """
    for i in range(len(G_values) - 1):
        if gaps[i] >= gaps[i + 1] - sigmas[i + 1]:
            return int(G_values[i]), True
    return int(G_values[-1]), len(G_values) == 1


def _dispersion_curve(
    panel: TimeSeriesPanel,
    estimates: Sequence[np.ndarray],
    tp_base: TuningParams,
    G_values: Sequence[int],
    fit_options: FitOptions,
    warnings: List[str],
    context: str,
    threads: Optional[int],
) -> List[float]:
    curve = []
    for G in G_values:
        state = fit_with_restarts(panel, tp_base.with_groups(G), fit_options, threads=threads)
        curve.append(_occupied_dispersion(estimates, hard_assignments(state), G, warnings, f"{context}, G={G}"))
    return curve


def gap_select(
    panel: TimeSeriesPanel,
    tp_base: TuningParams,
    cfg: Optional[GapConfig] = None,
    fit_options: Optional[FitOptions] = None,
    threads: Optional[int] = None,
) -> GapReport:
    """
    Choose the number of clusters by the gap statistic.

    For G = 2..G_max the RCCM (with the penalties of ``tp_base``) clusters the
    observed panel and B reference panels; dispersion is measured on per-subject
    graphical lasso estimates with a negligible penalty.

    Args:
        panel: Data panel
        tp_base: Penalties reused at every G
        cfg: G_max, B, reference penalty and seed
        fit_options: EM controls
        threads: Worker count across reference datasets

    Returns:
        The gap report
    """
    cfg = cfg or GapConfig()
    fit_options = fit_options or FitOptions()
    if cfg.G_max > panel.K:
        raise InvalidInputError(f"G_max = {cfg.G_max} exceeds the number of subjects K = {panel.K}")
    G_values = list(range(2, cfg.G_max + 1))
    warnings: List[str] = []
    metrics = get_metrics_collector()

    logger.info(f"Gap statistic over G={G_values} with B={cfg.B} reference datasets")
    with metrics.measure_execution_time("gap_select"):
        observed_estimates = initial_subject_estimates(panel, cfg.reference_glasso_lambda, fit_options.solver)
        observed = _dispersion_curve(
            panel, observed_estimates, tp_base, G_values, fit_options, warnings, "observed", threads
        )

        def run_reference(b: int) -> Tuple[List[float], List[str]]:
            local: List[str] = []
            reference = generate_reference_panel(panel, observed_estimates, cfg.seed, b)
            estimates = initial_subject_estimates(reference, cfg.reference_glasso_lambda, fit_options.solver, 1)
            curve = _dispersion_curve(reference, estimates, tp_base, G_values, fit_options, local, f"reference {b}", 1)
            return curve, local

        outcomes = parallel_map(run_reference, range(cfg.B), threads)

    reference = np.array([curve for curve, _ in outcomes])
    for _, local in outcomes:
        warnings.extend(local)
    gap = reference.mean(axis=0) - np.array(observed)
    sigma = reference.std(axis=0, ddof=0) * np.sqrt(1.0 + 1.0 / cfg.B)
    selected, met = select_cluster_count(G_values, gap.tolist(), sigma.tolist())
    if not met:
        message = f"Gap rule never held below G_max; selecting G = {selected}"
        logger.warning(message)
        warnings.append(message)
    logger.info(f"Gap statistic selected G = {selected}")

    return GapReport(
        G_values=G_values,
        observed=[float(v) for v in observed],
        reference=reference.tolist(),
        gap=gap.tolist(),
        sigma=sigma.tolist(),
        selected_G=selected,
        criterion_met=met,
        B=cfg.B,
        seed=cfg.seed,
        reference_glasso_lambda=cfg.reference_glasso_lambda,
        tuning=tp_base,
        warnings=warnings,
    )
