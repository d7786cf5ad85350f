"""Stability-based selection of tuning parameters over a grid."""

from math import comb, floor, sqrt
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..config.models import FitOptions, FitterType, StarsConfig, TuningGrid, TuningParams
from ..core.panel import TimeSeriesPanel, build_panel
from ..exceptions import InvalidInputError
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from ..utils.parallel import parallel_map
from ..utils.random import substream
from .estimators import EstimatorFactory, PathResult

logger = get_logger(__name__)

Edge = Tuple[int, int]


class CandidateStability(BaseModel):
    """Stability summary of one grid candidate."""

    lambda1: float = Field(..., description="Subject-level lasso penalty")
    lambda2: float = Field(..., description="Wishart degrees of freedom")
    lambda3: float = Field(..., description="Cluster-level lasso penalty")
    G: int = Field(..., description="Number of clusters")
    instability: Optional[float] = Field(None, description="Average edge instability (null if a fit failed)")
    sparsity: Optional[float] = Field(None, description="Mean fraction of absent edges on the full data")
    feasible: bool = Field(False, description="Instability within the bound")
    failures: int = Field(0, description="Fits that failed (full data and subsamples)")

    @property
    def tuning(self) -> TuningParams:
        return TuningParams(lambda1=self.lambda1, lambda2=self.lambda2, lambda3=self.lambda3, G=self.G)


class StabilityReport(BaseModel):
    """Outcome of stability selection."""

    fitter: FitterType = Field(..., description="Estimator that was evaluated")
    beta: float = Field(..., description="Instability bound")
    num_subsamples: int = Field(..., description="Subsamples drawn per subject")
    seed: int = Field(..., description="Seed of the subsample stream")
    subsample_sizes: List[int] = Field(..., description="Rows drawn per subject")
    candidates: List[CandidateStability] = Field(..., description="Per-candidate results in grid order")
    selected_index: int = Field(..., description="Index of the selected candidate")
    any_feasible: bool = Field(..., description="Whether any candidate met the bound")
    warnings: List[str] = Field(default_factory=list, description="Non-fatal issues")

    @property
    def selected(self) -> TuningParams:
        return self.candidates[self.selected_index].tuning


def subsample_size(n: int) -> Tuple[int, bool]:
    """
    Rows per subsample, ``floor(10 sqrt(n))``, or ``floor(0.75 n)`` when that exceeds n.

    Returns:
        The size and whether the fallback was used
    """
    b = floor(10 * sqrt(n))
    if b > n:
        return floor(0.75 * n), True
    return b, False


def subsample_panel(panel: TimeSeriesPanel, seed: int, index: int) -> TimeSeriesPanel:
    """
    Draw rows without replacement from every subject and rebuild the panel.

    Each subject uses its own stream keyed by (seed, index, subject), so the
    same (seed, index) always yields the same rows.
    """
    matrices = []
    for k, subject in enumerate(panel.subjects):
        size, fell_back = subsample_size(subject.n)
        if fell_back:
            logger.debug(f"Subject {k}: n={subject.n} below 100, subsample size {size}")
        rng = substream(seed, "subsample", index, k)
        rows = rng.choice(subject.n, size=size, replace=False)
        matrices.append(subject.data[rows])
    return build_panel(matrices, standardize=panel.standardized, roi_names=panel.roi_names)


def edge_set(precision: np.ndarray, threshold: float = 1e-8) -> FrozenSet[Edge]:
    """Unordered pairs (i, j), i < j, with ``|omega_ij| > threshold``."""
    if threshold < 0:
        raise InvalidInputError(f"Edge threshold must be nonnegative, got {threshold}")
    rows, cols = np.nonzero(np.triu(np.abs(np.asarray(precision)) > threshold, k=1))
    return frozenset(zip(rows.tolist(), cols.tolist()))


def instability(edge_sets: Sequence[Sequence[FrozenSet[Edge]]], p: int) -> float:
    """
    Average edge instability across subjects.

    For subject k and pair (s, t), ``theta`` is the fraction of subsamples
    containing the edge and ``2 theta (1 - theta)`` the probability that two
    subsamples disagree on it. The per-subject sum over pairs is divided by
    ``C(p, 2)`` and averaged over subjects.

    Args:
        edge_sets: ``edge_sets[k][i]`` is subject k's edge set on subsample i
        p: Number of variables

    Returns:
        Instability in [0, 0.5]
    """
    if len(edge_sets) == 0:
        raise InvalidInputError("Need edge sets for at least one subject")
    pairs = comb(p, 2)
    if pairs == 0:
        return 0.0
    total = 0.0
    for k, per_subsample in enumerate(edge_sets):
        N = len(per_subsample)
        if N < 2:
            raise InvalidInputError(f"Subject {k} has {N} subsamples; at least 2 are required")
        counts = np.zeros((p, p))
        for edges in per_subsample:
            for i, j in edges:
                if not (0 <= i < j < p):
                    raise InvalidInputError(f"Edge ({i}, {j}) is not a pair i < j within p = {p}")
                counts[i, j] += 1
        theta = counts[np.triu_indices(p, k=1)] / N
        total += float(np.sum(2.0 * theta * (1.0 - theta))) / pairs
    return total / len(edge_sets)


def _sparsity(result: PathResult, p: int, threshold: float) -> float:
    pairs = comb(p, 2)
    if pairs == 0:
        return 1.0
    absent = [1.0 - len(edge_set(m, threshold)) / pairs for m in result.precisions]
    return float(np.mean(absent))


def stars_select(
    panel: TimeSeriesPanel,
    grid: TuningGrid,
    cfg: Optional[StarsConfig] = None,
    fitter: FitterType = FitterType.RCCM,
    fit_options: Optional[FitOptions] = None,
    threads: Optional[int] = None,
) -> StabilityReport:
    """
    Select tuning parameters by subsample stability.

    Every candidate is fitted on N subsampled panels (sweeping the grid in
    order with warm starts) and on the full data. Candidates whose instability
    is at most beta are feasible; among them the one with the least full-data
    sparsity wins, ties going to grid order. If none is feasible the candidate
    with the smallest instability is selected and the report says so.

    Args:
        panel: Data panel
        grid: Ordered candidates
        cfg: Subsample count, bound and seed
        fitter: Estimator to evaluate
        fit_options: EM controls for the RCCM fitter
        threads: Worker count across subsamples

    Returns:
        The stability report

    Raises:
        RCCMError: The first fit error, when every candidate failed
    """
    cfg = cfg or StarsConfig()
    candidates = grid.candidates
    estimator = EstimatorFactory.create_estimator(fitter, fit_options)
    metrics = get_metrics_collector()
    warnings: List[str] = []

    sizes = []
    for k, subject in enumerate(panel.subjects):
        size, fell_back = subsample_size(subject.n)
        sizes.append(size)
        if fell_back:
            message = f"Subject {k}: floor(10 sqrt(n)) exceeds n = {subject.n}; using {size} rows per subsample"
            logger.warning(message)
            warnings.append(message)

    logger.info(
        f"Stability selection: {len(candidates)} candidates, {cfg.num_subsamples} subsamples, fitter {fitter.value}"
    )
    with metrics.measure_execution_time("stars_select"):
        full_path = estimator.fit_path(panel, candidates)

        def run_subsample(index: int) -> List[PathResult]:
            return estimator.fit_path(subsample_panel(panel, cfg.seed, index), candidates)

        subsample_paths = parallel_map(run_subsample, range(cfg.num_subsamples), threads)

    summaries: List[CandidateStability] = []
    first_error: Optional[Exception] = None
    for c, candidate in enumerate(candidates):
        results = [full_path[c]] + [path[c] for path in subsample_paths]
        failures = sum(1 for result in results if not result.ok)
        if failures:
            first_error = first_error or next(r.error for r in results if not r.ok)
            summaries.append(CandidateStability(**candidate.model_dump(), failures=failures))
            continue
        edge_sets = [
            [edge_set(path[c].precisions[k], cfg.edge_threshold) for path in subsample_paths]
            for k in range(panel.K)
        ]
        score = instability(edge_sets, panel.p)
        summaries.append(
            CandidateStability(
                **candidate.model_dump(),
                instability=score,
                sparsity=_sparsity(full_path[c], panel.p, cfg.edge_threshold),
                feasible=score <= cfg.beta,
            )
        )

    scored = [(i, s) for i, s in enumerate(summaries) if s.instability is not None]
    if not scored:
        logger.error("Every grid candidate failed to fit")
        raise first_error

    feasible = [(i, s) for i, s in scored if s.feasible]
    if feasible:
        selected = min(feasible, key=lambda item: (item[1].sparsity, item[0]))[0]
    else:
        selected = min(scored, key=lambda item: (item[1].instability, item[0]))[0]
        message = f"No candidate has instability <= {cfg.beta}; selected the most stable candidate"
        logger.warning(message)
        warnings.append(message)

    report = StabilityReport(
        fitter=fitter,
        beta=cfg.beta,
        num_subsamples=cfg.num_subsamples,
        seed=cfg.seed,
        subsample_sizes=sizes,
        candidates=summaries,
        selected_index=selected,
        any_feasible=bool(feasible),
        warnings=warnings,
    )
    chosen = summaries[selected]
    logger.info(
        f"Selected candidate {selected}: lambda=({chosen.lambda1}, {chosen.lambda2}, {chosen.lambda3}), "
        f"instability {chosen.instability:.4f}, sparsity {chosen.sparsity:.3f}"
    )
    return report
