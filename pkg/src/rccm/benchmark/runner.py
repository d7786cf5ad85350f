"""Benchmark harness: simulate, tune, fit every method, evaluate and aggregate."""

from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..config.models import (
    BenchmarkConfig,
    FitterType,
    Magnitude,
    Method,
    SelectionMode,
    SimulationConfig,
    TuningGrid,
    TuningParams,
)
from ..core.restarts import fit_with_restarts
from ..core.state import hard_assignments
from ..exceptions import RCCMError
from ..selection.stars import stars_select
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from ..utils.parallel import parallel_map
from ..utils.random import derive_seed
from .baselines import glasso_kmeans_baseline, ward_pooled_baseline
from .metrics import METRIC_NAMES, EvaluationResult, evaluate_fit
from .simulate import NetworkTruth, simulate

logger = get_logger(__name__)


class ReplicateResult(BaseModel):
    """One method on one simulated dataset."""

    setting: int = Field(..., description="Index of the simulation setting")
    replicate: int = Field(..., description="Replicate number")
    method: Method = Field(..., description="Method evaluated")
    result: Optional[EvaluationResult] = Field(None, description="Scores, null on failure")
    error: Optional[str] = Field(None, description="Failure message")
    tuning: Optional[Dict[str, float]] = Field(None, description="Tuning parameters used")


class BenchmarkRow(BaseModel):
    """Aggregate over replicates for one setting and method."""

    method: Method
    G: int
    K: int
    p: int
    n: int
    magnitude: Magnitude
    overlap: float
    n_ok: int = Field(..., description="Replicates that produced scores")
    failures: int = Field(..., description="Replicates that failed")
    mean: Dict[str, Optional[float]] = Field(..., description="Metric means")
    sd: Dict[str, Optional[float]] = Field(..., description="Metric standard deviations")


class BenchmarkTable(BaseModel):
    """Benchmark output: aggregate rows plus every per-replicate record."""

    rows: List[BenchmarkRow]
    results: List[ReplicateResult]
    replicates: int
    selection: SelectionMode
    seed: int

    def to_frame(self) -> pd.DataFrame:
        """One row per setting and method with ``<metric>_mean`` and ``<metric>_sd`` columns."""
        records = []
        for row in self.rows:
            record = {
                "method": row.method.value,
                "G": row.G,
                "K": row.K,
                "p": row.p,
                "n": row.n,
                "magnitude": row.magnitude.value,
                "overlap": row.overlap,
                "n_ok": row.n_ok,
                "failures": row.failures,
            }
            for name in METRIC_NAMES:
                record[f"{name}_mean"] = row.mean.get(name)
                record[f"{name}_sd"] = row.sd.get(name)
            records.append(record)
        return pd.DataFrame.from_records(records)


def _rccm_tuning(cfg: BenchmarkConfig, setting: SimulationConfig, panel, seed: int, threads) -> TuningParams:
    if cfg.selection == SelectionMode.FIXED:
        return cfg.rccm.with_groups(setting.G)
    base = cfg.rccm_grid.candidates if cfg.rccm_grid is not None else [cfg.rccm]
    grid = TuningGrid(candidates=[c.with_groups(setting.G) for c in base])
    stars = cfg.stars.model_copy(update={"seed": seed})
    fit = cfg.fit.model_copy(update={"seed": seed})
    return stars_select(panel, grid, stars, FitterType.RCCM, fit, threads).selected


def _glasso_lambda(cfg: BenchmarkConfig, panel, seed: int, threads) -> float:
    if cfg.selection == SelectionMode.FIXED:
        return cfg.glasso_lambda
    grid = TuningGrid.from_axes(lambda1=cfg.glasso_grid, lambda2=[1.0], lambda3=[0.0])
    stars = cfg.stars.model_copy(update={"seed": seed})
    return stars_select(panel, grid, stars, FitterType.GLASSO, cfg.fit, threads).selected.lambda1


def _run_method(
    method: Method, cfg: BenchmarkConfig, setting: SimulationConfig, truth: NetworkTruth, panel, seed: int, cache
) -> Tuple[EvaluationResult, Dict[str, float]]:
    G = setting.G
    if method == Method.RCCM:
        tp = _rccm_tuning(cfg, setting, panel, seed, 1)
        state = fit_with_restarts(panel, tp, cfg.fit.model_copy(update={"seed": seed}), threads=1)
        result = evaluate_fit(
            truth.labels,
            truth.subject_networks,
            hard_assignments(state),
            state.subject_precisions,
            truth.group_networks,
            state.group_precisions,
        )
        tuning = {"lambda1": tp.lambda1, "lambda2": tp.lambda2, "lambda3": tp.lambda3}
    else:
        if "glasso_lambda" not in cache:
            cache["glasso_lambda"] = _glasso_lambda(cfg, panel, seed, 1)
        lam = cache["glasso_lambda"]
        if method == Method.GLASSO_KMEANS:
            labels, precisions = glasso_kmeans_baseline(
                panel, lam, G, seed, cfg.kmeans_restarts, cfg.fit.solver
            )
            result = evaluate_fit(truth.labels, truth.subject_networks, labels, precisions)
        else:
            labels, precisions, groups = ward_pooled_baseline(
                panel, lam, G, cfg.fit.init_glasso_lambda, cfg.fit.solver
            )
            result = evaluate_fit(
                truth.labels, truth.subject_networks, labels, precisions, truth.group_networks, groups
            )
        tuning = {"lambda1": lam}
    return result, tuning


def run_replicate(cfg: BenchmarkConfig, setting_index: int, replicate: int) -> List[ReplicateResult]:
    """Simulate one dataset for a setting and evaluate every configured method on it."""
    setting = cfg.settings[setting_index]
    seed = derive_seed(cfg.seed, "replicate", setting_index, replicate)
    network_seed = (
        setting.network_seed
        if setting.network_seed is not None
        else derive_seed(cfg.seed, "networks", setting_index)
    )
    sim = setting.model_copy(update={"seed": seed, "network_seed": network_seed})
    truth, panel = simulate(sim)

    records, cache = [], {}
    for method in cfg.methods:
        try:
            result, tuning = _run_method(method, cfg, setting, truth, panel, seed, cache)
            record = ReplicateResult(
                setting=setting_index, replicate=replicate, method=method, result=result, tuning=tuning
            )
        except RCCMError as e:
            logger.warning(f"Setting {setting_index} replicate {replicate}: {method.value} failed: {e}")
            record = ReplicateResult(
                setting=setting_index, replicate=replicate, method=method, error=f"{type(e).__name__}: {e}"
            )
        records.append(record)
    return records


def _aggregate(values: List[Optional[float]]):
    present = [v for v in values if v is not None]
    if not present:
        return None, None
    mean = float(np.mean(present))
    sd = float(np.std(present, ddof=1)) if len(present) >= 2 else 0.0
    return mean, sd


def aggregate_results(cfg: BenchmarkConfig, results: List[ReplicateResult]) -> List[BenchmarkRow]:
    """Mean and standard deviation per metric for every (setting, method), in configuration order."""
    rows = []
    for s, setting in enumerate(cfg.settings):
        for method in cfg.methods:
            subset = [r for r in results if r.setting == s and r.method == method]
            ok = [r.result for r in subset if r.result is not None]
            mean, sd = {}, {}
            for name in METRIC_NAMES:
                mean[name], sd[name] = _aggregate([getattr(r, name) for r in ok])
            rows.append(
                BenchmarkRow(
                    method=method,
                    G=setting.G,
                    K=setting.K,
                    p=setting.p,
                    n=setting.n,
                    magnitude=setting.magnitude,
                    overlap=setting.rho,
                    n_ok=len(ok),
                    failures=len(subset) - len(ok),
                    mean=mean,
                    sd=sd,
                )
            )
    return rows


def run_benchmark(cfg: BenchmarkConfig, threads: Optional[int] = None) -> BenchmarkTable:
    """
    Run every setting for the configured number of replicates.

    Replicates run independently (in parallel when ``threads > 1``) with their
    own seed substreams; failures are recorded per method and counted in the
    aggregate rows, never dropped silently.

    Args:
        cfg: Benchmark configuration
        threads: Worker count across replicates

    Returns:
        The benchmark table
    """
    tasks = [(s, r) for s in range(len(cfg.settings)) for r in range(cfg.replicates)]
    methods = ", ".join(m.value for m in cfg.methods)
    logger.info(f"Benchmark: {len(cfg.settings)} settings x {cfg.replicates} replicates, methods {methods}")
    with get_metrics_collector().measure_execution_time("benchmark"):
        outcomes = parallel_map(lambda task: run_replicate(cfg, *task), tasks, threads)
    results = [record for records in outcomes for record in records]
    return BenchmarkTable(
        rows=aggregate_results(cfg, results),
        results=results,
        replicates=cfg.replicates,
        selection=cfg.selection,
        seed=cfg.seed,
    )
