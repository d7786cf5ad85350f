"""Baselines and the benchmark harness."""

import numpy as np
import pytest

from rccm.benchmark import runner
from rccm.benchmark.baselines import glasso_kmeans_baseline, ward_pooled_baseline
from rccm.benchmark.metrics import adjusted_rand_index
from rccm.benchmark.runner import run_benchmark
from rccm.config import BenchmarkConfig, Method, SimulationConfig
from rccm.exceptions import EmptyClusterError


@pytest.fixture
def small_benchmark():
    setting = SimulationConfig(G=2, K=6, p=5, n=100, rho=0.0, subject_perturbation_rate=0.0)
    return BenchmarkConfig(settings=[setting], replicates=2, rccm={"lambda1": 0.05, "lambda2": 15.0, "lambda3": 0.05})


def test_glasso_kmeans_recovers_separated_groups(two_group_data):
    truth, panel = two_group_data
    labels, precisions = glasso_kmeans_baseline(panel, 0.1, 2, seed=0)
    assert len(precisions) == panel.K
    assert adjusted_rand_index(truth.labels, labels) == pytest.approx(1.0)


def test_ward_pooled_copies_cluster_estimates(two_group_data):
    truth, panel = two_group_data
    labels, subject_precisions, group_precisions = ward_pooled_baseline(panel, 0.1, 2)
    assert len(group_precisions) == 2
    for k, g in enumerate(labels):
        assert np.array_equal(subject_precisions[k], group_precisions[g])
    assert adjusted_rand_index(truth.labels, labels) == pytest.approx(1.0)


def test_benchmark_table_shape(small_benchmark):
    table = run_benchmark(small_benchmark)
    frame = table.to_frame()
    assert frame["method"].tolist() == ["rccm", "glasso-kmeans", "ward-pooled"]
    assert len(table.results) == 2 * 3
    for column in ("rand_index_mean", "adjusted_rand_index_mean", "tpr_subject_mean", "fpr_subject_mean"):
        assert frame[column].notna().all()
    glasso_row = frame[frame["method"] == "glasso-kmeans"].iloc[0]
    assert np.isnan(glasso_row["tpr_group_mean"])
    assert (frame["failures"] + frame["n_ok"] == 2).all()


def test_benchmark_is_reproducible(small_benchmark):
    small_benchmark.methods = [Method.GLASSO_KMEANS, Method.WARD_POOLED]
    first = run_benchmark(small_benchmark)
    second = run_benchmark(small_benchmark, threads=2)
    assert first.model_dump() == second.model_dump()
    assert "rccm" not in first.to_frame()["method"].tolist()


def test_failures_are_counted(small_benchmark, monkeypatch):
    def lose_cluster(*args, **kwargs):
        raise EmptyClusterError(1, iteration=3)

    monkeypatch.setattr(runner, "fit_with_restarts", lose_cluster)
    small_benchmark.methods = [Method.RCCM]
    table = run_benchmark(small_benchmark)
    (row,) = table.rows
    assert row.failures == 2
    assert row.n_ok == 0
    assert row.mean["rand_index"] is None
    assert all(r.error.startswith("EmptyClusterError") for r in table.results)
