"""Synthetic data, baselines, metrics and the benchmark harness."""

from ..clustering import frobenius_distance_matrix, kmeans_vectorized, ward_cluster
from .baselines import glasso_kmeans_baseline, ward_pooled_baseline
from .metrics import (
    EdgeRates,
    EvaluationResult,
    adjusted_rand_index,
    edge_metrics,
    evaluate_fit,
    match_clusters,
    rand_index,
)
from .runner import BenchmarkRow, BenchmarkTable, ReplicateResult, run_benchmark, run_replicate
from .simulate import NetworkTruth, generate_truth, sample_panel, simulate

__all__ = [
    "BenchmarkRow",
    "BenchmarkTable",
    "EdgeRates",
    "EvaluationResult",
    "NetworkTruth",
    "ReplicateResult",
    "adjusted_rand_index",
    "edge_metrics",
    "evaluate_fit",
    "frobenius_distance_matrix",
    "generate_truth",
    "glasso_kmeans_baseline",
    "kmeans_vectorized",
    "match_clusters",
    "rand_index",
    "run_benchmark",
    "run_replicate",
    "sample_panel",
    "simulate",
    "ward_cluster",
    "ward_pooled_baseline",
]
