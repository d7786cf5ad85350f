"""Clustering agreement and edge-detection metrics."""

from itertools import combinations

import numpy as np
import pytest

from rccm.benchmark.metrics import (
    adjusted_rand_index,
    edge_metrics,
    evaluate_fit,
    match_clusters,
    rand_index,
)
from rccm.exceptions import InvalidInputError


def _pair_counting_rand(a, b):
    pairs = list(combinations(range(len(a)), 2))
    agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i, j in pairs)
    return agree / len(pairs)


def test_identical_partitions():
    assert rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)


def test_rand_index_example():
    assert rand_index([0, 0, 1], [0, 1, 1]) == pytest.approx(1 / 3)


def test_rand_index_matches_pair_counting(rng):
    a = rng.integers(0, 3, size=15)
    b = rng.integers(0, 4, size=15)
    assert rand_index(a, b) == pytest.approx(_pair_counting_rand(a, b))


def test_rand_index_rejects_mismatched_lengths():
    with pytest.raises(InvalidInputError):
        rand_index([0, 1], [0, 1, 1])
    with pytest.raises(InvalidInputError):
        adjusted_rand_index([0], [0])


def test_edge_metrics_examples():
    perfect = edge_metrics({(0, 1), (1, 2)}, {(0, 1), (1, 2)}, 3)
    assert (perfect.tpr, perfect.fpr, perfect.ppv) == (1.0, 0.0, 1.0)

    complement = edge_metrics({(0, 1)}, {(0, 2), (1, 2)}, 3)
    assert (complement.tpr, complement.fpr, complement.ppv) == (0.0, 1.0, 0.0)

    counted = edge_metrics({(0, 1), (0, 2)}, {(0, 1), (1, 3)}, 4)
    assert counted.tpr == pytest.approx(0.5)
    assert counted.fpr == pytest.approx(0.25)
    assert counted.ppv == pytest.approx(0.5)


def test_edge_metrics_empty_networks():
    both_empty = edge_metrics(set(), set(), 3)
    assert (both_empty.tpr, both_empty.fpr, both_empty.ppv) == (1.0, 0.0, 1.0)
    missed = edge_metrics({(0, 1)}, set(), 3)
    assert missed.ppv == 0.0


def test_edge_metrics_rejects_out_of_range_pairs():
    with pytest.raises(InvalidInputError):
        edge_metrics({(0, 5)}, set(), 3)


def test_match_clusters_handles_permuted_labels():
    assert match_clusters([0, 0, 1, 1, 2], [2, 2, 0, 0, 1], 3, 3) == {0: 1, 1: 2, 2: 0}


def test_evaluate_fit_perfect_estimate():
    p = 3
    group_networks = [frozenset({(0, 1)}), frozenset({(1, 2)})]
    precisions = []
    for g in (0, 1):
        M = np.eye(p)
        (i, j), = group_networks[g]
        M[i, j] = M[j, i] = 0.4
        precisions.append(M)
    labels = [0, 1, 1, 0]
    result = evaluate_fit(
        labels,
        [group_networks[g] for g in labels],
        [1, 0, 0, 1],
        [precisions[g] for g in labels],
        group_networks,
        [precisions[1], precisions[0]],
    )
    assert result.rand_index == 1.0
    assert result.tpr_subject == 1.0
    assert result.fpr_subject == 0.0
    assert result.tpr_group == 1.0
    assert result.ppv_group == 1.0


def test_evaluate_fit_without_group_estimates():
    result = evaluate_fit([0, 1], [frozenset(), frozenset()], [0, 1], [np.eye(2), np.eye(2)])
    assert result.tpr_group is None
    assert result.ppv_subject == 1.0
