"""Synthetic hub-network panels."""

import importlib

import numpy as np
import pytest

from rccm.benchmark.simulate import (
    NetworkTruth,
    edge_count,
    generate_truth,
    hub_count,
    row_division_repair,
    sample_panel,
    simulate,
)
from rccm.config import SimulationConfig
from rccm.core.linalg import cholesky_or_none, is_positive_definite
from rccm.exceptions import InvalidInputError

simulate_module = importlib.import_module("rccm.benchmark.simulate")


def test_hub_and_edge_counts():
    assert hub_count(10) == 3
    assert edge_count(10) == 7


def test_group_networks_share_designated_edges():
    truth = generate_truth(SimulationConfig(G=2, K=4, p=10, rho=0.2, seed=1))
    assert len(truth.shared_edges) == 1
    for network, hubs in zip(truth.group_networks, truth.hubs):
        assert len(network) == 7
        assert len(hubs) == 3
        assert truth.shared_edges <= network
        for i, j in network:
            assert i in hubs or j in hubs
    assert truth.group_networks[0] & truth.group_networks[1] == truth.shared_edges


def test_high_overlap_shares_more_edges():
    truth = generate_truth(SimulationConfig(G=2, K=4, p=10, rho=0.8, seed=2))
    assert len(truth.shared_edges) == 5


def test_full_overlap_gives_identical_groups():
    truth = generate_truth(SimulationConfig(G=2, K=4, p=10, rho=1.0, seed=3))
    assert truth.group_networks[0] == truth.group_networks[1]
    assert np.allclose(truth.group_precisions[0], truth.group_precisions[1])


def test_shared_edges_have_common_values():
    truth = generate_truth(SimulationConfig(G=3, K=6, p=16, rho=0.5, seed=4))
    for i, j in truth.shared_edges:
        values = {truth.group_precisions[g][i, j] for g in range(3)}
        assert len(values) == 1


def test_subjects_toggle_expected_number_of_pairs():
    cfg = SimulationConfig(G=2, K=6, p=10, rho=0.2, seed=5)
    truth = generate_truth(cfg)
    for k, network in enumerate(truth.subject_networks):
        group_network = truth.group_networks[truth.labels[k]]
        assert len(network ^ group_network) == 1


def test_precisions_are_positive_definite():
    truth = generate_truth(SimulationConfig(G=3, K=9, p=12, magnitude="low", seed=6))
    for M in truth.group_precisions + truth.subject_precisions:
        assert is_positive_definite(M)
        assert np.allclose(M, M.T)


def test_labels_follow_cluster_sizes():
    truth = generate_truth(SimulationConfig(G=3, K=7, p=9, cluster_sizes=[2, 2, 3], seed=7))
    assert np.bincount(truth.labels).tolist() == [2, 2, 3]


def test_network_seed_fixes_structure_only():
    a = generate_truth(SimulationConfig(G=2, K=4, p=10, seed=1, network_seed=42))
    b = generate_truth(SimulationConfig(G=2, K=4, p=10, seed=2, network_seed=42))
    assert a.group_networks == b.group_networks
    assert not np.allclose(a.group_precisions[0], b.group_precisions[0])


def test_simulation_is_reproducible():
    cfg = SimulationConfig(G=2, K=4, p=5, n=50, seed=7)
    truth_a, panel_a = simulate(cfg)
    truth_b, panel_b = simulate(cfg)
    assert np.array_equal(truth_a.labels, truth_b.labels)
    for a, b in zip(panel_a.subjects, panel_b.subjects):
        assert a.data.shape == (50, 5)
        assert np.array_equal(a.data, b.data)


def test_diagonal_precisions_give_uncorrelated_samples():
    p = 4
    truth = NetworkTruth(
        group_networks=[frozenset()],
        subject_networks=[frozenset()],
        group_precisions=[np.eye(p)],
        subject_precisions=[np.diag([1.0, 2.0, 0.5, 3.0])],
        labels=np.array([0]),
        shared_edges=frozenset(),
        hubs=[[0]],
    )
    panel = sample_panel(truth, 5000, seed=0)
    correlation = np.corrcoef(panel.subjects[0].data, rowvar=False)
    assert np.max(np.abs(correlation - np.eye(p))) < 0.05


def test_row_division_repair_returns_positive_definite():
    M = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, 0.9], [0.9, 0.9, 1.0]])
    M[0, 2] = M[2, 0] = -0.9
    repaired = row_division_repair(M)
    assert is_positive_definite(repaired)
    assert np.allclose(repaired, repaired.T)


def test_configuration_rejects_inconsistent_sizes():
    with pytest.raises(ValueError):
        SimulationConfig(G=2, K=4, cluster_sizes=[1, 2])
    with pytest.raises(ValueError):
        SimulationConfig(G=5, K=4)


def test_row_division_repair_divides_off_diagonals_by_larger_count():
    M = np.eye(4)
    M[0, 1] = M[1, 0] = 0.9
    M[0, 2] = M[2, 0] = -0.6
    M[2, 3] = M[3, 2] = 0.8
    repaired = row_division_repair(M)
    assert np.array_equal(np.diag(repaired), np.ones(4))
    assert repaired[0, 1] == pytest.approx(0.3)
    assert repaired[0, 2] == pytest.approx(-0.2)
    assert repaired[2, 3] == pytest.approx(0.8 / 3)
    off_diagonal = np.abs(repaired).sum(axis=1) - np.abs(np.diag(repaired))
    assert np.all(off_diagonal < np.diag(repaired))


@pytest.fixture
def no_spectrum_shift(monkeypatch):
    def fail(M, floor=None):
        raise AssertionError("spectrum shift fallback was used")

    monkeypatch.setattr(simulate_module, "make_positive_definite", fail)


@pytest.mark.parametrize("seed", range(10))
def test_high_magnitude_precisions_are_well_conditioned(seed, no_spectrum_shift):
    truth = generate_truth(SimulationConfig(G=2, K=20, p=10, rho=0.2, magnitude="high", seed=seed))
    for M in truth.group_precisions + truth.subject_precisions:
        assert np.allclose(M, M.T)
        assert cholesky_or_none(M) is not None
        assert np.all((np.diag(M) > 0.75) & (np.diag(M) < 1.25))
    for M in truth.group_precisions:
        assert np.array_equal(np.diag(M), np.ones(10))


def test_high_magnitude_group_edges_survive_repair():
    truth = generate_truth(SimulationConfig(G=2, K=4, p=10, rho=0.2, magnitude="high", seed=0))
    for network, M in zip(truth.group_networks, truth.group_precisions):
        values = np.array([abs(M[edge]) for edge in network])
        assert values.min() >= 0.5 / 10
        assert values.max() <= 1.0


def test_low_magnitude_is_one_third_of_high():
    high = generate_truth(SimulationConfig(G=2, K=6, p=10, rho=0.2, magnitude="high", seed=11))
    low = generate_truth(SimulationConfig(G=2, K=6, p=10, rho=0.2, magnitude="low", seed=11))
    assert high.group_networks == low.group_networks
    for H, L in zip(high.group_precisions, low.group_precisions):
        off = ~np.eye(10, dtype=bool)
        assert np.allclose(L[off], H[off] / 3)
        assert np.array_equal(np.diag(L), np.diag(H))


@pytest.mark.parametrize("seed", range(20))
def test_truth_invariants_hold_across_seeds(seed):
    cfg = SimulationConfig(G=2, K=8, p=10, rho=0.2, magnitude="high" if seed % 2 else "low", seed=seed)
    truth = generate_truth(cfg)
    shared = truth.shared_edges
    assert len(shared) == 1
    assert truth.group_networks[0] & truth.group_networks[1] == shared
    for i, j in shared:
        assert truth.group_precisions[0][i, j] == truth.group_precisions[1][i, j]
    for k, network in enumerate(truth.subject_networks):
        assert len(network ^ truth.group_networks[truth.labels[k]]) == 1
        assert is_positive_definite(truth.subject_precisions[k])


def test_infeasible_overlap_raises():
    with pytest.raises(InvalidInputError):
        generate_truth(SimulationConfig(G=4, K=4, p=4, rho=0.0, seed=0))
