"""Gap statistic for the number of clusters."""

import numpy as np
import pytest

from rccm.benchmark.simulate import simulate
from rccm.config import GapConfig, SimulationConfig, TuningParams
from rccm.exceptions import InvalidInputError
from rccm.selection.gap import (
    DISPERSION_FLOOR,
    gap_select,
    generate_reference_panel,
    select_cluster_count,
    within_cluster_dispersion,
)


def test_dispersion_scalar_example():
    value = within_cluster_dispersion([np.array([[1.0]]), np.array([[3.0]])], [0, 0], 1)
    assert value == pytest.approx(np.log(2.0))


def test_dispersion_floor_for_identical_members():
    estimates = [np.eye(2), np.eye(2), 2 * np.eye(2), 2 * np.eye(2)]
    assert within_cluster_dispersion(estimates, [0, 0, 1, 1], 2) == pytest.approx(np.log(DISPERSION_FLOOR))


def test_dispersion_is_invariant_to_relabeling(rng):
    estimates = [rng.normal(size=(3, 3)) for _ in range(5)]
    a = within_cluster_dispersion(estimates, [0, 0, 1, 1, 1], 2)
    b = within_cluster_dispersion(estimates, [1, 1, 0, 0, 0], 2)
    assert a == pytest.approx(b)


def test_dispersion_rejects_empty_cluster():
    with pytest.raises(InvalidInputError):
        within_cluster_dispersion([np.eye(2), np.eye(2)], [0, 0], 2)


def test_select_cluster_count_example():
    assert select_cluster_count([2, 3, 4], [0.1, 0.5, 0.52], [0.0, 0.01, 0.1]) == (3, True)


def test_select_cluster_count_flat_curve_picks_smallest():
    assert select_cluster_count([2, 3], [0.0, 0.0], [0.0, 0.0]) == (2, True)


def test_select_cluster_count_without_elbow_takes_largest():
    assert select_cluster_count([2, 3, 4], [0.1, 0.5, 0.9], [0.0, 0.01, 0.01]) == (4, False)
    assert select_cluster_count([2], [0.3], [0.1]) == (2, True)


def test_reference_panel_is_reproducible(small_panel):
    estimates = [np.eye(4), np.eye(4) + 0.1]
    first = generate_reference_panel(small_panel, estimates, seed=3, index=1)
    again = generate_reference_panel(small_panel, estimates, seed=3, index=1)
    assert first.sample_sizes == small_panel.sample_sizes
    assert first.roi_names == small_panel.roi_names
    for a, b in zip(first.subjects, again.subjects):
        assert np.array_equal(a.data, b.data)


def test_gap_rejects_too_many_clusters(small_panel):
    tp = TuningParams(lambda1=0.1, lambda2=10.0, lambda3=0.1)
    with pytest.raises(InvalidInputError):
        gap_select(small_panel, tp, GapConfig(G_max=4, B=1))


@pytest.mark.slow
def test_gap_with_single_candidate_and_reproducibility(two_group_data):
    _, panel = two_group_data
    tp = TuningParams(lambda1=0.05, lambda2=15.0, lambda3=0.05)
    cfg = GapConfig(G_max=2, B=2, seed=4)
    report = gap_select(panel, tp, cfg)
    assert report.G_values == [2]
    assert report.selected_G == 2
    assert report.criterion_met
    assert np.array(report.reference).shape == (2, 1)
    assert gap_select(panel, tp, cfg).model_dump() == report.model_dump()


@pytest.mark.slow
@pytest.mark.parametrize("seed", [3, 4, 5])
def test_gap_curve_selects_two_separated_clusters(seed):
    cfg = SimulationConfig(
        G=2, K=10, p=5, n=200, rho=0.0, magnitude="high", subject_perturbation_rate=0.0, seed=seed
    )
    _, panel = simulate(cfg)
    tp = TuningParams(lambda1=0.05, lambda2=15.0, lambda3=0.05)
    report = gap_select(panel, tp, GapConfig(G_max=3, B=5, seed=seed))
    assert report.G_values == [2, 3]
    assert len(report.gap) == len(report.sigma) == 2
    assert report.selected_G == 2
