"""Configuration models and loading."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from rccm.config import (
    BenchmarkConfig,
    FitOptions,
    SelectionMode,
    SimulationConfig,
    TuningGrid,
    TuningParams,
    load_config,
)
from rccm.exceptions import ConfigurationError, InvalidTuningError


def test_grid_axes_expand_in_lexicographic_order():
    grid = TuningGrid.from_axes([0.2, 0.1], [20.0], [0.05, 0.01], G=3)
    assert [(c.lambda1, c.lambda3) for c in grid.candidates] == [(0.1, 0.01), (0.1, 0.05), (0.2, 0.01), (0.2, 0.05)]
    assert grid.G == 3


def test_grid_rejects_unknown_axes_and_mixed_groups():
    with pytest.raises(ValidationError):
        TuningGrid.model_validate({"lambda1": [0.1], "lambda2": [10.0], "lambda3": [0.1], "lambda4": [1]})
    with pytest.raises(ValidationError):
        TuningGrid.model_validate({"lambda1": [0.1], "lambda2": [10.0]})
    with pytest.raises(ValidationError):
        TuningGrid(
            candidates=[
                TuningParams(lambda1=0.1, lambda2=10.0, lambda3=0.1, G=2),
                TuningParams(lambda1=0.1, lambda2=10.0, lambda3=0.1, G=3),
            ]
        )


def test_tuning_params_reject_negative_penalties():
    with pytest.raises(ValidationError):
        TuningParams(lambda1=-0.1, lambda2=10.0, lambda3=0.1)
    with pytest.raises(ValidationError):
        TuningParams(lambda1=0.1, lambda2=0.0, lambda3=0.1)


def test_check_panel_constraints():
    TuningParams(lambda1=0.1, lambda2=5.0, lambda3=0.1).check_panel(5, [50, 50])
    with pytest.raises(InvalidTuningError) as excinfo:
        TuningParams(lambda1=0.1, lambda2=4.0, lambda3=0.1).check_panel(5, [50])
    assert excinfo.value.subject is None
    with pytest.raises(InvalidTuningError) as excinfo:
        TuningParams(lambda1=0.1, lambda2=4.5, lambda3=0.1).check_panel(5, [50, 1])
    assert excinfo.value.subject == 1


def test_fit_options_defaults():
    opts = FitOptions()
    assert opts.epsilon == 1e-3
    assert opts.max_em_iterations == 200
    assert opts.solver.max_iterations == 500


def test_simulation_config_balances_cluster_sizes():
    assert SimulationConfig(G=3, K=10).cluster_sizes == [4, 3, 3]


def test_load_yaml_and_json(tmp_path):
    yaml_path = tmp_path / "benchmark.yaml"
    yaml_path.write_text("settings:\n  - {G: 2, K: 6, p: 5}\nreplicates: 3\nselection: stars\n")
    cfg = load_config(yaml_path, BenchmarkConfig)
    assert cfg.replicates == 3
    assert cfg.selection == SelectionMode.STARS
    assert cfg.settings[0].n == 177

    json_path = tmp_path / "grid.json"
    json_path.write_text('{"G": 2, "lambda1": [0.1], "lambda2": [15], "lambda3": [0.05]}')
    assert load_config(json_path, TuningGrid).candidates[0].lambda2 == 15.0


def test_load_reports_offending_keys(tmp_path):
    path = tmp_path / "simulation.yaml"
    path.write_text("K: 4\nrho: 1.5\nclusters: 2\n")
    with pytest.raises(ConfigurationError) as excinfo:
        load_config(path, SimulationConfig)
    assert set(excinfo.value.offending_keys) == {"rho", "clusters"}


def test_load_rejects_non_mapping_and_bad_syntax(tmp_path):
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_config(listing, SimulationConfig)
    broken = tmp_path / "broken.yaml"
    broken.write_text("K: [1, 2\n")
    with pytest.raises(ConfigurationError):
        load_config(broken, SimulationConfig)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.yaml", SimulationConfig)


CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize(
    "name, model",
    [
        ("simulation.json", SimulationConfig),
        ("simulation_desk.yaml", SimulationConfig),
        ("grid.json", TuningGrid),
        ("benchmark_desk.yaml", BenchmarkConfig),
        ("benchmark_stars.yaml", BenchmarkConfig),
    ],
)
def test_shipped_configurations_validate(name, model):
    assert isinstance(load_config(CONFIGS / name, model), model)
