"""Shared fixtures."""

import numpy as np
import pytest

from rccm.benchmark.simulate import simulate
from rccm.config import SimulationConfig
from rccm.core.panel import build_panel
from rccm.utils.metrics import MetricsCollector, set_metrics_collector


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_panel(rng):
    """Three unstructured subjects with p=4."""
    return build_panel([rng.normal(size=(60, 4)) for _ in range(3)])


@pytest.fixture
def two_group_config():
    """Well-separated two-cluster setting: no shared edges and no per-subject toggles."""
    return SimulationConfig(G=2, K=10, p=5, n=200, rho=0.0, magnitude="high", subject_perturbation_rate=0.0, seed=3)


@pytest.fixture
def two_group_data(two_group_config):
    return simulate(two_group_config)


@pytest.fixture
def metrics_collector():
    collector = MetricsCollector(namespace="rccm_test")
    previous = set_metrics_collector(collector)
    yield collector
    set_metrics_collector(previous)
