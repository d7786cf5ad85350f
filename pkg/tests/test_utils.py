"""Random streams, parallel map, metrics and logging setup."""

import json
import logging

import numpy as np
import pytest

from rccm.utils import (
    MetricsCollector,
    NoOpMetricsCollector,
    bind_run_context,
    clear_run_context,
    derive_seed,
    get_logger,
    get_metrics_collector,
    parallel_map,
    set_metrics_collector,
    setup_logging,
    substream,
)


def test_substreams_are_deterministic_and_distinct():
    a = substream(1, "subsample", 0, 2).random(5)
    b = substream(1, "subsample", 0, 2).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, substream(1, "subsample", 0, 3).random(5))
    assert not np.array_equal(a, substream(1, "reference", 0, 2).random(5))
    assert not np.array_equal(a, substream(2, "subsample", 0, 2).random(5))


def test_derive_seed_is_a_32_bit_integer():
    seed = derive_seed(5, "replicate", 1, 2)
    assert seed == derive_seed(5, "replicate", 1, 2)
    assert 0 <= seed < 2**32


@pytest.mark.parametrize("threads", [1, 3, 8])
def test_parallel_map_preserves_order(threads):
    assert parallel_map(lambda x: x * x, range(10), threads) == [x * x for x in range(10)]


def test_parallel_map_propagates_errors():
    def fail_on_three(x):
        if x == 3:
            raise ValueError("three")
        return x

    with pytest.raises(ValueError):
        parallel_map(fail_on_three, range(5), threads=2)


def test_metrics_collector_totals(metrics_collector, tmp_path):
    metrics_collector.record_solver_call("glasso")
    metrics_collector.record_solver_call("glasso", converged=False)
    metrics_collector.record_em_iteration(3.5)
    metrics_collector.record_fit("converged")
    totals = metrics_collector.get_metrics()
    assert totals["rccm_test_solver_calls_total"] == 2
    assert totals["rccm_test_solver_nonconvergence_total"] == 1
    assert totals["rccm_test_em_iterations_total"] == 1
    path = tmp_path / "metrics.prom"
    metrics_collector.write(path)
    assert 'rccm_test_fits_total{outcome="converged"} 1.0' in path.read_text()


def test_collector_swap_restores_previous():
    installed = MetricsCollector(namespace="swap")
    previous = set_metrics_collector(installed)
    try:
        assert get_metrics_collector() is installed
    finally:
        set_metrics_collector(previous)
    assert get_metrics_collector() is previous


def test_noop_collector_records_nothing():
    collector = NoOpMetricsCollector()
    collector.record_solver_call("covglasso")
    with collector.measure_execution_time("fit"):
        pass
    assert collector.get_metrics() == {}


def test_json_logging_to_file(tmp_path):
    log_file = tmp_path / "rccm.log"
    setup_logging(level="INFO", format="json", log_file=str(log_file))
    try:
        bind_run_context(command="fit", seed=3, threads=None)
        get_logger("rccm.test").info("fit finished")
        for handler in logging.getLogger().handlers:
            handler.flush()
        record = json.loads(log_file.read_text().strip().splitlines()[-1])
        assert record["event"] == "fit finished"
        assert record["level"] == "info"
        assert record["command"] == "fit"
        assert record["seed"] == 3
        assert "threads" not in record
    finally:
        clear_run_context()
        setup_logging()
