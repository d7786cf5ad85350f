"""Metrics collection for fits and selection runs."""

import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile


class MetricsCollector:
    """Collects Prometheus metrics for solver calls, EM fits and selection runs.

    Each collector owns its registry so several collectors (for example in
    tests) never clash on metric names.
    """

    def __init__(self, namespace: str = "rccm"):
        """Initialize metrics collector."""
        self.namespace = namespace
        self.registry = CollectorRegistry()

        self.solver_calls = Counter(
            f"{namespace}_solver_calls_total",
            "Total number of convex subproblem solves",
            ["solver"],
            registry=self.registry,
        )
        self.solver_failures = Counter(
            f"{namespace}_solver_nonconvergence_total",
            "Solves that hit the iteration cap",
            ["solver"],
            registry=self.registry,
        )
        self.em_iterations = Counter(
            f"{namespace}_em_iterations_total",
            "Total number of EM iterations",
            registry=self.registry,
        )
        self.restarts = Counter(
            f"{namespace}_restarts_total",
            "Fits restarted after a cluster emptied",
            registry=self.registry,
        )
        self.fits = Counter(
            f"{namespace}_fits_total",
            "Completed RCCM fits by outcome",
            ["outcome"],
            registry=self.registry,
        )
        self.stage_duration = Histogram(
            f"{namespace}_stage_duration_seconds",
            "Duration of pipeline stages in seconds",
            ["stage"],
            registry=self.registry,
        )
        self.last_objective = Gauge(
            f"{namespace}_last_objective",
            "Penalized objective after the latest EM iteration",
            registry=self.registry,
        )

    def record_solver_call(self, solver: str, converged: bool = True) -> None:
        """Record one subproblem solve."""
        self.solver_calls.labels(solver=solver).inc()
        if not converged:
            self.solver_failures.labels(solver=solver).inc()

    def record_em_iteration(self, objective: float) -> None:
        """Record an EM iteration and its objective value."""
        self.em_iterations.inc()
        self.last_objective.set(objective)

    def record_fit(self, outcome: str) -> None:
        """Record a finished fit (converged, max_iterations or error)."""
        self.fits.labels(outcome=outcome).inc()

    def record_restart(self) -> None:
        self.restarts.inc()

    @contextmanager
    def measure_execution_time(self, stage: str):
        """Context manager to measure execution time."""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            self.stage_duration.labels(stage=stage).observe(time.perf_counter() - start_time)

    def get_metrics(self) -> Dict[str, Any]:
        """Get current counter totals as a dictionary."""
        totals: Dict[str, Any] = {}
        for metric in self.registry.collect():
            for sample in metric.samples:
                if sample.name.endswith("_total"):
                    totals[sample.name] = totals.get(sample.name, 0.0) + sample.value
        return totals

    def write(self, path: Union[str, Path]) -> None:
        """Write the registry in Prometheus text format."""
        write_to_textfile(str(path), self.registry)


class NoOpMetricsCollector(MetricsCollector):
    """No-op metrics collector for when metrics are disabled."""

    def __init__(self, namespace: str = "rccm"):
        self.namespace = namespace

    def record_solver_call(self, solver: str, converged: bool = True) -> None:
        pass

    def record_em_iteration(self, objective: float) -> None:
        pass

    def record_fit(self, outcome: str) -> None:
        pass

    def record_restart(self) -> None:
        pass

    @contextmanager
    def measure_execution_time(self, stage: str):
        yield

    def get_metrics(self) -> Dict[str, Any]:
        return {}

    def write(self, path: Union[str, Path]) -> None:
        pass


_active: MetricsCollector = NoOpMetricsCollector()


def get_metrics_collector() -> MetricsCollector:
    """Return the process-wide collector (a no-op unless one was installed)."""
    return _active


def set_metrics_collector(collector: MetricsCollector) -> MetricsCollector:
    """Install a process-wide collector and return the previous one."""
    global _active
    previous, _active = _active, collector
    return previous
