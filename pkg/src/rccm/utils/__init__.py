"""Utilities for the RCCM toolkit."""

from .logging import bind_run_context, clear_run_context, get_logger, setup_logging
from .metrics import (
    MetricsCollector,
    NoOpMetricsCollector,
    get_metrics_collector,
    set_metrics_collector,
)
from .parallel import get_default_threads, parallel_map, set_default_threads
from .random import derive_seed, substream

__all__ = [
    "setup_logging",
    "get_logger",
    "bind_run_context",
    "clear_run_context",
    "MetricsCollector",
    "NoOpMetricsCollector",
    "get_metrics_collector",
    "set_metrics_collector",
    "parallel_map",
    "set_default_threads",
    "get_default_threads",
    "substream",
    "derive_seed",
]
