"""Configuration module for the RCCM toolkit."""

from .loader import load_config
from .models import (
    BenchmarkConfig,
    FitOptions,
    FitterType,
    GapConfig,
    InitMethod,
    Magnitude,
    Method,
    SelectionMode,
    SimulationConfig,
    SolverOptions,
    StarsConfig,
    TuningGrid,
    TuningParams,
)

__all__ = [
    "BenchmarkConfig",
    "FitOptions",
    "FitterType",
    "GapConfig",
    "InitMethod",
    "Magnitude",
    "Method",
    "SelectionMode",
    "SimulationConfig",
    "SolverOptions",
    "StarsConfig",
    "TuningGrid",
    "TuningParams",
    "load_config",
]
