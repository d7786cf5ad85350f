"""Random covariance clustering of multi-subject time-series panels."""

__version__ = "0.1.0"

from .config import (  # noqa: E402
    BenchmarkConfig,
    FitOptions,
    FitterType,
    GapConfig,
    SimulationConfig,
    SolverOptions,
    StarsConfig,
    TuningGrid,
    TuningParams,
)
from .core import (  # noqa: E402
    ModelState,
    TimeSeriesPanel,
    build_panel,
    covglasso_fit,
    fit_with_restarts,
    glasso_fit,
    hard_assignments,
    log_multivariate_gamma,
    penalized_objective,
    rccm_fit,
    wishart_log_density,
)
from .exceptions import RCCMError  # noqa: E402
from .selection import gap_select, stars_select  # noqa: E402

__all__ = [
    "__version__",
    "BenchmarkConfig",
    "FitOptions",
    "FitterType",
    "GapConfig",
    "ModelState",
    "RCCMError",
    "SimulationConfig",
    "SolverOptions",
    "StarsConfig",
    "TimeSeriesPanel",
    "TuningGrid",
    "TuningParams",
    "build_panel",
    "covglasso_fit",
    "fit_with_restarts",
    "gap_select",
    "glasso_fit",
    "hard_assignments",
    "log_multivariate_gamma",
    "penalized_objective",
    "rccm_fit",
    "stars_select",
    "wishart_log_density",
]
