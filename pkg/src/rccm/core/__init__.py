"""Core RCCM components: solvers, densities, panels and the EM loop."""

from .densities import log_multivariate_gamma, wishart_log_density
from .em import (
    group_subobjective,
    initial_subject_estimates,
    initialize,
    penalized_objective,
    rccm_fit,
    subject_subobjective,
    update_group_precisions,
    update_pi,
    update_responsibilities,
    update_subject_precisions,
)
from .linalg import make_positive_definite
from .panel import ObservationMatrix, TimeSeriesPanel, build_panel
from .restarts import fit_with_restarts
from .solvers import (
    covglasso_fit,
    covglasso_objective,
    covglasso_stationarity,
    glasso_fit,
    glasso_kkt_residual,
    glasso_objective,
)
from .state import ModelState, hard_assignments

__all__ = [
    "ModelState",
    "ObservationMatrix",
    "TimeSeriesPanel",
    "build_panel",
    "covglasso_fit",
    "covglasso_objective",
    "covglasso_stationarity",
    "fit_with_restarts",
    "glasso_fit",
    "glasso_kkt_residual",
    "glasso_objective",
    "group_subobjective",
    "hard_assignments",
    "initial_subject_estimates",
    "initialize",
    "log_multivariate_gamma",
    "make_positive_definite",
    "penalized_objective",
    "rccm_fit",
    "subject_subobjective",
    "update_group_precisions",
    "update_pi",
    "update_responsibilities",
    "update_subject_precisions",
    "wishart_log_density",
]
