"""Estimators that stability selection can wrap, fitted along an ordered grid."""

from typing import List, Optional, Sequence

import numpy as np

from ..config.models import FitOptions, FitterType, SolverOptions, TuningParams
from ..core.em import rccm_fit
from ..core.panel import TimeSeriesPanel
from ..core.restarts import fit_with_restarts
from ..core.solvers import glasso_fit
from ..core.state import ModelState
from ..exceptions import EmptyClusterError, RCCMError
from ..utils.logging import get_logger

logger = get_logger(__name__)


class PathResult:
    """Subject-level estimates for one grid candidate, or the error that prevented them."""

    def __init__(self, precisions: Optional[List[np.ndarray]] = None, error: Optional[Exception] = None):
        self.precisions = precisions
        self.error = error

    @property
    def ok(self) -> bool:
        return self.precisions is not None


class PathEstimator:
    """Base class for estimators fitted over a sequence of tuning candidates."""

    def fit_path(self, panel: TimeSeriesPanel, candidates: Sequence[TuningParams]) -> List[PathResult]:
        """Fit every candidate in order, warm-starting each from its predecessor."""
        raise NotImplementedError


class GlassoPerSubjectEstimator(PathEstimator):
    """Independent graphical lasso per subject; only ``lambda1`` of each candidate is used."""

    def __init__(self, solver: Optional[SolverOptions] = None):
        self.solver = solver or SolverOptions()

    def fit_path(self, panel: TimeSeriesPanel, candidates: Sequence[TuningParams]) -> List[PathResult]:
        results: List[PathResult] = []
        previous: List[Optional[np.ndarray]] = [None] * panel.K
        for candidate in candidates:
            try:
                estimates = [
                    glasso_fit(subject.sample_cov, candidate.lambda1, self.solver, initial_iterate=previous[k])
                    for k, subject in enumerate(panel.subjects)
                ]
            except RCCMError as e:
                logger.debug(f"GLasso failed at lambda1={candidate.lambda1}: {e}")
                results.append(PathResult(error=e))
                continue
            previous = list(estimates)
            results.append(PathResult(precisions=estimates))
        return results


class RCCMEstimator(PathEstimator):
    """The RCCM; each candidate starts from the previous candidate's final state."""

    def __init__(self, fit_options: Optional[FitOptions] = None):
        self.fit_options = fit_options or FitOptions()

    def fit_path(self, panel: TimeSeriesPanel, candidates: Sequence[TuningParams]) -> List[PathResult]:
        results: List[PathResult] = []
        previous: Optional[ModelState] = None
        for candidate in candidates:
            try:
                state = self._fit(panel, candidate, previous)
            except RCCMError as e:
                logger.debug(f"RCCM failed at {candidate}: {e}")
                results.append(PathResult(error=e))
                continue
            previous = state
            results.append(PathResult(precisions=state.subject_precisions))
        return results

    def _fit(self, panel: TimeSeriesPanel, candidate: TuningParams, previous: Optional[ModelState]) -> ModelState:
        if previous is not None:
            try:
                return rccm_fit(panel, candidate, self.fit_options, initial_state=previous)
            except EmptyClusterError:
                logger.debug("Warm-started fit lost a cluster; refitting from scratch")
        return fit_with_restarts(panel, candidate, self.fit_options)


class EstimatorFactory:
    """Factory for creating path estimators."""

    @staticmethod
    def create_estimator(
        fitter: FitterType,
        fit_options: Optional[FitOptions] = None,
    ) -> PathEstimator:
        """
        Create an estimator for a fitter tag.

        Args:
            fitter: Which estimator to wrap
            fit_options: EM controls (their solver options also drive the GLasso fitter)

        Returns:
            A configured estimator
        """
        fit_options = fit_options or FitOptions()
        if fitter == FitterType.RCCM:
            return RCCMEstimator(fit_options)
        elif fitter == FitterType.GLASSO:
            return GlassoPerSubjectEstimator(fit_options.solver)
        else:
            raise ValueError(f"Unsupported fitter: {fitter}")
