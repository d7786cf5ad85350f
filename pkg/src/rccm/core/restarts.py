"""Restart policy for fits that lose a cluster."""

from typing import Optional

from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_none

from ..config.models import FitOptions, InitMethod, TuningParams
from ..exceptions import EmptyClusterError
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from ..utils.random import derive_seed
from .em import StageCallback, rccm_fit
from .panel import TimeSeriesPanel
from .state import ModelState

logger = get_logger(__name__)

MAX_RESTARTS = 3


def restart_options(opts: FitOptions, attempt: int) -> FitOptions:
    """Options for a given attempt: the first uses ``opts``, later ones a derived seed and a random start."""
    if attempt <= 1:
        return opts
    return opts.model_copy(
        update={"seed": derive_seed(opts.seed, "restart", attempt - 1), "init_method": InitMethod.RANDOM}
    )


def fit_with_restarts(
    panel: TimeSeriesPanel,
    tp: TuningParams,
    opts: Optional[FitOptions] = None,
    max_restarts: int = MAX_RESTARTS,
    callback: Optional[StageCallback] = None,
    threads: Optional[int] = None,
) -> ModelState:
    """
    Fit the RCCM, restarting from a random balanced assignment when a cluster empties.

    Args:
        panel: Data panel
        tp: Tuning parameters
        opts: EM controls for the first attempt
        max_restarts: Additional attempts after the first
        callback: Forwarded to ``rccm_fit``
        threads: Forwarded to ``rccm_fit``

    Returns:
        The first successful fit

    Raises:
        EmptyClusterError: If every attempt loses a cluster
    """
    opts = opts or FitOptions()
    attempts = {"count": 0}

    def log_restart(retry_state) -> None:
        error = retry_state.outcome.exception()
        logger.warning(f"Attempt {retry_state.attempt_number} failed ({error}); restarting from a random assignment")
        get_metrics_collector().record_restart()

    @retry(
        stop=stop_after_attempt(max_restarts + 1),
        wait=wait_none(),
        retry=retry_if_exception_type(EmptyClusterError),
        before_sleep=log_restart,
        reraise=True,
    )
    def attempt() -> ModelState:
        attempts["count"] += 1
        return rccm_fit(panel, tp, restart_options(opts, attempts["count"]), callback=callback, threads=threads)

    return attempt()
