"""Penalized objective and the expectation/conditional-maximization loop of the RCCM."""

from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from ..clustering import frobenius_distance_matrix, ward_cluster
from ..config.models import FitOptions, InitMethod, SolverOptions, TuningParams
from ..exceptions import (
    EmptyClusterError,
    InvalidInputError,
    InvalidTuningError,
    NumericalError,
    SolverConvergenceError,
)
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from ..utils.parallel import parallel_map
from ..utils.random import substream
from .densities import wishart_log_density
from .linalg import cholesky_or_none, inv_pd, logdet_pd, offdiag_l1
from .panel import TimeSeriesPanel
from .solvers import covglasso_fit, covglasso_objective, glasso_fit, glasso_objective
from .state import ModelState

logger = get_logger(__name__)

EMPTY_CLUSTER_MASS = 1e-8

StageCallback = Callable[[str, ModelState], None]


def _absorb_nonconvergence(exc: SolverConvergenceError, fallback: Optional[np.ndarray], context: str) -> np.ndarray:
    get_metrics_collector().record_solver_call(f"{exc.solver}_absorbed", converged=False)
    if cholesky_or_none(exc.iterate) is not None:
        logger.warning(f"{context}: {exc}; using last iterate")
        return exc.iterate
    if fallback is not None and cholesky_or_none(fallback) is not None:
        logger.warning(f"{context}: {exc}; last iterate not PD, keeping warm start")
        return fallback
    raise NumericalError(f"{context}: solver failed without a positive-definite iterate") from exc


def penalized_objective(panel: TimeSeriesPanel, state: ModelState, tp: TuningParams) -> float:
    """
    Evaluate the penalized negative log-likelihood of the RCCM.

    ``sum_k [n_k tr(S_k Omega_k) - n_k log|Omega_k|]
    - 2 sum_k log sum_g pi_g p_g(Omega_k; lambda2, Omega_0g)
    + lambda1 sum_k ||Omega_k||_1 + lambda3 sum_g ||Omega_0g||_1``

    The mixture term is computed by log-sum-exp. If some subject has zero
    mixture density under every cluster the objective is +inf and a warning
    is logged.
    """
    data_term = 0.0
    mixture_term = 0.0
    with np.errstate(divide="ignore"):
        log_weights = np.log(state.weights)
    for k, (subject, Omega) in enumerate(zip(panel.subjects, state.subject_precisions)):
        data_term += subject.n * (float(np.sum(subject.sample_cov * Omega)) - logdet_pd(Omega))
        terms = [
            log_weights[g] + wishart_log_density(Omega, tp.lambda2, Omega0)
            for g, Omega0 in enumerate(state.group_precisions)
        ]
        value = float(logsumexp(terms))
        if not np.isfinite(value):
            logger.warning(f"Subject {k} has zero mixture density; objective is degenerate (+inf)")
            return float("inf")
        mixture_term += value
    penalty = tp.lambda1 * sum(offdiag_l1(m) for m in state.subject_precisions)
    penalty += tp.lambda3 * sum(offdiag_l1(m) for m in state.group_precisions)
    return data_term - 2.0 * mixture_term + penalty


def group_subobjective(
    Omega0: np.ndarray,
    resp_row: np.ndarray,
    subject_precisions: Sequence[np.ndarray],
    tp: TuningParams,
) -> float:
    """Terms of the objective that depend on one cluster-level matrix."""
    mass = float(np.sum(resp_row))
    A = _weighted_average(resp_row, subject_precisions, mass)
    return tp.lambda2 * mass * covglasso_objective(Omega0, A, tp.lambda3 / (tp.lambda2 * mass))


def subject_subobjective(
    Omega: np.ndarray,
    sample_cov: np.ndarray,
    n: int,
    resp_col: np.ndarray,
    group_precisions: Sequence[np.ndarray],
    tp: TuningParams,
) -> float:
    """Terms of the objective that depend on one subject-level matrix."""
    denom = n + tp.lambda2 - Omega.shape[0] - 1
    blended = _blended_matrix(sample_cov, n, resp_col, [inv_pd(m) for m in group_precisions], tp.lambda2, denom)
    return denom * glasso_objective(Omega, blended, tp.lambda1 / denom)


def _weighted_average(weights: np.ndarray, matrices: Sequence[np.ndarray], mass: float) -> np.ndarray:
    total = np.zeros_like(matrices[0])
    for w, M in zip(weights, matrices):
        total += w * M
    total /= mass
    return 0.5 * (total + total.T)


def _blended_matrix(sample_cov, n, resp_col, group_inverses, lambda2, denom) -> np.ndarray:
    pooled = np.zeros_like(sample_cov)
    for w, inverse in zip(resp_col, group_inverses):
        pooled += w * inverse
    blended = (n * sample_cov + lambda2 * pooled) / denom
    return 0.5 * (blended + blended.T)


def update_pi(resp: np.ndarray) -> np.ndarray:
    """Mixture weights as the average responsibility of each cluster."""
    return np.mean(np.asarray(resp, dtype=float), axis=1)


def update_group_precisions(
    resp: np.ndarray,
    subject_precisions: Sequence[np.ndarray],
    tp: TuningParams,
    opts: Optional[SolverOptions] = None,
    previous: Optional[Sequence[np.ndarray]] = None,
    threads: Optional[int] = None,
) -> List[np.ndarray]:
    """
    Update every cluster-level matrix by the covariance graphical lasso.

    Cluster g solves ``covglasso_fit(A_g, lambda3 / (lambda2 * m_g))`` with
    ``A_g = sum_k w_gk Omega_k / m_g`` and ``m_g = sum_k w_gk``, warm-started at
    the previous estimate.

    Raises:
        EmptyClusterError: If some cluster's responsibility mass is below 1e-8
    """
    opts = opts or SolverOptions()
    resp = np.asarray(resp, dtype=float)
    masses = resp.sum(axis=1)
    for g, mass in enumerate(masses):
        if mass < EMPTY_CLUSTER_MASS:
            raise EmptyClusterError(g, mass=float(mass))

    def solve(g: int) -> np.ndarray:
        A = _weighted_average(resp[g], subject_precisions, masses[g])
        rho = tp.lambda3 / (tp.lambda2 * masses[g])
        warm = previous[g] if previous is not None else None
        try:
            return covglasso_fit(A, rho, opts, initial_iterate=warm)
        except SolverConvergenceError as e:
            return _absorb_nonconvergence(e, warm, f"Cluster {g} update")

    return parallel_map(solve, range(resp.shape[0]), threads)


def update_responsibilities(
    subject_precisions: Sequence[np.ndarray],
    group_precisions: Sequence[np.ndarray],
    weights: np.ndarray,
    lambda2: float,
) -> np.ndarray:
    """
    Posterior cluster membership probabilities.

    ``w_gk`` is proportional to ``pi_g exp(-(lambda2/2) tr(Omega_0g^{-1} Omega_k)) |Omega_0g|^{-lambda2/2}``;
    the factors common to all clusters cancel and are skipped. Each column is
    normalized by log-sum-exp.

    Raises:
        InvalidTuningError: If lambda2 <= p - 1
        NumericalError: If a subject has zero probability under every cluster
    """
    p = subject_precisions[0].shape[0]
    if lambda2 <= p - 1:
        raise InvalidTuningError(f"lambda2 = {lambda2} must exceed p - 1 = {p - 1}")
    G, K = len(group_precisions), len(subject_precisions)
    with np.errstate(divide="ignore"):
        log_weights = np.log(np.asarray(weights, dtype=float))
    log_terms = np.empty((G, K))
    for g, Omega0 in enumerate(group_precisions):
        inverse = inv_pd(Omega0, name=f"cluster {g} precision")
        half_logdet = 0.5 * lambda2 * logdet_pd(Omega0)
        for k, Omega in enumerate(subject_precisions):
            log_terms[g, k] = log_weights[g] - 0.5 * lambda2 * float(np.sum(inverse * Omega)) - half_logdet

    normalizer = logsumexp(log_terms, axis=0)
    bad = np.flatnonzero(~np.isfinite(normalizer))
    if bad.size:
        raise NumericalError(f"Subject {int(bad[0])} has zero probability under every cluster")
    return np.clip(np.exp(log_terms - normalizer), 0.0, 1.0)


def update_subject_precisions(
    panel: TimeSeriesPanel,
    resp: np.ndarray,
    group_precisions: Sequence[np.ndarray],
    tp: TuningParams,
    opts: Optional[SolverOptions] = None,
    previous: Optional[Sequence[np.ndarray]] = None,
    threads: Optional[int] = None,
) -> List[np.ndarray]:
    """
    Update every subject-level matrix by the graphical lasso.

    Subject k solves ``glasso_fit(B_k, lambda1 / d_k)`` with
    ``B_k = (n_k S_k + lambda2 sum_g w_gk Omega_0g^{-1}) / d_k`` and
    ``d_k = n_k + lambda2 - p - 1``, warm-started at the previous estimate.

    Raises:
        InvalidTuningError: If d_k <= 0, naming the subject
    """
    opts = opts or SolverOptions()
    resp = np.asarray(resp, dtype=float)
    p = panel.p
    denominators = []
    for k, subject in enumerate(panel.subjects):
        denom = subject.n + tp.lambda2 - p - 1
        if denom <= 0:
            raise InvalidTuningError(
                f"Subject {k}: n_k + lambda2 - p - 1 = {denom} must be positive", subject=k
            )
        denominators.append(denom)
    group_inverses = [inv_pd(m, name=f"cluster {g} precision") for g, m in enumerate(group_precisions)]

    def solve(k: int) -> np.ndarray:
        subject = panel.subjects[k]
        blended = _blended_matrix(
            subject.sample_cov, subject.n, resp[:, k], group_inverses, tp.lambda2, denominators[k]
        )
        warm = previous[k] if previous is not None else None
        try:
            return glasso_fit(blended, tp.lambda1 / denominators[k], opts, initial_iterate=warm)
        except SolverConvergenceError as e:
            return _absorb_nonconvergence(e, warm, f"Subject {k} update")

    return parallel_map(solve, range(panel.K), threads)


def _initial_labels(estimates: Sequence[np.ndarray], G: int, opts: FitOptions) -> np.ndarray:
    K = len(estimates)
    if opts.init_method == InitMethod.RANDOM:
        rng = substream(opts.seed, "init")
        return rng.permutation(np.arange(K) % G)
    return ward_cluster(frobenius_distance_matrix(estimates), G)


def initial_subject_estimates(
    panel: TimeSeriesPanel,
    lam: float,
    opts: Optional[SolverOptions] = None,
    threads: Optional[int] = None,
) -> List[np.ndarray]:
    """Per-subject graphical lasso estimates from the sample covariances."""
    opts = opts or SolverOptions()

    def solve(k: int) -> np.ndarray:
        try:
            return glasso_fit(panel.subjects[k].sample_cov, lam, opts)
        except SolverConvergenceError as e:
            return _absorb_nonconvergence(e, None, f"Subject {k} initial estimate")

    return parallel_map(solve, range(panel.K), threads)


def initialize(
    panel: TimeSeriesPanel,
    tp: TuningParams,
    opts: Optional[FitOptions] = None,
    threads: Optional[int] = None,
) -> ModelState:
    """
    Initial RCCM state.

    Subject matrices start at lightly penalized graphical lasso estimates; a
    hard assignment (Ward clustering on Frobenius distances, or a random
    balanced split) fixes the responsibilities, from which one weight update
    and one cluster-level update follow.

    Raises:
        InvalidInputError: If G > K
    """
    opts = opts or FitOptions()
    if tp.G > panel.K:
        raise InvalidInputError(f"Cannot form G = {tp.G} clusters from K = {panel.K} subjects")
    subject_precisions = initial_subject_estimates(panel, opts.init_glasso_lambda, opts.solver, threads)
    labels = _initial_labels(subject_precisions, tp.G, opts)
    resp = np.zeros((tp.G, panel.K))
    resp[labels, np.arange(panel.K)] = 1.0
    weights = update_pi(resp)
    group_precisions = update_group_precisions(resp, subject_precisions, tp, opts.solver, threads=threads)
    state = ModelState(
        subject_precisions=subject_precisions,
        group_precisions=group_precisions,
        weights=weights,
        responsibilities=resp,
    )
    state.objective_trace.append(penalized_objective(panel, state, tp))
    logger.debug(f"Initialized with {opts.init_method.value} labels {labels.tolist()}")
    return state


def _max_change(before: Sequence[np.ndarray], after: Sequence[np.ndarray]) -> float:
    return max(float(np.max(np.abs(a - b))) for a, b in zip(before, after))


def rccm_fit(
    panel: TimeSeriesPanel,
    tp: TuningParams,
    opts: Optional[FitOptions] = None,
    initial_state: Optional[ModelState] = None,
    callback: Optional[StageCallback] = None,
    threads: Optional[int] = None,
) -> ModelState:
    """
    Fit the RCCM by alternating conditional updates until the estimates settle.

    Each iteration updates the weights, the cluster-level matrices, the
    responsibilities, the subject-level matrices (using the fresh
    responsibilities) and the responsibilities again. The loop stops when the
    largest absolute entry change across all matrices falls below epsilon.

    Args:
        panel: Data panel
        tp: Tuning parameters
        opts: EM controls
        initial_state: Optional starting state instead of ``initialize``
        callback: Optional ``callback(stage, state)`` called with a copy of the
            state after initialization and after every conditional update
        threads: Worker count for per-subject and per-cluster updates

    Returns:
        Final state; ``converged`` is False if the iteration cap was hit

    Raises:
        InvalidTuningError: If lambda2 or n_k + lambda2 - p - 1 violate the model constraints
        InvalidInputError: If G > K
        EmptyClusterError: If a cluster empties, carrying the iteration index
    """
    opts = opts or FitOptions()
    metrics = get_metrics_collector()
    tp.check_panel(panel.p, panel.sample_sizes)
    if tp.G > panel.K:
        raise InvalidInputError(f"Cannot form G = {tp.G} clusters from K = {panel.K} subjects")

    def notify(stage: str) -> None:
        if callback is not None:
            callback(stage, state.copy())

    logger.info(
        f"Fitting RCCM: K={panel.K}, p={panel.p}, G={tp.G}, "
        f"lambda=({tp.lambda1}, {tp.lambda2}, {tp.lambda3})"
    )
    with metrics.measure_execution_time("rccm_fit"):
        if initial_state is not None:
            if initial_state.G != tp.G or initial_state.K != panel.K:
                raise InvalidInputError("Initial state does not match the panel and number of clusters")
            state = initial_state.copy()
            state.iteration, state.converged, state.max_entry_change = 0, False, float("inf")
            state.objective_trace = [penalized_objective(panel, state, tp)]
        else:
            state = initialize(panel, tp, opts, threads)
        notify("initialize")

        for iteration in range(1, opts.max_em_iterations + 1):
            old_subjects = state.subject_precisions
            old_groups = state.group_precisions

            state.weights = update_pi(state.responsibilities)
            notify("weights")
            try:
                state.group_precisions = update_group_precisions(
                    state.responsibilities, old_subjects, tp, opts.solver, old_groups, threads
                )
            except EmptyClusterError as e:
                metrics.record_fit("empty_cluster")
                raise EmptyClusterError(e.cluster, iteration=iteration, mass=e.mass) from e
            notify("group_precisions")

            state.responsibilities = update_responsibilities(
                old_subjects, state.group_precisions, state.weights, tp.lambda2
            )
            notify("responsibilities_before_subjects")

            state.subject_precisions = update_subject_precisions(
                panel, state.responsibilities, state.group_precisions, tp, opts.solver, old_subjects, threads
            )
            notify("subject_precisions")

            state.responsibilities = update_responsibilities(
                state.subject_precisions, state.group_precisions, state.weights, tp.lambda2
            )
            state.iteration = iteration
            state.max_entry_change = max(
                _max_change(old_subjects, state.subject_precisions),
                _max_change(old_groups, state.group_precisions),
            )
            objective = penalized_objective(panel, state, tp)
            state.objective_trace.append(objective)
            metrics.record_em_iteration(objective)
            logger.debug(
                f"EM iteration {iteration}: max entry change {state.max_entry_change:.3e}, "
                f"objective {objective:.6g}"
            )
            notify("responsibilities")

            if state.max_entry_change < opts.epsilon:
                state.converged = True
                break

    if state.converged:
        logger.info(f"RCCM converged after {state.iteration} iterations")
        metrics.record_fit("converged")
    else:
        logger.warning(
            f"RCCM reached {opts.max_em_iterations} iterations without converging "
            f"(max entry change {state.max_entry_change:.3e})"
        )
        metrics.record_fit("max_iterations")
    return state
