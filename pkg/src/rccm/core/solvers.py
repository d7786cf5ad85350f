"""Convex subproblem solvers: graphical lasso and covariance graphical lasso.

Both penalize off-diagonal entries only, ``||X||_1 = sum_{i != j} |x_ij|``.
"""

from typing import Optional

import numpy as np

from ..config.models import SolverOptions
from ..exceptions import InvalidInputError, SolverConvergenceError
from ..utils.logging import get_logger
from ..utils.metrics import get_metrics_collector
from .linalg import (
    as_symmetric,
    cholesky_or_none,
    inv_pd,
    logdet_pd,
    offdiag_l1,
    soft_threshold,
    symmetrize,
)

logger = get_logger(__name__)

_INNER_MAX_SWEEPS = 1000
_MIN_STEP = 1e-14


def glasso_objective(Omega: np.ndarray, S: np.ndarray, lam: float) -> float:
    """tr(S Omega) - log|Omega| + lam * ||Omega||_1 (off-diagonal)."""
    return float(np.sum(S * Omega)) - logdet_pd(Omega) + lam * offdiag_l1(Omega)


def glasso_kkt_residual(Omega: np.ndarray, S: np.ndarray, lam: float) -> float:
    """
    Largest violation of the graphical lasso stationarity conditions.

    With ``W = Omega^{-1}``: diagonal entries need ``S_ii = W_ii``, nonzero
    off-diagonals ``S_ij - W_ij + lam * sign(omega_ij) = 0`` and zero
    off-diagonals ``|S_ij - W_ij| <= lam``.
    """
    if cholesky_or_none(Omega) is None:
        return float("inf")
    G = S - inv_pd(Omega)
    return _subgradient_residual(G, Omega, lam)


def _subgradient_residual(G: np.ndarray, X: np.ndarray, lam: float) -> float:
    off = ~np.eye(X.shape[0], dtype=bool)
    nonzero = off & (X != 0.0)
    zero = off & (X == 0.0)
    violation = np.zeros_like(G)
    violation[nonzero] = np.abs(G[nonzero] + lam * np.sign(X[nonzero]))
    violation[zero] = np.maximum(np.abs(G[zero]) - lam, 0.0)
    diagonal = np.abs(np.diag(G))
    return float(max(violation.max(initial=0.0), diagonal.max(initial=0.0)))


def _lasso_coordinate_descent(W11: np.ndarray, s12: np.ndarray, beta: np.ndarray, lam: float, tol: float):
    """Solve min 0.5 b'W11 b - b's12 + lam ||b||_1 in place by cyclic coordinate descent."""
    m = beta.shape[0]
    diag = np.diag(W11)
    for _ in range(_INNER_MAX_SWEEPS):
        largest = 0.0
        for k in range(m):
            old = beta[k]
            partial = s12[k] - W11[k] @ beta + diag[k] * old
            new = soft_threshold(partial, lam) / diag[k]
            if new != old:
                beta[k] = new
                largest = max(largest, abs(new - old))
        if largest < tol:
            break
    return beta


def _precision_from_blocks(W: np.ndarray, B: np.ndarray) -> np.ndarray:
    p = W.shape[0]
    Omega = np.zeros_like(W)
    for j in range(p):
        idx = np.arange(p) != j
        beta = B[idx, j]
        omega_jj = 1.0 / (W[j, j] - W[idx, j] @ beta)
        Omega[j, j] = omega_jj
        Omega[idx, j] = -beta * omega_jj
    mask = (Omega != 0.0) & (Omega.T != 0.0)
    return np.where(mask, symmetrize(Omega), 0.0)


def glasso_fit(
    S,
    lam: float,
    opts: Optional[SolverOptions] = None,
    initial_iterate: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Graphical lasso by block coordinate descent over columns.

    Minimizes ``tr(S Omega) - log|Omega| + lam * sum_{i != j} |omega_ij|``.
    The diagonal of the covariance iterate is fixed at ``S_ii`` and each column
    is updated through an inner lasso solve.

    Args:
        S: Symmetric input matrix (sample covariance or blended matrix)
        lam: Nonnegative penalty
        opts: Iteration controls
        initial_iterate: Optional positive-definite warm start

    Returns:
        The estimated precision matrix

    Raises:
        InvalidInputError: If S is not symmetric, lam < 0, the diagonal of S is
            not positive, or lam == 0 and S is singular
        SolverConvergenceError: If the stationarity residual does not fall below
            the tolerance within the iteration cap
    """
    opts = opts or SolverOptions()
    S = as_symmetric(S, name="S")
    if lam < 0 or not np.isfinite(lam):
        raise InvalidInputError(f"GLasso penalty must be nonnegative, got {lam}")
    p = S.shape[0]
    if np.any(np.diag(S) <= 0):
        raise InvalidInputError("GLasso input needs a strictly positive diagonal")
    metrics = get_metrics_collector()

    if lam == 0.0 or p == 1:
        Omega = inv_pd(S, name="S (unpenalized GLasso input)")
        metrics.record_solver_call("glasso")
        return Omega

    W = S.copy()
    B = np.zeros((p, p))
    if initial_iterate is not None and cholesky_or_none(initial_iterate) is not None:
        warm = inv_pd(np.asarray(initial_iterate, dtype=float))
        np.fill_diagonal(warm, np.diag(S))
        if cholesky_or_none(warm) is not None:
            W = warm
            diag = np.diag(initial_iterate)
            B = -np.asarray(initial_iterate, dtype=float) / diag[np.newaxis, :]
            np.fill_diagonal(B, 0.0)

    inner_tol = min(1e-10, opts.tolerance * 1e-3)
    residual = float("inf")
    Omega = np.diag(1.0 / np.diag(S))
    for iteration in range(1, opts.max_iterations + 1):
        for j in range(p):
            idx = np.arange(p) != j
            W11 = W[np.ix_(idx, idx)]
            beta = _lasso_coordinate_descent(W11, S[idx, j], B[idx, j].copy(), lam, inner_tol)
            B[idx, j] = beta
            w12 = W11 @ beta
            W[idx, j] = w12
            W[j, idx] = w12
        Omega = _precision_from_blocks(W, B)
        residual = glasso_kkt_residual(Omega, S, lam)
        if residual < opts.tolerance:
            logger.debug(f"GLasso converged in {iteration} sweeps (residual {residual:.2e})")
            metrics.record_solver_call("glasso")
            return Omega

    metrics.record_solver_call("glasso", converged=False)
    raise SolverConvergenceError("glasso", Omega, residual, opts.max_iterations)


def covglasso_objective(X: np.ndarray, A: np.ndarray, rho: float) -> float:
    """tr(A X^{-1}) + log|X| + rho * ||X||_1 (off-diagonal); +inf outside the PD cone."""
    if cholesky_or_none(X) is None:
        return float("inf")
    return float(np.sum(A * inv_pd(X))) + logdet_pd(X) + rho * offdiag_l1(X)


def covglasso_stationarity(X: np.ndarray, A: np.ndarray, rho: float) -> float:
    """Largest subgradient violation of the covariance graphical lasso objective at X."""
    if cholesky_or_none(X) is None:
        return float("inf")
    X_inv = inv_pd(X)
    G = X_inv - X_inv @ A @ X_inv
    return _subgradient_residual(G, X, rho)


def _smooth_majorizer(X: np.ndarray, A: np.ndarray, anchor_inv: np.ndarray):
    """Value and gradient of tr(A X^{-1}) + tr(anchor^{-1} X), or None outside the PD cone."""
    if cholesky_or_none(X) is None:
        return None
    X_inv = inv_pd(X)
    value = float(np.sum(A * X_inv)) + float(np.sum(anchor_inv * X))
    gradient = symmetrize(anchor_inv - X_inv @ A @ X_inv)
    return value, gradient


def _prox_offdiag(Y: np.ndarray, threshold: float) -> np.ndarray:
    out = soft_threshold(Y, threshold)
    np.fill_diagonal(out, np.diag(Y))
    return out


def _minimize_majorizer(X0, A, rho, step, tol, max_steps):
    """Proximal gradient with backtracking on the convex majorizer anchored at X0."""
    anchor_inv = inv_pd(X0)
    X = X0
    value, gradient = _smooth_majorizer(X, A, anchor_inv)
    for _ in range(max_steps):
        while True:
            candidate = _prox_offdiag(X - step * gradient, step * rho)
            evaluated = _smooth_majorizer(candidate, A, anchor_inv)
            if evaluated is not None:
                diff = candidate - X
                bound = value + float(np.sum(gradient * diff)) + float(np.sum(diff * diff)) / (2.0 * step)
                if evaluated[0] <= bound + 1e-12 * max(1.0, abs(bound)):
                    break
            step *= 0.5
            if step < _MIN_STEP:
                return X, step
        change = float(np.max(np.abs(candidate - X)))
        X = candidate
        value, gradient = evaluated
        step *= 1.5
        if change <= tol * (1.0 + float(np.max(np.abs(X)))):
            break
    return X, step


def covglasso_fit(
    A,
    rho: float,
    opts: Optional[SolverOptions] = None,
    initial_iterate: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Covariance graphical lasso by majorize-minimize.

    Minimizes ``tr(A X^{-1}) + log|X| + rho * sum_{i != j} |x_ij|`` over
    positive-definite X. Each outer iteration linearizes ``log|X|`` at the
    current iterate and minimizes the convex majorizer by proximal gradient
    descent with backtracking, so the objective never increases.

    Args:
        A: Symmetric positive-definite input (weighted average of precisions)
        rho: Nonnegative penalty
        opts: Iteration controls
        initial_iterate: Optional warm start; falls back to A if not PD

    Returns:
        The estimated matrix

    Raises:
        InvalidInputError: If A is not symmetric positive definite or rho < 0
        SolverConvergenceError: If neither stopping rule is met within the cap
    """
    opts = opts or SolverOptions()
    A = as_symmetric(A, name="A")
    if rho < 0 or not np.isfinite(rho):
        raise InvalidInputError(f"Covariance lasso penalty must be nonnegative, got {rho}")
    if cholesky_or_none(A) is None:
        raise InvalidInputError("Covariance lasso input A must be positive definite")
    metrics = get_metrics_collector()

    X = A.copy()
    if initial_iterate is not None:
        warm = symmetrize(np.asarray(initial_iterate, dtype=float))
        if warm.shape == A.shape and cholesky_or_none(warm) is not None:
            X = warm
    current = covglasso_objective(X, A, rho)
    step = 1.0 / max(1.0, float(np.max(np.abs(inv_pd(X)))))
    residual = covglasso_stationarity(X, A, rho)

    for iteration in range(1, opts.max_iterations + 1):
        if residual < opts.tolerance:
            logger.debug(f"Covariance lasso converged in {iteration - 1} outer steps")
            metrics.record_solver_call("covglasso")
            return X
        candidate, step = _minimize_majorizer(X, A, rho, step, opts.tolerance, 200)
        proposed = covglasso_objective(candidate, A, rho)
        if not proposed <= current:
            residual = covglasso_stationarity(X, A, rho)
            break
        change = float(np.max(np.abs(candidate - X)))
        X, current = candidate, proposed
        residual = covglasso_stationarity(X, A, rho)
        if change <= opts.tolerance * (1.0 + float(np.max(np.abs(X)))):
            logger.debug(f"Covariance lasso iterate settled after {iteration} outer steps")
            metrics.record_solver_call("covglasso")
            return X

    if residual < opts.tolerance:
        metrics.record_solver_call("covglasso")
        return X
    metrics.record_solver_call("covglasso", converged=False)
    raise SolverConvergenceError("covglasso", X, residual, opts.max_iterations)
