"""Graphical lasso and covariance graphical lasso solvers."""

import numpy as np
import pytest
from sklearn.covariance import graphical_lasso

from rccm.config import SolverOptions
from rccm.core.linalg import is_positive_definite
from rccm.core.solvers import (
    covglasso_fit,
    covglasso_objective,
    covglasso_stationarity,
    glasso_fit,
    glasso_kkt_residual,
    glasso_objective,
)
from rccm.exceptions import InvalidInputError, SolverConvergenceError


def _sample_cov(rng, n=80, p=10):
    Y = rng.normal(size=(n, p))
    Y[:, 1] += 0.6 * Y[:, 0]
    Y[:, 3] -= 0.5 * Y[:, 2]
    Y = Y - Y.mean(axis=0)
    return Y.T @ Y / n


def test_glasso_identity_without_penalty():
    assert np.allclose(glasso_fit(np.eye(2), 0.0), np.eye(2))


def test_glasso_two_by_two_soft_thresholds_the_covariance():
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    Omega = glasso_fit(S, 0.25)
    expected = np.array([[1.0, -0.25], [-0.25, 1.0]]) / 0.9375
    assert np.allclose(Omega, expected, atol=1e-6)


def test_glasso_full_shrinkage_gives_diagonal():
    S = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert np.allclose(glasso_fit(S, 0.5), np.eye(2), atol=1e-8)


def test_glasso_unpenalized_is_inverse(rng):
    S = _sample_cov(rng, p=5)
    assert np.allclose(glasso_fit(S, 0.0), np.linalg.inv(S), atol=1e-8)


def test_glasso_meets_stationarity_conditions(rng):
    S = _sample_cov(rng)
    Omega = glasso_fit(S, 0.1)
    assert is_positive_definite(Omega)
    assert np.allclose(Omega, Omega.T)
    assert glasso_kkt_residual(Omega, S, 0.1) < 1e-6


def test_glasso_objective_not_worse_than_sklearn(rng):
    S = _sample_cov(rng)
    _, reference = graphical_lasso(S, alpha=0.1)
    ours = glasso_fit(S, 0.1)
    assert glasso_objective(ours, S, 0.1) <= glasso_objective(reference, S, 0.1) + 1e-5


def test_glasso_warm_start_reaches_same_solution(rng):
    S = _sample_cov(rng)
    cold = glasso_fit(S, 0.1)
    warm = glasso_fit(S, 0.1, initial_iterate=glasso_fit(S, 0.2))
    assert np.allclose(cold, warm, atol=1e-5)


def test_glasso_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        glasso_fit(np.array([[1.0, 0.2], [0.3, 1.0]]), 0.1)
    with pytest.raises(InvalidInputError):
        glasso_fit(np.eye(2), -0.1)
    with pytest.raises(InvalidInputError):
        glasso_fit(np.array([[1.0, 1.0], [1.0, 1.0]]), 0.0)


def test_glasso_iteration_cap_carries_last_iterate(rng):
    S = _sample_cov(rng)
    with pytest.raises(SolverConvergenceError) as excinfo:
        glasso_fit(S, 0.05, SolverOptions(max_iterations=1, tolerance=1e-15))
    assert excinfo.value.solver == "glasso"
    assert excinfo.value.iterate.shape == (10, 10)
    assert excinfo.value.residual >= 1e-15


def test_covglasso_unpenalized_returns_input():
    A = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 1.0]])
    assert np.allclose(covglasso_fit(A, 0.0), A)


def test_covglasso_diagonal_input_is_fixed_point():
    A = np.diag([2.0, 3.0])
    assert np.allclose(covglasso_fit(A, 0.1), A)


def test_covglasso_shrinks_and_descends():
    A = np.array([[1.0, 0.4], [0.4, 1.0]])
    X = covglasso_fit(A, 0.05)
    assert abs(X[0, 1]) < 0.4
    assert covglasso_objective(X, A, 0.05) < covglasso_objective(A, A, 0.05)


def test_covglasso_agrees_with_grid_search():
    A = np.array([[1.0, 0.4], [0.4, 1.0]])
    X = covglasso_fit(A, 0.05)
    best, best_value = None, np.inf
    for a in np.linspace(0.8, 1.2, 41):
        for c in np.linspace(0.8, 1.2, 41):
            for b in np.linspace(0.0, 0.5, 51):
                candidate = np.array([[a, b], [b, c]])
                value = covglasso_objective(candidate, A, 0.05)
                if value < best_value:
                    best, best_value = candidate, value
    assert np.allclose(X, best, atol=1e-2)
    assert covglasso_objective(X, A, 0.05) <= best_value + 1e-9


def _covglasso_grid_minimum(A, rho, points=61):
    """Smallest 2 x 2 objective on a grid around A, evaluated in closed form."""
    a = np.linspace(0.5 * A[0, 0], 1.5 * A[0, 0], points)
    c = np.linspace(0.5 * A[1, 1], 1.5 * A[1, 1], points)
    reach = abs(A[0, 1]) + 0.1
    b = np.linspace(-reach, reach, 2 * points + 1)
    a, c, b = np.meshgrid(a, c, b, indexing="ij")
    det = a * c - b**2
    with np.errstate(divide="ignore", invalid="ignore"):
        trace = (A[0, 0] * c - 2 * A[0, 1] * b + A[1, 1] * a) / det
        values = np.where(det > 0, trace + np.log(det) + 2 * rho * np.abs(b), np.inf)
    return float(values.min())


def test_glasso_matches_closed_form_on_random_two_by_two():
    rng = np.random.default_rng(101)
    tight = SolverOptions(max_iterations=5000, tolerance=1e-10)
    for _ in range(100):
        B = rng.normal(size=(2, 2))
        S = B @ B.T / 2 + 0.5 * np.eye(2)
        lam = rng.uniform(0.0, 1.0)
        off = np.sign(S[0, 1]) * max(abs(S[0, 1]) - lam, 0.0)
        expected = np.linalg.inv(np.array([[S[0, 0], off], [off, S[1, 1]]]))
        assert np.allclose(glasso_fit(S, lam, tight), expected, atol=1e-6)


def test_glasso_stationarity_on_random_instances():
    rng = np.random.default_rng(202)
    for _ in range(50):
        S = _sample_cov(rng)
        lam = rng.uniform(0.05, 0.4)
        Omega = glasso_fit(S, lam)
        assert np.allclose(Omega, Omega.T)
        assert is_positive_definite(Omega)
        assert glasso_kkt_residual(Omega, S, lam) <= 1e-5


def test_covglasso_random_two_by_two_against_grid():
    rng = np.random.default_rng(303)
    for _ in range(100):
        B = rng.normal(size=(2, 2))
        A = B @ B.T + 0.3 * np.eye(2)
        rho = rng.uniform(0.0, 0.5)
        X = covglasso_fit(A, rho)
        value = covglasso_objective(X, A, rho)
        assert value <= covglasso_objective(A, A, rho) + 1e-10
        assert value <= _covglasso_grid_minimum(A, rho) + 1e-3


def test_covglasso_random_instance_is_near_stationary(rng):
    B = rng.normal(size=(5, 5))
    A = B @ B.T / 5 + np.eye(5)
    X = covglasso_fit(A, 0.1)
    assert is_positive_definite(X)
    assert covglasso_objective(X, A, 0.1) <= covglasso_objective(A, A, 0.1)
    assert covglasso_stationarity(X, A, 0.1) < 1e-3


def test_covglasso_requires_positive_definite_input():
    with pytest.raises(InvalidInputError):
        covglasso_fit(np.diag([1.0, -1.0]), 0.1)


def test_solver_calls_are_counted(metrics_collector):
    glasso_fit(np.eye(3), 0.0)
    covglasso_fit(np.eye(3), 0.0)
    totals = metrics_collector.get_metrics()
    assert totals["rccm_test_solver_calls_total"] == 2
