"""Symmetric and positive-definite matrix helpers."""

from typing import Iterable, Tuple

import numpy as np
from scipy import linalg

from ..exceptions import InvalidInputError

SYMMETRY_TOL = 1e-10
PD_FLOOR = 1e-3


def as_symmetric(M, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    """
    Validate a square, finite, symmetric matrix.

    Args:
        M: Candidate matrix
        name: Name used in error messages
        tol: Allowed absolute asymmetry

    Returns:
        The matrix as a float array, exactly symmetrized

    Raises:
        InvalidInputError: If the matrix is not square, finite and symmetric
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    asymmetry = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asymmetry > tol:
        raise InvalidInputError(f"{name} is not symmetric (max |M - M^T| = {asymmetry:.3e})")
    return symmetrize(M)


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def cholesky_or_none(M: np.ndarray):
    """Lower Cholesky factor of M, or None if M is not positive definite."""
    try:
        return linalg.cholesky(M, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return None


def is_positive_definite(M: np.ndarray) -> bool:
    return np.all(np.isfinite(M)) and cholesky_or_none(M) is not None


def logdet_pd(M: np.ndarray, name: str = "matrix") -> float:
    """Log-determinant from the Cholesky factor; never forms the determinant."""
    factor = cholesky_or_none(M)
    if factor is None:
        raise InvalidInputError(f"{name} is not positive definite")
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def inv_pd(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Inverse of a positive-definite matrix via its Cholesky factorization."""
    try:
        factor = linalg.cho_factor(M, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise InvalidInputError(f"{name} is not positive definite") from e
    return symmetrize(linalg.cho_solve(factor, np.eye(M.shape[0]), check_finite=False))


def min_eigenvalue(M: np.ndarray) -> float:
    return float(linalg.eigvalsh(M, subset_by_index=[0, 0])[0])


def make_positive_definite(M, floor: float = PD_FLOOR) -> np.ndarray:
    """
    Shift the spectrum of a symmetric matrix so that its smallest eigenvalue is at least ``floor``.

    Off-diagonal entries are untouched; a matrix already satisfying the floor
    is returned unchanged.

    Args:
        M: Symmetric matrix
        floor: Minimum eigenvalue of the result

    Returns:
        ``M`` or ``M + (floor - lambda_min) * I``
    """
    M = as_symmetric(M, name="matrix to repair", tol=1e-8)
    smallest = min_eigenvalue(M)
    if smallest >= floor:
        return M
    return M + (floor - smallest) * np.eye(M.shape[0])


def offdiag_l1(M: np.ndarray) -> float:
    """Sum of absolute off-diagonal entries."""
    return float(np.sum(np.abs(M)) - np.sum(np.abs(np.diag(M))))


def soft_threshold(x, threshold):
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def upper_pairs(p: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the strict upper triangle."""
    return np.triu_indices(p, k=1)


def pairs_to_adjacency(pairs: Iterable[Tuple[int, int]], p: int) -> np.ndarray:
    adjacency = np.zeros((p, p), dtype=bool)
    for i, j in pairs:
        adjacency[i, j] = adjacency[j, i] = True
    return adjacency
