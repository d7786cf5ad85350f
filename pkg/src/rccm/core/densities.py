"""Multivariate gamma and Wishart log-densities."""

import numpy as np
from scipy.special import multigammaln

from ..exceptions import DomainError, InvalidInputError
from .linalg import cholesky_or_none, inv_pd, logdet_pd


def log_multivariate_gamma(p: int, a: float) -> float:
    """
    Log of the multivariate gamma function.

    Args:
        p: Dimension (>= 1)
        a: Argument, must exceed (p - 1) / 2

    Returns:
        log Gamma_p(a)

    Raises:
        DomainError: If p < 1 or a <= (p - 1) / 2
    """
    if p < 1:
        raise DomainError(f"Dimension must be positive, got p = {p}")
    if not np.isfinite(a) or a <= (p - 1) / 2.0:
        raise DomainError(f"log Gamma_p(a) requires a > (p - 1)/2 = {(p - 1) / 2.0}, got a = {a}")
    return float(multigammaln(a, p))


def wishart_log_density(Omega, lambda2: float, Omega0) -> float:
    """
    Log-density at ``Omega`` of the Wishart law with ``lambda2`` degrees of freedom and mean ``Omega0``.

    The scale matrix is ``Omega0 / lambda2``. Everything is evaluated in log
    space; log-determinants come from Cholesky factors.

    Args:
        Omega: Positive-definite matrix at which to evaluate
        lambda2: Degrees of freedom, must exceed p - 1
        Omega0: Positive-definite mean matrix

    Returns:
        The log-density

    Raises:
        DomainError: On dimension mismatch, lambda2 <= p - 1 or non-PD arguments
    """
    Omega = np.atleast_2d(np.asarray(Omega, dtype=float))
    Omega0 = np.atleast_2d(np.asarray(Omega0, dtype=float))
    if Omega.shape != Omega0.shape or Omega.shape[0] != Omega.shape[1]:
        raise DomainError(f"Dimension mismatch: {Omega.shape} vs {Omega0.shape}")
    p = Omega.shape[0]
    if lambda2 <= p - 1:
        raise DomainError(f"Wishart degrees of freedom must exceed p - 1 = {p - 1}, got {lambda2}")
    if cholesky_or_none(Omega) is None or cholesky_or_none(Omega0) is None:
        raise DomainError("Wishart log-density needs positive-definite arguments")

    try:
        logdet_omega = logdet_pd(Omega)
        logdet_mean = logdet_pd(Omega0)
        trace_term = float(np.sum(inv_pd(Omega0) * Omega))
    except InvalidInputError as e:
        raise DomainError(str(e)) from e

    return (
        0.5 * (lambda2 - p - 1) * logdet_omega
        - 0.5 * lambda2 * trace_term
        - 0.5 * lambda2 * p * np.log(2.0)
        - 0.5 * lambda2 * (logdet_mean - p * np.log(lambda2))
        - log_multivariate_gamma(p, 0.5 * lambda2)
    )
