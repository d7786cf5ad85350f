"""Multivariate gamma and Wishart log-densities."""

import numpy as np
import pytest
from scipy import stats
from scipy.special import gammaln

from rccm.core.densities import log_multivariate_gamma, wishart_log_density
from rccm.exceptions import DomainError


@pytest.mark.parametrize(
    "p, a, expected",
    [
        (1, 1.0, 0.0),
        (1, 0.5, 0.5 * np.log(np.pi)),
        (2, 2.0, 0.5 * np.log(np.pi) + gammaln(2.0) + gammaln(1.5)),
    ],
)
def test_log_multivariate_gamma_values(p, a, expected):
    assert log_multivariate_gamma(p, a) == pytest.approx(expected, abs=1e-12)


def test_log_multivariate_gamma_domain():
    with pytest.raises(DomainError):
        log_multivariate_gamma(3, 1.0)
    with pytest.raises(DomainError):
        log_multivariate_gamma(0, 2.0)


def test_wishart_chi_square_case():
    value = wishart_log_density(np.eye(1), 1.0, np.eye(1))
    assert value == pytest.approx(-0.5 - 0.5 * np.log(2 * np.pi), abs=1e-12)
    assert value == pytest.approx(stats.chi2(df=1).logpdf(1.0), abs=1e-12)


def test_wishart_gamma_case():
    value = wishart_log_density(np.array([[2.0]]), 2.0, np.array([[2.0]]))
    assert value == pytest.approx(np.log(0.5 * np.exp(-1.0)), abs=1e-12)


def test_wishart_matches_scipy(rng):
    p, lambda2 = 4, 9.0
    B = rng.normal(size=(p, p))
    Omega0 = B @ B.T / p + np.eye(p)
    C = rng.normal(size=(p, p))
    Omega = C @ C.T / p + 0.5 * np.eye(p)
    expected = stats.wishart(df=lambda2, scale=Omega0 / lambda2).logpdf(Omega)
    assert wishart_log_density(Omega, lambda2, Omega0) == pytest.approx(expected, rel=1e-10)


def test_wishart_domain_errors():
    with pytest.raises(DomainError):
        wishart_log_density(np.eye(3), 2.0, np.eye(3))
    with pytest.raises(DomainError):
        wishart_log_density(np.eye(2), 5.0, np.eye(3))
    with pytest.raises(DomainError):
        wishart_log_density(np.diag([1.0, -1.0]), 5.0, np.eye(2))


def test_log_multivariate_gamma_recursion():
    rng = np.random.default_rng(7)
    for p in range(2, 5):
        for a in (p - 1) / 2 + rng.uniform(0.1, 5.0, size=10):
            expected = 0.5 * (p - 1) * np.log(np.pi) + gammaln(a) + log_multivariate_gamma(p - 1, a - 0.5)
            assert log_multivariate_gamma(p, a) == pytest.approx(expected, abs=1e-10)


def test_wishart_random_instances_match_scipy_and_ignore_variable_order():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = int(rng.integers(1, 5))
        lambda2 = p - 1 + rng.uniform(0.5, 20.0)
        B = rng.normal(size=(p, p))
        Omega0 = B @ B.T / p + 0.5 * np.eye(p)
        C = rng.normal(size=(p, p))
        Omega = C @ C.T / p + 0.5 * np.eye(p)
        value = wishart_log_density(Omega, lambda2, Omega0)
        expected = stats.wishart(df=lambda2, scale=Omega0 / lambda2).logpdf(Omega)
        assert value == pytest.approx(expected, rel=1e-8, abs=1e-8)

        order = rng.permutation(p)
        permuted = wishart_log_density(Omega[np.ix_(order, order)], lambda2, Omega0[np.ix_(order, order)])
        assert permuted == pytest.approx(value, rel=1e-10, abs=1e-10)
