"""Fitting distributions to raw samples: Gaussian MLE and Gaussian KDE."""
from __future__ import annotations

import logging
from numbers import Real

import numpy as np
from sklearn.base import BaseEstimator

from .distributions import GaussianMixture, MultivariateNormal
from .exceptions import DomainError
from .numerics import make_rng
from .utils.validation import check_fitted, check_samples

logger = logging.getLogger(__name__)

__all__ = ["GaussianKDE", "bandwidth_factor", "fit_gaussian", "fit_kde"]

BANDWIDTH_RULES = ("scott", "silverman")


def bandwidth_factor(rule, k: int, n: int) -> float:
    """Scale factor ``f`` of the kernel covariance ``f**2 * S``.

    ``rule`` is ``"scott"`` (``k**(-1/(n+4))``), ``"silverman"``
    (``(k*(n+2)/4)**(-1/(n+4))``) or a positive number used as-is.
    """
    if isinstance(rule, str):
        rule = rule.lower()
        if rule == "scott":
            return float(k ** (-1.0 / (n + 4)))
        if rule == "silverman":
            return float((k * (n + 2) / 4.0) ** (-1.0 / (n + 4)))
        raise DomainError(f"unknown bandwidth rule {rule!r}; expected one of {BANDWIDTH_RULES} or a number")
    if isinstance(rule, Real) and not isinstance(rule, bool) and rule > 0:
        return float(rule)
    raise DomainError(f"fixed bandwidth must be a positive number, got {rule!r}")


def _sample_cov(data: np.ndarray) -> np.ndarray:
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / (data.shape[0] - 1)
    return 0.5 * (cov + cov.T)


def fit_gaussian(samples, name: str | None = None) -> MultivariateNormal:
    """Maximum-likelihood mean and unbiased covariance of ``samples`` (k >= 2 rows)."""
    data = check_samples(samples)
    if data.shape[0] < 2:
        raise DomainError(f"fit_gaussian needs at least 2 samples, got {data.shape[0]}")
    return MultivariateNormal(data.mean(axis=0), _sample_cov(data), name=name)


def _kernel_base(data: np.ndarray) -> np.ndarray:
    n = data.shape[1]
    if data.shape[0] < 2:
        logger.info("fewer than 2 samples: KDE uses the identity as base covariance")
        return np.eye(n)
    cov = _sample_cov(data)
    try:
        np.linalg.cholesky(cov)
        return cov
    except np.linalg.LinAlgError:
        scale = float(np.mean(np.diag(cov)))
        scale = scale if scale > 0 else 1.0
        logger.info("singular sample covariance: KDE uses %.6g * identity", scale)
        return scale * np.eye(n)


def fit_kde(samples, rule="scott", name: str | None = None) -> GaussianMixture:
    """Gaussian KDE as an equal-weight mixture centred on the samples.

    All kernels share the covariance ``f**2 * S`` with ``S`` the sample
    covariance (see :func:`bandwidth_factor` for ``f``).  When ``S`` is not
    positive definite it is replaced by its mean diagonal times the identity.
    """
    data = check_samples(samples)
    k, n = data.shape
    f = bandwidth_factor(rule, k, n)
    kernel = MultivariateNormal(np.zeros(n), f * f * _kernel_base(data))
    # components share one covariance array so densities are evaluated in one batch
    components = [MultivariateNormal(row, kernel.cov) for row in data]
    return GaussianMixture(np.full(k, 1.0 / k), components, name=name)


class GaussianKDE(BaseEstimator):
    """Kernel density estimator with a full bandwidth matrix.

    Parameters
    ----------
    bandwidth : {"scott", "silverman"} or float, default="scott"
        Rule for the bandwidth factor, or a fixed factor.

    Attributes
    ----------
    mixture_ : GaussianMixture
        The fitted density.
    factor_ : float
        Bandwidth factor applied to the sample covariance.
    """

    def __init__(self, bandwidth="scott"):
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        X = check_samples(X)
        self.factor_ = bandwidth_factor(self.bandwidth, *X.shape)
        self.mixture_ = fit_kde(X, self.bandwidth)
        self.n_features_in_ = X.shape[1]
        return self

    def score_samples(self, X):
        """Log density at each row of ``X``."""
        check_fitted(self, "mixture_")
        with np.errstate(divide="ignore"):
            return np.log(self.mixture_.pdf(check_samples(X, n_features=self.n_features_in_)))

    def sample(self, n_samples=1, random_state=0):
        check_fitted(self, "mixture_")
        return self.mixture_.sample(n_samples, random_state)
