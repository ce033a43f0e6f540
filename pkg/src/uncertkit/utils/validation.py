"""Input validation helpers used by the estimators and render functions."""
from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from ..distributions import Distribution, MultivariateNormal
from ..exceptions import DomainError


def check_samples(X, n_features: int | None = None) -> np.ndarray:
    """Return ``X`` as a finite 2D float array (1D input becomes one column)."""
    X = np.array(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DomainError(f"expected a non-empty k x n sample matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("samples contain non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise DomainError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def check_distributions(X, *, dim: int | None = None, min_count: int = 1) -> list[Distribution]:
    """Validate a list of distributions of one common dimension.

    A single :class:`Distribution` is accepted and wrapped in a list.
    """
    if isinstance(X, Distribution):
        X = [X]
    dists = list(X)
    if len(dists) < min_count:
        raise DomainError(f"expected at least {min_count} distribution(s), got {len(dists)}")
    for i, d in enumerate(dists):
        if not isinstance(d, Distribution):
            raise DomainError(f"item {i} is not a Distribution but {type(d).__name__}")
    dims = {d.dim for d in dists}
    if len(dims) > 1:
        raise DomainError(f"distributions have mixed dimensions {sorted(dims)}")
    if dim is not None and dists and dists[0].dim != dim:
        raise DomainError(f"expected {dim}-dimensional distributions, got {dists[0].dim}")
    return dists


def as_normals(dists) -> list[MultivariateNormal]:
    """Reduce every distribution to the Gaussian with the same first two moments."""
    out = []
    for d in dists:
        if isinstance(d, MultivariateNormal):
            out.append(d)
        else:
            mean, cov = d.moments()
            out.append(MultivariateNormal(mean, cov, name=d.name))
    return out


def check_fitted(estimator, attribute: str):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )
