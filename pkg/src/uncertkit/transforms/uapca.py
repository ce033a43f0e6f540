"""Uncertainty-aware PCA.

The combined covariance of a set of distributions is the covariance of
their means plus the average of their covariances, both with uniform
``1/N`` weights.  Its leading eigenvectors give a linear projection that
is applied to every distribution, so each Gaussian maps to a Gaussian.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..exceptions import DomainError, NumericFailure
from ..numerics import sym_eig
from ..utils.validation import as_normals, check_distributions, check_fitted
from ._base import EmbeddingResult, UapcaModel

__all__ = ["UAPCA", "combined_covariance", "uapca"]


def combined_covariance(means: np.ndarray, covs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(center, C)`` for stacked means (N, n) and covariances (N, n, n)."""
    center = means.mean(axis=0)
    centered = means - center
    with np.errstate(over="ignore", invalid="ignore"):
        c = centered.T @ centered / means.shape[0] + covs.mean(axis=0)
    if not np.all(np.isfinite(c)):
        raise NumericFailure("combined covariance overflowed; rescale the input")
    return center, 0.5 * (c + c.T)


class UAPCA(TransformerMixin, BaseEstimator):
    """Uncertainty-aware principal component analysis.

    ``fit`` and ``transform`` take a list of distributions rather than a
    sample matrix.  Non-Gaussian inputs are replaced by the Gaussian with
    matching mean and covariance.

    Parameters
    ----------
    n_components : int, default=2
        Target dimension.

    Attributes
    ----------
    mean_ : ndarray of shape (n_features,)
        Mean of the distribution means.
    components_ : ndarray of shape (n_components, n_features)
        Projection rows, i.e. the leading eigenvectors of the combined covariance.
    eigenvalues_ : ndarray of shape (n_features,)
        All eigenvalues of the combined covariance, descending.
    covariance_ : ndarray of shape (n_features, n_features)
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        dists = as_normals(check_distributions(X))
        n = dists[0].dim
        d = int(self.n_components)
        if not 1 <= d <= n:
            raise DomainError(f"n_components must lie in [1, {n}], got {self.n_components}")
        means = np.array([g.mean for g in dists])
        covs = np.array([g.cov for g in dists])
        self.mean_, self.covariance_ = combined_covariance(means, covs)
        eig = sym_eig(self.covariance_)
        self.eigenvalues_ = eig.eigenvalues
        self.components_ = eig.eigenvectors[:, :d].T.copy()
        self.n_features_in_ = n
        return self

    @property
    def model_(self) -> UapcaModel:
        check_fitted(self, "components_")
        return UapcaModel(self.mean_, self.components_.T, self.eigenvalues_)

    def transform(self, X):
        """Project each distribution to ``N(W^T (mu - center), W^T Sigma W)``."""
        check_fitted(self, "components_")
        dists = as_normals(check_distributions(X, dim=self.n_features_in_))
        amap = self.model_.affine_map
        return [g.affine(amap) for g in dists]


def uapca(dists, d: int = 2) -> tuple[EmbeddingResult, UapcaModel]:
    """Functional form of :class:`UAPCA`: fit on ``dists`` and project them."""
    est = UAPCA(n_components=d).fit(dists)
    out = est.transform(dists)
    model = est.model_
    return EmbeddingResult(out, [model.affine_map] * len(out)), model
