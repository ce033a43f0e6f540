"""The Distribution values passed between every stage of the pipeline.

Three variants exist: :class:`MultivariateNormal`, :class:`GaussianMixture`
and :class:`EmpiricalSamples`.  All are immutable; arrays are stored
read-only.  Module-level functions (:func:`moments`, :func:`sample`, ...)
dispatch to the methods and mirror the functional API.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NumericFailure
from .numerics import PSD_TOL, as_sym_matrix, cholesky_psd, make_rng, min_eigenvalue, nearest_psd

logger = logging.getLogger(__name__)

__all__ = [
    "AffineMap",
    "Distribution",
    "EmpiricalSamples",
    "GaussianMixture",
    "MultivariateNormal",
    "affine_transform",
    "marginal",
    "moments",
    "pdf",
    "sample",
]

# bound on points x components evaluated at once by mixture densities
_PDF_CHUNK = 2_000_000


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``x -> matrix @ x + offset`` with ``matrix`` of shape (d, n)."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, ndmin=2)
        offset = np.array(self.offset, dtype=float, ndmin=1)
        if matrix.ndim != 2 or offset.ndim != 1 or offset.shape[0] != matrix.shape[0]:
            raise DomainError(
                f"offset of length {offset.shape} does not match matrix rows {matrix.shape}"
            )
        object.__setattr__(self, "matrix", _frozen(matrix))
        object.__setattr__(self, "offset", _frozen(offset))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n), np.zeros(n))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.offset

    def __eq__(self, other):
        return (isinstance(other, AffineMap)
                and np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.offset, other.offset))

    __hash__ = None


class Distribution:
    """Common interface of all distribution variants."""

    kind: str = ""
    name: str | None = None

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def mean(self) -> np.ndarray:
        return self.moments()[0]

    @property
    def cov(self) -> np.ndarray:
        return self.moments()[1]

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        count = int(count)
        if count < 1:
            raise DomainError(f"sample count must be >= 1, got {count}")
        return self._sample(count, make_rng(seed))

    def _sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x):
        """Density at a point ``(n,)`` or at each row of an ``(m, n)`` array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise DomainError(f"points of shape {x.shape} do not match dimension {self.dim}")
        out = self._pdf(pts)
        return float(out[0]) if single else out

    def _pdf(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def marginal(self, dims) -> "Distribution":
        raise NotImplementedError

    def affine(self, amap: AffineMap) -> "Distribution":
        raise NotImplementedError

    def with_name(self, name: str | None) -> "Distribution":
        raise NotImplementedError

    def _check_dims(self, dims) -> list[int]:
        dims = [int(d) for d in np.atleast_1d(dims)]
        if not dims:
            raise DomainError("at least one dimension must be selected")
        if len(set(dims)) != len(dims):
            raise DomainError(f"dimensions must be distinct, got {dims}")
        bad = [d for d in dims if not 0 <= d < self.dim]
        if bad:
            raise DomainError(f"dimension index {bad[0]} out of range for dimension {self.dim}")
        return dims

    def _check_map(self, amap: AffineMap):
        if amap.matrix.shape[1] != self.dim:
            raise DomainError(
                f"map with {amap.matrix.shape[1]} columns cannot act on dimension {self.dim}"
            )


class MultivariateNormal(Distribution):
    """Gaussian with mean vector and symmetric PSD covariance.

    Covariances failing the PSD check (smallest eigenvalue below
    ``-1e-10 * max(1, ||cov||_F)``) are repaired by eigenvalue clipping and
    the repair is logged.
    """

    kind = "normal"

    def __init__(self, mean, cov, name: str | None = None):
        mean = np.array(mean, dtype=float, ndmin=1)
        if mean.ndim != 1 or not np.all(np.isfinite(mean)):
            raise DomainError("mean must be a finite vector")
        cov = as_sym_matrix(cov)
        if cov.shape[0] != mean.shape[0]:
            raise DomainError(f"covariance shape {cov.shape} does not match mean length {mean.shape[0]}")
        lam = min_eigenvalue(cov)
        if lam < -PSD_TOL * max(1.0, float(np.linalg.norm(cov))):
            logger.info("covariance repaired to nearest PSD matrix (smallest eigenvalue %.3g)", lam)
            cov = nearest_psd(cov)
        self._mean = _frozen(mean)
        self._cov = _frozen(cov)
        self.name = name
        self._factor = None

    @property
    def dim(self) -> int:
        return self._mean.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    def moments(self):
        return self._mean, self._cov

    def cholesky(self) -> np.ndarray:
        if self._factor is None:
            factor, jitter = cholesky_psd(self._cov)
            if jitter:
                logger.info("sampling with Cholesky jitter %.3g", jitter)
            self._factor = factor
        return self._factor

    def _sample(self, count, rng):
        z = rng.standard_normal((count, self.dim))
        return self._mean + z @ self.cholesky().T

    def _precision_factor(self):
        try:
            factor = np.linalg.cholesky(self._cov)
        except np.linalg.LinAlgError:
            raise NumericFailure(
                "density undefined: covariance is singular (not positive definite)"
            ) from None
        return factor

    def logpdf(self, x):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        factor = self._precision_factor()
        step = max(1, _PDF_CHUNK // self.dim)
        return np.concatenate([
            _gauss_logpdf(pts[i:i + step], self._mean[None, :], factor)[:, 0]
            for i in range(0, pts.shape[0], step)
        ]) if pts.shape[0] else np.zeros(0)

    def _pdf(self, pts):
        return np.exp(self.logpdf(pts))

    def marginal(self, dims):
        dims = self._check_dims(dims)
        return MultivariateNormal(self._mean[dims], self._cov[np.ix_(dims, dims)], self.name)

    def affine(self, amap):
        self._check_map(amap)
        a = amap.matrix
        return MultivariateNormal(a @ self._mean + amap.offset, a @ self._cov @ a.T, self.name)

    def with_name(self, name):
        return MultivariateNormal(self._mean, self._cov, name)

    def __eq__(self, other):
        return (isinstance(other, MultivariateNormal) and self.name == other.name
                and np.array_equal(self._mean, other._mean)
                and np.array_equal(self._cov, other._cov))

    __hash__ = None

    def __repr__(self):
        return f"MultivariateNormal(dim={self.dim}, name={self.name!r})"


def _gauss_logpdf(pts, centers, factor):
    """Log density of N(center, L L^T) for every (point, center) pair -> (m, k)."""
    n = pts.shape[1]
    logdet = 2.0 * np.sum(np.log(np.diag(factor)))
    inv = np.linalg.inv(factor)
    diff = pts[:, None, :] - centers[None, :, :]
    sq = np.sum((diff @ inv.T) ** 2, axis=2)
    return -0.5 * (n * math.log(2.0 * math.pi) + logdet + sq)


class GaussianMixture(Distribution):
    """Weighted sum of Gaussians of a common dimension.

    Weights must be non-negative; if they do not sum to 1 within 1e-12
    they are normalized (logged).
    """

    kind = "mixture"

    def __init__(self, weights, components, name: str | None = None):
        components = list(components)
        if not components:
            raise DomainError("a mixture needs at least one component")
        if not all(isinstance(c, MultivariateNormal) for c in components):
            raise DomainError("mixture components must be MultivariateNormal")
        if len({c.dim for c in components}) != 1:
            raise DomainError("mixture components must share one dimension")
        weights = np.array(weights, dtype=float, ndmin=1)
        if weights.shape != (len(components),):
            raise DomainError(f"{weights.shape[0]} weights for {len(components)} components")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)) or weights.sum() <= 0:
            raise DomainError("mixture weights must be finite, non-negative and not all zero")
        total = weights.sum()
        if abs(total - 1.0) > 1e-12:
            logger.info("mixture weights summed to %.17g; normalized", total)
            weights = weights / total
        self._weights = _frozen(weights)
        self._components = tuple(c.with_name(None) if c.name is not None else c for c in components)
        self.name = name

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def components(self) -> tuple[MultivariateNormal, ...]:
        return self._components

    @property
    def dim(self) -> int:
        return self._components[0].dim

    def moments(self):
        w = self._weights
        means = np.array([c.mean for c in self._components])
        mu = w @ means
        second = sum(wi * (c.cov + np.outer(c.mean, c.mean)) for wi, c in zip(w, self._components))
        cov = second - np.outer(mu, mu)
        return mu, nearest_psd(cov)

    def _sample(self, count, rng):
        labels = rng.choice(len(self._components), size=count, p=self._weights)
        z = rng.standard_normal((count, self.dim))
        out = np.empty((count, self.dim))
        for k, comp in enumerate(self._components):
            rows = labels == k
            if np.any(rows):
                out[rows] = comp.mean + z[rows] @ comp.cholesky().T
        return out

    def _groups(self):
        # components sharing one covariance (e.g. a KDE) are evaluated together
        groups: list[tuple[np.ndarray, list[int]]] = []
        for k, comp in enumerate(self._components):
            for cov, idx in groups:
                if cov is comp.cov or np.array_equal(cov, comp.cov):
                    idx.append(k)
                    break
            else:
                groups.append((comp.cov, [k]))
        return groups

    def _pdf(self, pts):
        out = np.zeros(pts.shape[0])
        for _, idx in self._groups():
            factor = self._components[idx[0]]._precision_factor()
            centers = np.array([self._components[k].mean for k in idx])
            w = self._weights[idx]
            step = max(1, _PDF_CHUNK // (len(idx) * self.dim))
            for start in range(0, pts.shape[0], step):
                block = pts[start:start + step]
                out[start:start + step] += np.exp(_gauss_logpdf(block, centers, factor)) @ w
        return out

    def marginal(self, dims):
        dims = self._check_dims(dims)
        return GaussianMixture(self._weights, [c.marginal(dims) for c in self._components], self.name)

    def affine(self, amap):
        self._check_map(amap)
        return GaussianMixture(self._weights, [c.affine(amap) for c in self._components], self.name)

    def with_name(self, name):
        return GaussianMixture(self._weights, self._components, name)

    def __eq__(self, other):
        return (isinstance(other, GaussianMixture) and self.name == other.name
                and np.array_equal(self._weights, other._weights)
                and self._components == other._components)

    __hash__ = None

    def __repr__(self):
        return (f"GaussianMixture(dim={self.dim}, components={len(self._components)}, "
                f"name={self.name!r})")


class EmpiricalSamples(Distribution):
    """A finite sample set; rows are observations."""

    kind = "samples"

    def __init__(self, data, name: str | None = None):
        data = np.array(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DomainError(f"sample data must be a non-empty k x n matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("sample data contains non-finite entries")
        self._data = _frozen(data)
        self.name = name
        self._kde = None

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[1]

    def moments(self):
        mu = self._data.mean(axis=0)
        if self._data.shape[0] < 2:
            logger.info("single observation: covariance set to zero")
            return mu, np.zeros((self.dim, self.dim))
        centered = self._data - mu
        cov = centered.T @ centered / (self._data.shape[0] - 1)
        return mu, 0.5 * (cov + cov.T)

    def _sample(self, count, rng):
        return self._data[rng.integers(0, self._data.shape[0], size=count)]

    def kde(self) -> GaussianMixture:
        """Default (Scott) kernel density estimate used for densities."""
        if self._kde is None:
            from .estimation import fit_kde

            self._kde = fit_kde(self._data)
        return self._kde

    def _pdf(self, pts):
        return self.kde()._pdf(pts)

    def marginal(self, dims):
        dims = self._check_dims(dims)
        return EmpiricalSamples(self._data[:, dims], self.name)

    def affine(self, amap):
        self._check_map(amap)
        return EmpiricalSamples(amap(self._data), self.name)

    def with_name(self, name):
        return EmpiricalSamples(self._data, name)

    def __eq__(self, other):
        return (isinstance(other, EmpiricalSamples) and self.name == other.name
                and np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self):
        return f"EmpiricalSamples(count={self._data.shape[0]}, dim={self.dim}, name={self.name!r})"


def moments(dist: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of any distribution."""
    return dist.moments()


def sample(dist: Distribution, count: int, seed: int = 0) -> np.ndarray:
    """Draw ``count`` rows from ``dist``; a pure function of its arguments."""
    return dist.sample(count, seed)


def pdf(dist: Distribution, x):
    return dist.pdf(x)


def marginal(dist: Distribution, dims) -> Distribution:
    return dist.marginal(dims)


def affine_transform(dist: Distribution, amap: AffineMap) -> Distribution:
    """Push ``dist`` through ``x -> A x + b``."""
    return dist.affine(amap)
