"""Uncertainty-aware multidimensional scaling for Gaussian distributions.

Every input ``N(mu_i, Sigma_i)`` in n dimensions receives its own affine map
``y = P_i x + t_i`` into d dimensions.  With the coupling
``Y_i = P_i (X_i - mu_i) + c_i``, ``c_i = P_i mu_i + t_i``, the stress is::

    S = sum over pairs E[(||X_i - X_j||^2 - ||Y_i - Y_j||^2)^2]

which has a closed form in the pair moments.  Pairs are all ``i < j`` plus,
optionally, each ``(i, i)`` with an independent copy of ``X_i``.  The maps
are found by gradient descent with backtracking line search.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ..distributions import AffineMap, MultivariateNormal
from ..exceptions import DomainError
from ..numerics import make_rng
from ..utils.validation import as_normals, check_distributions
from ._base import EmbeddingResult
from ._optim import gradient_descent
from .uapca import UAPCA

__all__ = ["UAMDS", "CoupledStress", "UamdsParams", "uamds_fit", "uamds_stress"]

INITS = ("uapca", "random")
_CHUNK_ELEMENTS = 4_000_000


@dataclass
class UamdsParams:
    """Optimizer settings; ``maps``, when given, replace the ``init`` strategy."""

    maps: Sequence[AffineMap] | None = None
    include_self_pairs: bool = True
    max_iter: int = 2000
    tol: float = 1e-8
    seed: int = 0
    init: str = "uapca"

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.init not in INITS:
            raise DomainError(f"init must be one of {INITS}, got {self.init!r}")


def _pairs(N: int, self_pairs: bool) -> np.ndarray:
    return np.array([(i, j) for i in range(N) for j in range(i, N) if self_pairs or i != j],
                    dtype=int).reshape(-1, 2)


class CoupledStress:
    """Closed-form coupled second-moment stress and its gradient.

    For one pair with ``V = blockdiag(Sigma_i, Sigma_j)``,
    ``G = [P_i, -P_j]``, ``A = [[I, -I], [-I, I]] - G^T G``,
    ``e = c_i - c_j``, ``dmu = mu_i - mu_j``,
    ``b = 2([dmu; -dmu] - G^T e)`` and ``k = ||dmu||^2 - ||e||^2``::

        s = (tr(AV) + k)^2 + 2 tr((AV)^2) + b^T V b

    Self pairs use ``dmu = e = 0`` and ``G = [P_i, -P_i]``.
    """

    def __init__(self, include_self_pairs: bool = True):
        self.include_self_pairs = include_self_pairs

    def __call__(self, means, covs, P, t, grad=True):
        """Return the stress, or ``(stress, dS/dP, dS/dt)`` when ``grad``."""
        N, d, n = P.shape
        centers = np.einsum("idn,in->id", P, means) + t
        pairs = _pairs(N, self.include_self_pairs)
        total = 0.0
        gP = np.zeros_like(P) if grad else None
        gt = np.zeros_like(t) if grad else None
        eye = np.eye(n)
        a_h = np.block([[eye, -eye], [-eye, eye]])
        step = max(1, _CHUNK_ELEMENTS // (4 * n * n))
        for start in range(0, len(pairs), step):
            i, j = pairs[start:start + step].T
            own = i == j
            m = len(i)
            V = np.zeros((m, 2 * n, 2 * n))
            V[:, :n, :n] = covs[i]
            V[:, n:, n:] = covs[j]
            G = np.concatenate([P[i], -P[j]], axis=2)
            dmu = np.where(own[:, None], 0.0, means[i] - means[j])
            e = np.where(own[:, None], 0.0, centers[i] - centers[j])
            A = a_h - np.einsum("mdk,mdl->mkl", G, G)
            h = np.concatenate([dmu, -dmu], axis=1)
            b = 2.0 * (h - np.einsum("mdk,md->mk", G, e))
            k = np.sum(dmu * dmu, axis=1) - np.sum(e * e, axis=1)
            AV = A @ V
            alpha = np.trace(AV, axis1=1, axis2=2) + k
            Vb = np.einsum("mkl,ml->mk", V, b)
            s = alpha ** 2 + 2.0 * np.einsum("mkl,mlk->m", AV, AV) + np.einsum("mk,mk->m", b, Vb)
            total += float(np.sum(s))
            if not grad:
                continue
            GV = G @ V
            gG = (-4.0 * alpha[:, None, None] * GV - 8.0 * GV @ AV
                  - 4.0 * e[:, :, None] * Vb[:, None, :])
            ge = -4.0 * alpha[:, None] * e - 4.0 * np.einsum("mdk,mk->md", GV, b)
            # self pairs have e fixed at zero, so ge does not feed back into P, t
            ge[own] = 0.0
            gPi = gG[:, :, :n] + ge[:, :, None] * means[i][:, None, :]
            gPj = -gG[:, :, n:] - ge[:, :, None] * means[j][:, None, :]
            np.add.at(gP, i, gPi)
            np.add.at(gP, j, gPj)
            np.add.at(gt, i, ge)
            np.add.at(gt, j, -ge)
        if grad:
            return total, gP, gt
        return total


def _stack(dists):
    means = np.array([g.mean for g in dists])
    covs = np.array([g.cov for g in dists])
    return means, covs


def _check_maps(maps, N: int, n: int):
    maps = list(maps)
    if len(maps) != N:
        raise DomainError(f"{len(maps)} maps for {N} distributions")
    shapes = {m.matrix.shape for m in maps}
    if len(shapes) != 1:
        raise DomainError(f"maps have differing shapes {sorted(shapes)}")
    d, cols = shapes.pop()
    if cols != n:
        raise DomainError(f"maps have {cols} columns but distributions are {n}-dimensional")
    P = np.array([m.matrix for m in maps])
    t = np.array([m.offset for m in maps])
    return P, t


def uamds_stress(dists, maps, include_self_pairs: bool = True) -> float:
    """Coupled UAMDS stress of ``dists`` under per-distribution ``maps``."""
    dists = as_normals(check_distributions(dists))
    means, covs = _stack(dists)
    P, t = _check_maps(maps, len(dists), dists[0].dim)
    return CoupledStress(include_self_pairs)(means, covs, P, t, grad=False)


def uamds_gradient(dists, maps, include_self_pairs: bool = True):
    """``(stress, dS/dP, dS/dt)`` with gradients stacked per distribution."""
    dists = as_normals(check_distributions(dists))
    means, covs = _stack(dists)
    P, t = _check_maps(maps, len(dists), dists[0].dim)
    return CoupledStress(include_self_pairs)(means, covs, P, t)


def initial_maps(dists, d: int, init: str = "uapca", seed: int = 0) -> list[AffineMap]:
    """Starting maps: the shared UAPCA projection, or i.i.d. N(0, 1/n) entries."""
    dists = as_normals(check_distributions(dists))
    N, n = len(dists), dists[0].dim
    if init == "uapca":
        model = UAPCA(n_components=d).fit(dists).model_
        return [model.affine_map] * N
    if init == "random":
        rng = make_rng(seed)
        P = rng.standard_normal((N, d, n)) / np.sqrt(n)
        t = rng.standard_normal((N, d)) / np.sqrt(n)
        return [AffineMap(P[i], t[i]) for i in range(N)]
    raise DomainError(f"init must be one of {INITS}, got {init!r}")


def uamds_fit(dists, d: int = 2, params: UamdsParams | None = None, stress=None) -> EmbeddingResult:
    """Minimize the stress over all maps and return the embedded Gaussians.

    ``stress`` may replace the default :class:`CoupledStress`; it must be
    callable as ``stress(means, covs, P, t, grad)``.
    """
    params = params or UamdsParams()
    dists = as_normals(check_distributions(dists))
    N, n = len(dists), dists[0].dim
    if not 1 <= int(d) <= n:
        raise DomainError(f"target dimension must lie in [1, {n}], got {d}")
    d = int(d)
    maps = params.maps if params.maps is not None else initial_maps(dists, d, params.init, params.seed)
    P0, t0 = _check_maps(maps, N, n)
    if P0.shape[1] != d:
        raise DomainError(f"initial maps project to {P0.shape[1]} dimensions, expected {d}")
    stress = stress or CoupledStress(params.include_self_pairs)
    means, covs = _stack(dists)
    split = N * d * n

    def fun(x, grad):
        P = x[:split].reshape(N, d, n)
        t = x[split:].reshape(N, d)
        if not grad:
            return stress(means, covs, P, t, grad=False)
        value, gP, gt = stress(means, covs, P, t, grad=True)
        return value, np.concatenate([gP.ravel(), gt.ravel()])

    x0 = np.concatenate([P0.ravel(), t0.ravel()])
    x, trace, converged = gradient_descent(fun, x0, int(params.max_iter), float(params.tol))
    P = x[:split].reshape(N, d, n)
    t = x[split:].reshape(N, d)
    final = [AffineMap(P[i], t[i]) for i in range(N)]
    out = [g.affine(m) for g, m in zip(dists, final)]
    return EmbeddingResult(out, final, trace, converged)


class UAMDS(BaseEstimator):
    """Uncertainty-aware MDS estimator.

    There is no out-of-sample extension, so only ``fit`` and
    ``fit_transform`` are provided.

    Parameters
    ----------
    n_components : int, default=2
    include_self_pairs : bool, default=True
        Add each distribution paired with an independent copy of itself.
    max_iter : int, default=2000
    tol : float, default=1e-8
        Stop when the relative stress decrease falls below this value.
    init : {"uapca", "random"}, default="uapca"
    random_state : int, default=0
        Seed for ``init="random"``.

    Attributes
    ----------
    embedding_ : list of MultivariateNormal
    maps_ : list of AffineMap
    stress_ : float
    stress_trace_ : list of float
    converged_ : bool
    n_iter_ : int
    """

    def __init__(self, n_components=2, include_self_pairs=True, max_iter=2000, tol=1e-8,
                 init="uapca", random_state=0):
        self.n_components = n_components
        self.include_self_pairs = include_self_pairs
        self.max_iter = max_iter
        self.tol = tol
        self.init = init
        self.random_state = random_state

    def fit(self, X, y=None, init_maps=None):
        params = UamdsParams(maps=init_maps, include_self_pairs=self.include_self_pairs,
                             max_iter=self.max_iter, tol=self.tol, seed=self.random_state,
                             init=self.init)
        result = uamds_fit(X, self.n_components, params)
        self.result_ = result
        self.embedding_ = result.distributions
        self.maps_ = result.maps
        self.stress_trace_ = result.stress_trace
        self.stress_ = result.stress
        self.converged_ = result.converged
        self.n_iter_ = result.n_iter
        self.n_features_in_ = result.maps[0].matrix.shape[1]
        return self

    def fit_transform(self, X, y=None, init_maps=None):
        return self.fit(X, init_maps=init_maps).embedding_
