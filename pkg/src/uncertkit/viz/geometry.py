"""Data-space geometry behind the plots: isolines, HDR contours, box statistics, violins, swarms."""
from __future__ import annotations

import logging
import math

import numpy as np

from ..distributions import Distribution, EmpiricalSamples, GaussianMixture, MultivariateNormal
from ..exceptions import DomainError
from ..numerics import cholesky_psd, mahalanobis_radius, marching_squares, normal_quantile

logger = logging.getLogger(__name__)

DEFAULT_QUANTILES = (0.25, 0.5, 0.75, 0.95)
BOX_PROBS = (0.025, 0.25, 0.5, 0.75, 0.975)
FALLBACK_DRAWS = 1000


def check_quantiles(levels) -> tuple[float, ...]:
    levels = tuple(float(q) for q in levels)
    if not levels:
        raise DomainError("at least one quantile level is required")
    if any(not 0.0 < q < 1.0 for q in levels):
        raise DomainError(f"quantile levels must lie in (0, 1), got {levels}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DomainError(f"quantile levels must be strictly ascending, got {levels}")
    return levels


def is_positive_definite(cov) -> bool:
    try:
        np.linalg.cholesky(cov)
        return True
    except np.linalg.LinAlgError:
        return False


def gaussian_isoline(mean, cov, q: float, n_points: int = 128) -> np.ndarray:
    """Closed ellipse ``mean + r(q) L (cos t, sin t)`` holding mass ``q`` of a 2D Gaussian."""
    factor, _ = cholesky_psd(cov)
    t = 2.0 * math.pi * np.arange(n_points) / n_points
    circle = np.column_stack([np.cos(t), np.sin(t)])
    return np.asarray(mean, dtype=float) + mahalanobis_radius(q) * circle @ factor.T


def hdr_thresholds(dist: Distribution, levels, n_draws: int = 10000, seed: int = 0) -> np.ndarray:
    """Density thresholds ``t_q``: the (1 - q)-quantile of pdf values at seeded draws.

    The region ``pdf >= t_q`` then holds probability ``q`` up to Monte-Carlo error.
    """
    draws = dist.sample(n_draws, seed)
    dens = dist.pdf(draws)
    return np.quantile(dens, 1.0 - np.asarray(levels, dtype=float))


def hdr_box(dist: Distribution) -> tuple[float, float, float, float]:
    """Grid box ``(xlo, xhi, ylo, yhi)``: sample bounds + 10% or mean +- 4 sd."""
    if isinstance(dist, EmpiricalSamples):
        lo, hi = dist.data.min(axis=0), dist.data.max(axis=0)
        span = np.where(hi > lo, hi - lo, 1.0)
        lo, hi = lo - 0.1 * span, hi + 0.1 * span
    else:
        mean, cov = dist.moments()
        sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
        sd = np.where(sd > 0, sd, 0.5)
        lo, hi = mean - 4.0 * sd, mean + 4.0 * sd
    return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])


def hdr_contours(dist: Distribution, levels, grid_size: int = 256, n_draws: int = 10000,
                 seed: int = 0) -> list[list[tuple[np.ndarray, bool]]]:
    """HDR contours per level as lists of ``(points, closed)`` in data coordinates."""
    xlo, xhi, ylo, yhi = hdr_box(dist)
    xs = np.linspace(xlo, xhi, grid_size)
    ys = np.linspace(ylo, yhi, grid_size)
    gx, gy = np.meshgrid(xs, ys)
    dens = dist.pdf(np.column_stack([gx.ravel(), gy.ravel()])).reshape(grid_size, grid_size)
    thresholds = hdr_thresholds(dist, levels, n_draws, seed)
    dx = (xhi - xlo) / (grid_size - 1)
    dy = (yhi - ylo) / (grid_size - 1)
    out = []
    for t in thresholds:
        lines = marching_squares(dens, float(t))
        out.append([(np.column_stack([xlo + ln.points[:, 0] * dx, ylo + ln.points[:, 1] * dy]), ln.closed)
                    for ln in lines])
    return out


def contour_geometry(dist: Distribution, levels, n_points: int = 128, grid_size: int = 256,
                     n_draws: int = 10000, seed: int = 0) -> list[list[tuple[np.ndarray, bool]]]:
    """Contours of a 2D distribution for each level, analytic for positive-definite Gaussians."""
    if dist.dim != 2:
        raise DomainError(f"contours need 2D distributions, got dimension {dist.dim}")
    if isinstance(dist, MultivariateNormal):
        if is_positive_definite(dist.cov):
            return [[(gaussian_isoline(dist.mean, dist.cov, q, n_points), True)] for q in levels]
        logger.warning("singular covariance for %s: contours from a KDE of %d draws",
                       dist.name or "distribution", FALLBACK_DRAWS)
        dist = EmpiricalSamples(dist.sample(FALLBACK_DRAWS, seed), dist.name)
    return hdr_contours(dist, levels, grid_size, n_draws, seed)


def box_stats(dist: Distribution, n_draws: int = 10000, seed: int = 0) -> np.ndarray:
    """Values at probabilities 0.025, 0.25, 0.5, 0.75, 0.975 of a 1D distribution."""
    if dist.dim != 1:
        raise DomainError(f"box statistics need 1D distributions, got dimension {dist.dim}")
    if isinstance(dist, MultivariateNormal):
        sd = math.sqrt(max(float(dist.cov[0, 0]), 0.0))
        return np.array([dist.mean[0] + normal_quantile(p) * sd for p in BOX_PROBS])
    return np.quantile(dist.sample(n_draws, seed)[:, 0], BOX_PROBS)


def violin_profile(dist: Distribution, n_points: int = 129) -> tuple[np.ndarray, np.ndarray]:
    """``(values, density)`` on a grid covering the bulk of a 1D distribution.

    Gaussians use mean +- 4 sd with an odd point count, so the grid is
    symmetric about the mean.
    """
    if dist.dim != 1:
        raise DomainError(f"violins need 1D distributions, got dimension {dist.dim}")
    if isinstance(dist, MultivariateNormal):
        centers, sds = dist.mean, np.sqrt(np.diag(dist.cov))
    elif isinstance(dist, GaussianMixture):
        centers = np.array([c.mean[0] for c in dist.components])
        sds = np.array([math.sqrt(c.cov[0, 0]) for c in dist.components])
    else:
        kde = dist.kde()
        centers = dist.data[:, 0]
        sds = np.full(centers.shape, math.sqrt(kde.components[0].cov[0, 0]))
    lo, hi = float(np.min(centers - 4 * sds)), float(np.max(centers + 4 * sds))
    if isinstance(dist, MultivariateNormal):
        mu, sd = float(dist.mean[0]), float(sds[0])
        values = mu + 4.0 * sd * np.linspace(-1.0, 1.0, n_points)
    else:
        values = np.linspace(lo, hi, n_points)
    if hi <= lo:
        return values, np.zeros_like(values)
    return values, dist.pdf(values[:, None])


def beeswarm_offsets(values_px, radius: float) -> np.ndarray:
    """Offsets (px, across the value axis) so no two centres are closer than ``2 * radius``.

    Points are processed in ascending value order; each takes the nearest
    lane (0, +1, -1, +2, ...) of width ``2 * radius`` whose last point is at
    least ``2 * radius`` away along the value axis.
    """
    values_px = np.asarray(values_px, dtype=float)
    gap = 2.0 * radius
    order = np.argsort(values_px, kind="stable")
    last: dict[int, float] = {}
    offsets = np.zeros_like(values_px)
    for idx in order:
        v = values_px[idx]
        k = 0
        while True:
            for lane in ((0,) if k == 0 else (k, -k)):
                if lane not in last or v - last[lane] >= gap:
                    last[lane] = v
                    offsets[idx] = lane * gap
                    break
            else:
                k += 1
                continue
            break
    return offsets
