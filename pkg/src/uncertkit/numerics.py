"""Deterministic linear algebra and scalar statistics primitives.

Everything here is a pure function on arrays.  Randomness goes through
:func:`make_rng`, which pins the bit generator (PCG64) so that a seed fully
determines every stream.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, NumericFailure

__all__ = [
    "EigenDecomposition",
    "Polyline",
    "as_sym_matrix",
    "cholesky_psd",
    "make_rng",
    "mahalanobis_radius",
    "marching_squares",
    "nearest_psd",
    "normal_cdf",
    "normal_quantile",
    "sym_eig",
]

SEED_MODULUS = 2**64
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
PSD_TOL = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class Polyline(NamedTuple):
    points: np.ndarray
    closed: bool


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64-backed generator for a 64-bit unsigned seed."""
    seed = int(seed)
    if not 0 <= seed < SEED_MODULUS:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, offset: int) -> int:
    return (int(seed) + int(offset)) % SEED_MODULUS


def as_sym_matrix(m) -> np.ndarray:
    """Validate a square finite matrix and symmetrize it as (M + M^T) / 2."""
    m = np.array(m, dtype=float, ndmin=2)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix contains non-finite entries")
    return 0.5 * (m + m.T)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made non-negative; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def sym_eig(m) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order.  Each eigenvector is
    flipped so that its entry of largest magnitude is non-negative, which
    makes projections reproducible.
    """
    m = as_sym_matrix(m)
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # LAPACK syevd iteration cap
        raise NumericFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    order = np.argsort(values, kind="stable")[::-1]
    return EigenDecomposition(values[order], _fix_signs(vectors[:, order]))


def nearest_psd(m) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone by clipping eigenvalues at zero."""
    m = as_sym_matrix(m)
    values, vectors = sym_eig(m)
    if values[-1] >= 0:
        return m
    clipped = np.clip(values, 0.0, None)
    out = (vectors * clipped) @ vectors.T
    return 0.5 * (out + out.T)


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh(as_sym_matrix(m))[0])


def is_psd(m, tol: float = PSD_TOL) -> bool:
    m = as_sym_matrix(m)
    return min_eigenvalue(m) >= -tol * max(1.0, float(np.linalg.norm(m)))


def cholesky_psd(m) -> tuple[np.ndarray, float]:
    """Cholesky factor of a PSD matrix with a fixed jitter ladder.

    Tries ``m + j * trace(m)/n * I`` for ``j`` in 0, 1e-12, 1e-10, 1e-8 and
    returns ``(L, jitter)`` for the first rung that factorizes, where
    ``jitter`` is the absolute amount added to the diagonal.  The zero
    matrix factors as the zero matrix.
    """
    m = as_sym_matrix(m)
    n = m.shape[0]
    fro = float(np.linalg.norm(m))
    if fro == 0.0:
        return np.zeros_like(m), 0.0
    lam_min = min_eigenvalue(m)
    if lam_min < -PSD_TOL * fro:
        raise DomainError(
            f"matrix is not positive semi-definite: smallest eigenvalue {lam_min:.6g}"
        )
    scale = abs(float(np.trace(m))) / n
    for rung in JITTER_LADDER:
        jitter = rung * scale
        try:
            factor = np.linalg.cholesky(m + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            continue
        return factor, jitter
    raise NumericFailure(
        f"Cholesky failed after jitter {JITTER_LADDER[-1] * scale:.3g}; "
        f"smallest eigenvalue {lam_min:.6g}"
    )


def mahalanobis_radius(q: float) -> float:
    """Radius of the Mahalanobis disc holding probability ``q`` of a 2D Gaussian."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {q}")
    return math.sqrt(-2.0 * math.log1p(-q))


def normal_cdf(x):
    x = np.asarray(x, dtype=float)
    out = 0.5 * np.vectorize(math.erfc)(-x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


# Acklam's rational approximation of the inverse normal CDF (relative error < 1.15e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _quantile_lower(p: float) -> float:
    # p in (0, 0.5]
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # one Newton step on Phi(x) - p; erfc keeps the lower tail accurate
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    return x - err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)


def normal_quantile(p):
    """Inverse standard normal CDF with absolute error below 1e-8.

    Acklam's rational approximation followed by one Newton step.  Upper
    half probabilities are mapped through ``-quantile(1 - p)`` so the
    function is odd around 0.5.
    """
    if np.ndim(p) > 0:
        return np.array([normal_quantile(v) for v in np.ravel(p)]).reshape(np.shape(p))
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if p > 0.5:
        return -_quantile_lower(1.0 - p)
    return _quantile_lower(p)


def marching_squares(grid, level: float) -> list[Polyline]:
    """Extract iso-lines of a regular 2D scalar field.

    ``grid[i, j]`` is the value at row ``i``, column ``j``; returned points
    are ``(x, y) = (column, row)`` in fractional grid coordinates.  A corner
    counts as inside when its value is ``>= level``.  Saddle cells are
    resolved with the average of the four corners.  Segments are chained
    into polylines; loops are flagged ``closed`` and do not repeat their
    first vertex.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 2:
        raise DomainError(f"grid must be at least 2x2, got shape {grid.shape}")
    if not math.isfinite(level):
        raise DomainError("level must be finite")
    inside = grid >= level
    # cells whose corners disagree
    tl, tr = inside[:-1, :-1], inside[:-1, 1:]
    br, bl = inside[1:, 1:], inside[1:, :-1]
    mixed = ~((tl == tr) & (tr == br) & (br == bl))

    points: dict[tuple, tuple[float, float]] = {}

    def edge_point(key):
        if key not in points:
            kind, i, j = key
            if kind == "h":  # (i, j) -> (i, j + 1)
                a, b = grid[i, j], grid[i, j + 1]
                points[key] = (j + (level - a) / (b - a), float(i))
            else:  # (i, j) -> (i + 1, j)
                a, b = grid[i, j], grid[i + 1, j]
                points[key] = (float(j), i + (level - a) / (b - a))
        return key

    segments = []
    for i, j in zip(*np.nonzero(mixed)):
        i, j = int(i), int(j)
        corners = (inside[i, j], inside[i, j + 1], inside[i + 1, j + 1], inside[i + 1, j])
        # edges in cyclic order; edge k joins corner k and corner k+1
        edges = (("h", i, j), ("v", i, j + 1), ("h", i + 1, j), ("v", i, j))
        crossed = [k for k in range(4) if corners[k] != corners[(k + 1) % 4]]
        if len(crossed) == 2:
            segments.append((edge_point(edges[crossed[0]]), edge_point(edges[crossed[1]])))
            continue
        center = 0.25 * (grid[i, j] + grid[i, j + 1] + grid[i + 1, j + 1] + grid[i + 1, j])
        isolated = center < level  # cut off the corners whose class differs from the centre
        for k in range(4):
            if corners[k] == isolated:
                # corner k lies between edge k-1 and edge k
                segments.append((edge_point(edges[(k - 1) % 4]), edge_point(edges[k])))

    return _chain(segments, points)


def _chain(segments, points) -> list[Polyline]:
    neighbours: dict[tuple, list[tuple]] = {}
    for a, b in segments:
        neighbours.setdefault(a, []).append(b)
        neighbours.setdefault(b, []).append(a)
    visited: set[tuple] = set()

    def walk(start):
        path = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [v for v in neighbours[cur] if v != prev and v not in visited]
            if not nxt:
                closed = len(path) > 2 and start in neighbours[cur] and cur != start
                return path, closed
            prev, cur = cur, nxt[0]
            path.append(cur)
            visited.add(cur)

    lines = []
    # open chains start at endpoints (boundary crossings), then the remaining loops
    for key in neighbours:
        if key not in visited and len(neighbours[key]) == 1:
            path, _ = walk(key)
            lines.append(Polyline(np.array([points[k] for k in path]), False))
    for key in neighbours:
        if key not in visited:
            path, closed = walk(key)
            lines.append(Polyline(np.array([points[k] for k in path]), closed))
    return lines
