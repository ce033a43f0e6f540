import numpy as np
import pytest

from uncertkit import MultivariateNormal


def random_spd(rng, n, ridge=0.1):
    a = rng.standard_normal((n, n))
    return a @ a.T / n + ridge * np.eye(n)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_normals(rng, count, n, mean_scale=3.0, zero_cov=False):
    return [
        MultivariateNormal(mean_scale * rng.standard_normal(n),
                           np.zeros((n, n)) if zero_cov else random_spd(rng, n))
        for _ in range(count)
    ]


def inside_polygon(points, poly):
    """Even-odd ray casting; independent of any plotting code."""
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    x1, y1 = poly[:, 0][None, :], poly[:, 1][None, :]
    x2, y2 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    crosses = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return np.sum(crosses & (x < xint), axis=1) % 2 == 1


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
