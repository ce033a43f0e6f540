"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
figure, then asserts.  Run with ``pytest tests/test_acceptance.py -v``.
"""
import json
import math
import time

import numpy as np
import pytest

from uncertkit import (
    AffineMap,
    EmpiricalSamples,
    GaussianMixture,
    MultivariateNormal,
    fit_kde,
    uamds_fit,
    uamds_stress,
    uapca,
)
from uncertkit.cli import run_cli
from uncertkit.datasets import example_csv_path
from uncertkit.io import load_distributions, save_distributions
from uncertkit.numerics import mahalanobis_radius, normal_quantile
from uncertkit.transforms import UamdsParams, uamds_gradient
from uncertkit.viz import hdr_thresholds, render_contours
from uncertkit.viz.svg import LINES

from conftest import inside_polygon, random_normals, random_orthogonal, random_spd
from make_golden import GOLDEN_DIR, golden_cases
from test_estimation import grid_integral
from test_io import random_list
from test_numerics import QUANTILE_REFERENCE
from test_transforms import flat, monte_carlo_stress, pca_on_means, unflat

# sqrt(-2 ln(1 - q)) at 40 digits (mpmath)
RADIUS_REFERENCE = [
    (1e-6, 0.0014142139159266771183),
    (0.01, 0.14177683769573534534),
    (0.05, 0.32029141227185763042),
    (0.25, 0.75852761644093213258),
    (0.5, 1.177410022515474691),
    (0.75, 1.6651092223153955127),
    (0.9, 2.1459660262893473431),
    (0.95, 2.4477468306808161835),
    (0.99, 3.0348542587702924091),
    (0.999, 3.716922188849838208),
]


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_01_uapca_matches_pca_on_means(report):
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(20):
        dists = random_normals(rng, 10, 8, zero_cov=True)
        result, _ = uapca(dists, 2)
        got = np.array([g.mean for g in result.distributions])
        expected = pca_on_means(np.array([g.mean for g in dists]), 2)
        worst = max(worst, np.abs(got - expected).max(),
                    max(np.abs(g.cov).max() for g in result.distributions))
    report(1, worst <= 1e-9, f"UAPCA vs PCA-on-means oracle, max abs error {worst:.2e} (tol 1e-9)")


def test_02_uapca_invariances(report):
    rng = np.random.default_rng(102)
    worst_t = worst_r = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 7))
        dists = random_normals(rng, int(rng.integers(3, 8)), n)
        base, _ = uapca(dists, 2)
        shift = rng.standard_normal(n) * 10
        moved, _ = uapca([g.affine(AffineMap(np.eye(n), shift)) for g in dists], 2)
        for a, b in zip(base.distributions, moved.distributions):
            worst_t = max(worst_t, np.abs(a.mean - b.mean).max(), np.abs(a.cov - b.cov).max())
        R = random_orthogonal(rng, n)
        rotated, _ = uapca([g.affine(AffineMap(R, np.zeros(n))) for g in dists], 2)
        # the sign convention may flip axes; compare up to a per-axis sign
        A = np.array([g.mean for g in base.distributions])
        B = np.array([g.mean for g in rotated.distributions])
        s = np.where(np.sum(A * B, axis=0) < 0, -1.0, 1.0)
        for a, b in zip(base.distributions, rotated.distributions):
            worst_r = max(worst_r, np.abs(a.mean - s * b.mean).max(),
                          np.abs(a.cov - np.outer(s, s) * b.cov).max())
    ok = worst_t <= 1e-10 and worst_r <= 1e-8
    report(2, ok, f"translation error {worst_t:.2e} (tol 1e-10), rotation error {worst_r:.2e} (tol 1e-8)")


def test_03_stress_matches_monte_carlo(report):
    rng = np.random.default_rng(103)
    start = time.perf_counter()
    worst = 0.0
    for k in range(5):
        dists = random_normals(rng, 3, 4, mean_scale=2.0)
        maps = [AffineMap(rng.standard_normal((2, 4)) * 0.7, rng.standard_normal(2)) for _ in dists]
        exact = uamds_stress(dists, maps)
        mc = monte_carlo_stress(dists, maps, 1_000_000, seed=1000 + k)
        worst = max(worst, abs(exact - mc) / exact)
    elapsed = time.perf_counter() - start
    ok = worst <= 0.02 and elapsed < 60
    report(3, ok, f"closed-form vs 1e6-draw MC stress, max rel error {worst:.2e} (tol 2e-2), {elapsed:.1f} s")


def test_04_gradient_matches_finite_differences(report):
    rng = np.random.default_rng(104)
    h = 1e-5
    worst = 0.0
    for _ in range(10):
        N, n, d = int(rng.integers(2, 5)), int(rng.integers(2, 5)), 2
        dists = random_normals(rng, N, n)
        maps = [AffineMap(rng.standard_normal((d, n)), rng.standard_normal(d)) for _ in range(N)]
        _, gP, gt = uamds_gradient(dists, maps)
        analytic = np.concatenate([gP.ravel(), gt.ravel()])
        x = flat(maps)
        fd = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            fd[i] = (uamds_stress(dists, unflat(x + e, N, d, n))
                     - uamds_stress(dists, unflat(x - e, N, d, n))) / (2 * h)
        worst = max(worst, np.linalg.norm(analytic - fd) / np.linalg.norm(fd))
    report(4, worst <= 1e-5, f"analytic vs central differences (h=1e-5), max rel error {worst:.2e} (tol 1e-5)")


def test_05_uamds_convergence(report):
    rng = np.random.default_rng(105)
    monotone = True
    for k in range(6):
        dists = random_normals(rng, int(rng.integers(3, 6)), int(rng.integers(3, 6)))
        init = "uapca" if k % 2 else "random"
        res = uamds_fit(dists, 2, UamdsParams(max_iter=300, init=init, seed=k))
        monotone &= bool(np.all(np.diff(res.stress_trace) <= 0))
    side = [np.array([0.0, 0, 0]), np.array([1.0, 0, 0]), np.array([0.5, math.sqrt(3) / 2, 0])]
    tri = [MultivariateNormal(m, np.zeros((3, 3))) for m in side]
    start = time.perf_counter()
    res = uamds_fit(tri, 2, UamdsParams(max_iter=2000, init="random", seed=3))
    elapsed = time.perf_counter() - start
    monotone &= bool(np.all(np.diff(res.stress_trace) <= 0))
    ok = monotone and res.stress <= 1e-6 and res.n_iter <= 2000 and elapsed < 10
    report(5, ok, f"traces non-increasing: {monotone}; equilateral stress {res.stress:.2e} "
                  f"after {res.n_iter} iterations in {elapsed:.2f} s (tol 1e-6, 2000, 10 s)")


def test_06_distribution_and_kde(report):
    rng = np.random.default_rng(106)
    integrals = [grid_integral(fit_kde(rng.standard_normal((50, n)) * [2.0, 0.5][:n] + 1)) for n in (1, 2)]
    int_err = max(abs(v - 1) for v in integrals)

    push_err = 0.0
    for _ in range(10):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
        g = MultivariateNormal(rng.standard_normal(n), random_spd(rng, n))
        mix = GaussianMixture([0.3, 0.7], [g, MultivariateNormal(rng.standard_normal(n), random_spd(rng, n))])
        emp = EmpiricalSamples(rng.standard_normal((7, n)))
        for dist in (g, mix, emp):
            mu, cov = dist.moments()
            mu2, cov2 = dist.affine(AffineMap(A, b)).moments()
            push_err = max(push_err, np.abs(mu2 - (A @ mu + b)).max(), np.abs(cov2 - A @ cov @ A.T).max())

    count = 100_000
    g = MultivariateNormal([1.0, -2.0, 0.5], random_spd(rng, 3) * 2)
    x = g.sample(count, 7)
    sd = np.sqrt(np.diag(g.cov))
    mean_ok = np.all(np.abs(x.mean(axis=0) - g.mean) <= 3 * sd / math.sqrt(count))
    cov_se = np.sqrt((np.outer(np.diag(g.cov), np.diag(g.cov)) + g.cov ** 2) / count)
    cov_ok = np.all(np.abs(np.cov(x.T) - g.cov) <= 3 * cov_se)

    ok = int_err <= 1e-2 and push_err <= 1e-10 and mean_ok and cov_ok
    report(6, ok, f"KDE integral error {int_err:.2e} (tol 1e-2), push-forward error {push_err:.2e} "
                  f"(tol 1e-10), sample moments within 3 standard errors: {bool(mean_ok and cov_ok)}")


def test_07_contour_coverage(report):
    rng = np.random.default_rng(107)
    gaussians = [MultivariateNormal([0, 0], np.eye(2))]
    gaussians += [MultivariateNormal(rng.standard_normal(2) * 3, random_spd(rng, 2) * 2) for _ in range(3)]
    worst_cov = worst_thr = 0.0
    for k, g in enumerate(gaussians):
        doc = render_contours([g], [0.5, 0.9])
        rings = [it.xy for it in doc.panels[0].items if it.layer == LINES]
        draws = g.sample(100_000, 500 + k)
        for q, ring in zip((0.5, 0.9), rings):
            worst_cov = max(worst_cov, abs(np.mean(inside_polygon(draws, ring)) - q))
        for q, t in zip((0.5, 0.9), hdr_thresholds(g, [0.5, 0.9], 10_000, k)):
            expected = (1 - q) / (2 * math.pi * math.sqrt(np.linalg.det(g.cov)))
            worst_thr = max(worst_thr, abs(t - expected) / expected)
    ok = worst_cov <= 0.01 and worst_thr <= 0.05
    report(7, ok, f"isoline containment error {worst_cov:.4f} (tol 0.01), "
                  f"HDR threshold rel error {worst_thr:.3f} (tol 0.05)")


def _pipeline_outputs(directory):
    cfg = {
        "seed": 11,
        "input": {"path": str(example_csv_path()), "format": "csv", "group_by": "group"},
        "fit": {"method": "gaussian", "output": "fit.json"},
        "transform": {"method": "uamds", "dims": 2, "max_iter": 500, "output": "embedding.json"},
        "plots": [{"kind": k, "output": f"{k}.svg"} for k in ("scatter", "contour", "isoband", "swarm")],
    }
    (directory / "config.json").write_text(json.dumps(cfg))
    code = run_cli(["pipeline", "--config", str(directory / "config.json")])
    return code, {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_08_determinism(report, tmp_path, monkeypatch):
    monkeypatch.delenv("UNCERTKIT_SEED", raising=False)
    runs = []
    for k in range(2):
        (tmp_path / str(k)).mkdir()
        runs.append(_pipeline_outputs(tmp_path / str(k)))
    identical = runs[0][0] == runs[1][0] == 0 and runs[0][1] == runs[1][1] and len(runs[0][1]) == 7
    cases = golden_cases()
    golden_ok = [name for name, text in cases.items()
                 if (GOLDEN_DIR / f"{name}.svg").read_text(encoding="utf-8") == text]
    ok = identical and len(golden_ok) == len(cases) >= 6
    report(8, ok, f"repeated pipeline runs byte-identical: {identical}; "
                  f"golden files matching: {len(golden_ok)}/{len(cases)}")


def test_09_round_trip(report, tmp_path):
    rng = np.random.default_rng(109)
    exact = 0
    for k in range(100):
        dists = random_list(rng)
        path = tmp_path / f"{k}.json"
        save_distributions(dists, path)
        exact += load_distributions(path) == dists
    report(9, exact == 100, f"exact round trips {exact}/100")


def test_10_quantiles(report):
    q_err = max(abs(normal_quantile(p) - ref) for p, ref in QUANTILE_REFERENCE)
    r_err = max(abs(mahalanobis_radius(q) - ref) / ref for q, ref in RADIUS_REFERENCE)
    ok = len(QUANTILE_REFERENCE) == 20 and q_err <= 1e-8 and r_err <= 4 * np.finfo(float).eps
    report(10, ok, f"normal_quantile max abs error {q_err:.2e} (tol 1e-8), "
                   f"mahalanobis_radius max rel error {r_err:.2e} (tol 4 ulp)")
