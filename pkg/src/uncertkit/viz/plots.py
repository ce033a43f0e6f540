"""High-level renderers: one call turns a list of distributions into a PlotDocument."""
from __future__ import annotations

import numpy as np

from ..distributions import Distribution
from ..exceptions import DomainError
from ..numerics import derive_seed, make_rng
from ..utils.validation import check_distributions
from .geometry import (
    DEFAULT_QUANTILES,
    beeswarm_offsets,
    box_stats,
    check_quantiles,
    contour_geometry,
    violin_profile,
)
from .svg import BANDS, LINES, POINTS, Panel, PlotDocument, PlotStyle, padded

__all__ = ["UNIVARIATE_KINDS", "render_contours", "render_matrix", "render_scatter", "render_univariate"]

UNIVARIATE_KINDS = ("box", "violin", "strip", "swarm")
SLOT_HALF_WIDTH = 0.4
STRIP_JITTER = 0.3
JITTER_STREAM = 1 << 63


def _labels(dists, names):
    if names is not None:
        return [str(n) for n in names]
    return [d.name if d.name is not None else f"#{i}" for i, d in enumerate(dists)]


def _require_dim(dists, dim: int, what: str):
    dists = check_distributions(dists)
    bad = [d.dim for d in dists if d.dim != dim]
    if bad:
        hint = ("use marginal() or a dimensionality reduction (uapca/uamds) first" if dim == 2
                else "use marginal() on each dimension first")
        raise DomainError(f"{what} needs {dim}D distributions, got dimension {bad[0]}; {hint}")
    return dists


def _single_panel(style: PlotStyle, dists, names) -> tuple[PlotDocument, Panel]:
    doc = PlotDocument(style)
    doc.legend = [(style.color(i), n) for i, n in enumerate(_labels(dists, names))]
    return doc, doc.add_panel(0, 0, style.width, style.height)


def _scatter_items(panel: Panel, points_per_dist, style: PlotStyle):
    for i, pts in enumerate(points_per_dist):
        panel.add(POINTS, "circle", pts, r=style.point_radius, fill=style.color(i), fill_opacity=0.7)


def render_scatter(dists, samples_per: int = 100, seed: int = 0, style: PlotStyle | None = None,
                   names=None) -> PlotDocument:
    """Scatter plot of ``samples_per`` seeded draws from each 2D distribution.

    Distribution ``i`` is sampled with seed ``seed + i`` and coloured
    ``palette[i mod len(palette)]``.
    """
    style = style or PlotStyle()
    dists = _require_dim(dists, 2, "scatter")
    doc, panel = _single_panel(style, dists, names)
    _scatter_items(panel, [d.sample(samples_per, derive_seed(seed, i)) for i, d in enumerate(dists)], style)
    return doc.finalize()


def band_opacity(k: int, n_levels: int) -> float:
    """Fill opacity of band ``k`` (0 = innermost): 0.45 inside down to 0.15 outside."""
    if n_levels == 1:
        return 0.45
    return 0.45 - 0.30 * k / (n_levels - 1)


def _contour_items(panel: Panel, geometry, color: str, bands: bool, style: PlotStyle):
    if bands:
        # band k fills between level k and the next inner level (the innermost is a full region)
        for k, rings in enumerate(geometry):
            inner = [r for r, _ in geometry[k - 1]] if k > 0 else []
            outer = [r for r, _ in rings]
            if outer:
                panel.add(BANDS, "path", outer + inner, fill=color,
                          fill_opacity=round(band_opacity(k, len(geometry)), 6), fill_rule="evenodd",
                          stroke="none")
    for rings in geometry:
        for pts, closed in rings:
            panel.add(LINES, "polygon" if closed else "polyline", pts, fill="none", stroke=color,
                      stroke_width=style.stroke_width)


def render_contours(dists, quantiles=DEFAULT_QUANTILES, bands: bool = False,
                    style: PlotStyle | None = None, seed: int = 0, names=None) -> PlotDocument:
    """Quantile isolines (or isobands with ``bands=True``) of 2D distributions.

    Positive-definite Gaussians get analytic ellipses; other distributions
    get highest-density-region contours from a density grid.
    """
    style = style or PlotStyle()
    dists = _require_dim(dists, 2, "contour plot")
    levels = check_quantiles(quantiles)
    doc, panel = _single_panel(style, dists, names)
    for i, d in enumerate(dists):
        geom = contour_geometry(d, levels, style.contour_points, style.grid_size,
                                style.threshold_draws, derive_seed(seed, i))
        _contour_items(panel, geom, style.color(i), bands, style)
    return doc.finalize()


def _slot_geometry(kind: str, dist: Distribution, slot: float, seed: int, samples: int,
                   style: PlotStyle):
    """Items for one slot as ``(layer, kind, xy, attrs)`` with xy = (slot axis, value axis)."""
    out = []
    if kind == "box":
        lo, q1, med, q3, hi = box_stats(dist, style.quantile_draws, seed)
        w = SLOT_HALF_WIDTH * 0.75
        out.append((BANDS, "polygon", [[slot - w, q1], [slot + w, q1], [slot + w, q3], [slot - w, q3]],
                    {"fill_opacity": 0.3}))
        out.append((LINES, "line", [[slot - w, med], [slot + w, med]], {}))
        out.append((LINES, "line", [[slot, q3], [slot, hi]], {}))
        out.append((LINES, "line", [[slot, q1], [slot, lo]], {}))
        for v in (lo, hi):
            out.append((LINES, "line", [[slot - w / 2, v], [slot + w / 2, v]], {}))
    elif kind == "violin":
        values, dens = violin_profile(dist)
        peak = dens.max()
        width = SLOT_HALF_WIDTH * dens / peak if peak > 0 else np.zeros_like(dens)
        ring = np.concatenate([np.column_stack([slot + width, values]),
                               np.column_stack([slot - width, values])[::-1]])
        out.append((BANDS, "polygon", ring, {"fill_opacity": 0.3}))
    elif kind in ("strip", "swarm"):
        values = dist.sample(samples, seed)[:, 0]
        if kind == "strip":
            jitter = make_rng(derive_seed(seed, JITTER_STREAM)).uniform(-STRIP_JITTER, STRIP_JITTER, samples)
            out.append((POINTS, "circle", np.column_stack([slot + jitter, values]), {}))
        else:
            out.append((POINTS, "circle", np.column_stack([np.full(samples, slot), values]),
                        {"swarm": True}))
    else:
        raise DomainError(f"unknown univariate plot kind {kind!r}; expected one of {UNIVARIATE_KINDS}")
    return out


def _add_slot_items(panel: Panel, items, color: str, style: PlotStyle, horizontal: bool):
    for layer, kind, xy, attrs in items:
        xy = np.asarray(xy, dtype=float)
        if horizontal:
            xy = xy[:, ::-1]
        attrs = dict(attrs)
        attrs.pop("swarm", None)
        if kind == "circle":
            panel.add(layer, kind, xy, r=style.point_radius, fill=color, fill_opacity=0.7)
        elif layer == BANDS:
            panel.add(layer, kind, xy, fill=color, stroke=color, stroke_width=style.stroke_width, **attrs)
        else:
            panel.add(layer, kind, xy, stroke=color, stroke_width=style.stroke_width)


def render_univariate(dists, kind: str = "box", style: PlotStyle | None = None, seed: int = 0,
                      samples: int = 100, names=None, colors=None) -> PlotDocument:
    """Box, violin, strip or swarm plot with one slot per 1D distribution.

    Slots sit side by side along the x axis; values run along y.
    ``colors`` optionally gives the palette index of each slot (default:
    the slot index).
    """
    if kind not in UNIVARIATE_KINDS:
        raise DomainError(f"unknown univariate plot kind {kind!r}; expected one of {UNIVARIATE_KINDS}")
    style = style or PlotStyle()
    dists = _require_dim(dists, 1, f"{kind} plot")
    colors = list(range(len(dists))) if colors is None else [int(c) for c in colors]
    labels = _labels(dists, names)
    doc = PlotDocument(style)
    doc.legend = [(style.color(c), n) for c, n in zip(colors, labels)]
    panel = doc.add_panel(0, 0, style.width, style.height)
    swarm = []
    for i, d in enumerate(dists):
        items = _slot_geometry(kind, d, float(i), derive_seed(seed, i), samples, style)
        if kind == "swarm":
            swarm.append((i, np.asarray(items[0][2])))
        else:
            _add_slot_items(panel, items, style.color(colors[i]), style, horizontal=False)
    if swarm:
        # lanes are placed in pixels, so the value axis must be fixed first
        values = np.concatenate([xy[:, 1] for _, xy in swarm])
        panel.ylim = padded(float(values.min()), float(values.max()), style.padding)
        for i, xy in swarm:
            offsets = beeswarm_offsets(panel.y_to_px(xy[:, 1]), style.point_radius)
            panel.add(POINTS, "circle", xy, px_offset=np.column_stack([offsets, np.zeros_like(offsets)]),
                      r=style.point_radius, fill=style.color(colors[i]), fill_opacity=0.7)
    panel.xlim = (-0.5, len(dists) - 0.5)
    return doc.finalize()


def render_matrix(dists, off_diag: str = "contour", diag: str = "violin", quantiles=DEFAULT_QUANTILES,
                  style: PlotStyle | None = None, seed: int = 0, samples: int = 200,
                  names=None, dim_names=None) -> PlotDocument:
    """Plot matrix of n-D distributions.

    Cell (r, c) with r != c shows the marginal on dimensions (c, r) (x = c,
    y = r) as contours or a scatter; diagonal cells show the 1D marginal as
    horizontal violins or overlaid density curves.  Column c and row c share
    one axis range for dimension c.
    """
    if off_diag not in ("contour", "scatter"):
        raise DomainError(f"off_diag must be 'contour' or 'scatter', got {off_diag!r}")
    if diag not in ("violin", "density"):
        raise DomainError(f"diag must be 'violin' or 'density', got {diag!r}")
    style = style or PlotStyle(width=600, height=600)
    dists = check_distributions(dists)
    n = dists[0].dim
    if n < 2:
        raise DomainError("a plot matrix needs distributions of dimension >= 2")
    levels = check_quantiles(quantiles)
    dim_names = [str(k) for k in range(n)] if dim_names is None else [str(v) for v in dim_names]
    if len(dim_names) != n:
        raise DomainError(f"{len(dim_names)} dimension names for dimension {n}")
    doc = PlotDocument(style)
    doc.legend = [(style.color(i), name) for i, name in enumerate(_labels(dists, names))]
    cw, ch = style.width / n, style.height / n
    cells = {}
    for r in range(n):
        for c in range(n):
            title = dim_names[r] if r == c else f"{dim_names[c]} / {dim_names[r]}"
            cells[r, c] = doc.add_panel(c * cw, r * ch, cw, ch, title)

    draws = None
    if off_diag == "scatter":
        draws = [d.sample(samples, derive_seed(seed, i)) for i, d in enumerate(dists)]
    for r in range(n):
        for c in range(n):
            panel = cells[r, c]
            if r == c:
                continue
            if draws is not None:
                _scatter_items(panel, [pts[:, [c, r]] for pts in draws], style)
            else:
                for i, d in enumerate(dists):
                    geom = contour_geometry(d.marginal([c, r]), levels, style.contour_points,
                                            style.grid_size, style.threshold_draws, derive_seed(seed, i))
                    _contour_items(panel, geom, style.color(i), False, style)
    for r in range(n):
        panel = cells[r, r]
        for i, d in enumerate(dists):
            m = d.marginal([r])
            if diag == "violin":
                items = _slot_geometry("violin", m, float(i), derive_seed(seed, i), samples, style)
                _add_slot_items(panel, items, style.color(i), style, horizontal=True)
            else:
                values, dens = violin_profile(m)
                panel.add(LINES, "polyline", np.column_stack([values, dens]), fill="none",
                          stroke=style.color(i), stroke_width=style.stroke_width)
        if diag == "violin":
            panel.ylim = (-0.5, len(dists) - 0.5)

    # one shared range per dimension: x of column k, y of row k
    lims = []
    for k in range(n):
        lo, hi = np.inf, -np.inf
        for j in range(n):
            for panel, axis in ((cells[j, k], 0), (cells[k, j], 1)):
                ext = panel.extent()
                if ext is None or (j == k and axis == 1):
                    continue
                lo, hi = min(lo, ext[axis][0]), max(hi, ext[axis][1])
        lims.append(padded(lo, hi, style.padding) if np.isfinite(lo) else (-0.5, 0.5))
    for (r, c), panel in cells.items():
        panel.xlim = lims[c]
        if r != c:
            panel.ylim = lims[r]
    return doc.finalize()
