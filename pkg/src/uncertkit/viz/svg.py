"""Minimal deterministic SVG scene: panels with data-space items, serialized in fixed layer order."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from ..exceptions import DomainError

# tab10 followed by two extra hues; order is part of the output contract
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
)

AXES, BANDS, LINES, POINTS, LABELS = range(5)


def fmt(x) -> str:
    """Format a number with 6 significant digits; ``-0`` prints as ``0``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot render non-finite coordinate {x}")
    s = format(x, ".6g")
    return "0" if s in ("-0", "0") else s


@dataclass(frozen=True)
class PlotStyle:
    width: float = 480
    height: float = 360
    padding: float = 0.05
    palette: tuple = PALETTE
    point_radius: float = 2.0
    stroke_width: float = 1.0
    font_size: float = 10.0
    margin: tuple = (40.0, 10.0, 20.0, 26.0)  # left, right, top, bottom in px
    contour_points: int = 128
    grid_size: int = 256
    threshold_draws: int = 10000
    quantile_draws: int = 10000

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DomainError("plot width and height must be positive")
        if not self.palette:
            raise DomainError("palette must not be empty")

    def color(self, i: int) -> str:
        return self.palette[i % len(self.palette)]


@dataclass
class Item:
    layer: int
    kind: str
    xy: object  # (m, 2) array, or list of rings for "path"
    attrs: dict
    text: str | None = None
    px_offset: np.ndarray | None = None


class Panel:
    """A rectangular plot area mapping data coordinates to pixels."""

    def __init__(self, rect, title: str | None = None):
        self.rect = tuple(float(v) for v in rect)  # x, y, width, height of the plot area
        self.title = title
        self.xlim: tuple[float, float] | None = None
        self.ylim: tuple[float, float] | None = None
        self.items: list[Item] = []
        self.axes = True

    def add(self, layer, kind, xy, text=None, px_offset=None, **attrs):
        if kind == "path":
            xy = [np.asarray(r, dtype=float) for r in xy]
        else:
            xy = np.atleast_2d(np.asarray(xy, dtype=float))
        self.items.append(Item(layer, kind, xy, attrs, text, px_offset))

    def extent(self):
        """Data-space bounding box ``((xmin, xmax), (ymin, ymax))`` of all items, or None."""
        arrays = []
        for it in self.items:
            if it.kind == "text":
                continue
            arrays.extend(it.xy if it.kind == "path" else [it.xy])
        arrays = [a for a in arrays if a.size]
        if not arrays:
            return None
        pts = np.concatenate(arrays)
        return (pts[:, 0].min(), pts[:, 0].max()), (pts[:, 1].min(), pts[:, 1].max())

    def to_px(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        x0, y0, w, h = self.rect
        (a, b), (c, d) = self.xlim, self.ylim
        px = x0 + (xy[:, 0] - a) / (b - a) * w
        py = y0 + h - (xy[:, 1] - c) / (d - c) * h
        return np.column_stack([px, py])

    def y_to_px(self, y) -> np.ndarray:
        x0, y0, w, h = self.rect
        c, d = self.ylim
        return y0 + h - (np.asarray(y, dtype=float) - c) / (d - c) * h


def padded(lo: float, hi: float, frac: float) -> tuple[float, float]:
    span = hi - lo
    if span <= 0:
        return lo - 0.5, hi + 0.5
    return lo - frac * span, hi + frac * span


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Ticks at multiples of a 1-2-5 x 10^k step, count closest to ``target``."""
    span = hi - lo
    if not span > 0:
        return [lo]
    mag = 10.0 ** math.floor(math.log10(span / target))
    best = None
    for m in (1.0, 2.0, 5.0, 10.0):
        step = m * mag
        count = math.floor(hi / step) - math.ceil(lo / step) + 1
        score = abs(count - target)
        if best is None or score < best[0]:
            best = (score, step)
    step = best[1]
    digits = max(0, -math.floor(math.log10(step)))
    return [round(k * step, digits) for k in range(math.ceil(lo / step), math.floor(hi / step) + 1)]


def _tick_label(v: float) -> str:
    return format(v, ".6g") if v != 0 else "0"


@dataclass
class Element:
    layer: int
    tag: str
    attrs: list
    text: str | None = None

    def render(self) -> str:
        parts = [self.tag]
        for k, v in self.attrs:
            parts.append(f"{k}={quoteattr(fmt(v) if isinstance(v, (int, float, np.floating)) else str(v))}")
        head = " ".join(parts)
        if self.text is None:
            return f"<{head}/>"
        return f"<{head}>{escape(self.text)}</{self.tag}>"


def _points_attr(px: np.ndarray) -> str:
    return " ".join(f"{fmt(x)},{fmt(y)}" for x, y in px)


@dataclass
class PlotDocument:
    """An SVG scene; build with panels, then :meth:`to_svg`."""

    style: PlotStyle
    panels: list[Panel] = field(default_factory=list)
    legend: list[tuple[str, str]] = field(default_factory=list)
    elements: list[Element] = field(default_factory=list)
    _final: bool = False

    @property
    def width(self):
        return self.style.width

    @property
    def height(self):
        return self.style.height

    def add_panel(self, x, y, w, h, title=None) -> Panel:
        """Add a panel occupying the cell (x, y, w, h); margins come from the style."""
        ml, mr, mt, mb = self.style.margin
        panel = Panel((x + ml, y + mt, max(w - ml - mr, 1.0), max(h - mt - mb, 1.0)), title)
        self.panels.append(panel)
        return panel

    def finalize(self):
        if self._final:
            return self
        s = self.style
        self.elements.append(Element(AXES, "rect", [("x", 0), ("y", 0), ("width", s.width),
                                                    ("height", s.height), ("fill", "#ffffff")]))
        for panel in self.panels:
            ext = panel.extent()
            if panel.xlim is None:
                panel.xlim = padded(*(ext[0] if ext else (0.0, 1.0)), s.padding)
            if panel.ylim is None:
                panel.ylim = padded(*(ext[1] if ext else (0.0, 1.0)), s.padding)
            self._emit_axes(panel)
            for it in panel.items:
                self._emit_item(panel, it)
        self.elements.sort(key=lambda e: e.layer)  # stable: insertion order within a layer
        self._final = True
        return self

    def _emit_axes(self, panel: Panel):
        s = self.style
        x0, y0, w, h = panel.rect
        axis_color = "#444444"
        if panel.title:
            self.elements.append(Element(LABELS, "text", [
                ("x", x0 + w / 2), ("y", y0 - 6), ("font-size", s.font_size),
                ("text-anchor", "middle"), ("font-family", "sans-serif")], panel.title))
        if not panel.axes:
            return
        self.elements.append(Element(AXES, "rect", [
            ("x", x0), ("y", y0), ("width", w), ("height", h), ("fill", "none"),
            ("stroke", axis_color), ("stroke-width", s.stroke_width)]))
        for v in nice_ticks(*panel.xlim):
            px = panel.to_px([[v, panel.ylim[0]]])[0, 0]
            self.elements.append(Element(AXES, "line", [
                ("x1", px), ("y1", y0 + h), ("x2", px), ("y2", y0 + h + 4),
                ("stroke", axis_color), ("stroke-width", s.stroke_width)]))
            self.elements.append(Element(LABELS, "text", [
                ("x", px), ("y", y0 + h + 6 + s.font_size), ("font-size", s.font_size),
                ("text-anchor", "middle"), ("font-family", "sans-serif")], _tick_label(v)))
        for v in nice_ticks(*panel.ylim):
            py = float(panel.y_to_px(v))
            self.elements.append(Element(AXES, "line", [
                ("x1", x0 - 4), ("y1", py), ("x2", x0), ("y2", py),
                ("stroke", axis_color), ("stroke-width", s.stroke_width)]))
            self.elements.append(Element(LABELS, "text", [
                ("x", x0 - 6), ("y", py + s.font_size / 3), ("font-size", s.font_size),
                ("text-anchor", "end"), ("font-family", "sans-serif")], _tick_label(v)))

    def _emit_item(self, panel: Panel, it: Item):
        attrs = list(it.attrs.items())
        attrs = [(k.replace("_", "-"), v) for k, v in attrs]
        if it.kind == "path":
            rings = []
            for ring in it.xy:
                px = panel.to_px(ring)
                rings.append("M" + " L".join(f"{fmt(x)},{fmt(y)}" for x, y in px) + " Z")
            self.elements.append(Element(it.layer, "path", [("d", " ".join(rings))] + attrs))
            return
        px = panel.to_px(it.xy)
        if it.px_offset is not None:
            px = px + it.px_offset
        if it.kind == "circle":
            r = it.attrs.get("r", self.style.point_radius)
            rest = [(k, v) for k, v in attrs if k != "r"]
            for x, y in px:
                self.elements.append(Element(it.layer, "circle", [("cx", x), ("cy", y), ("r", r)] + rest))
        elif it.kind in ("polyline", "polygon"):
            self.elements.append(Element(it.layer, it.kind, [("points", _points_attr(px))] + attrs))
        elif it.kind == "line":
            self.elements.append(Element(it.layer, "line", [
                ("x1", px[0, 0]), ("y1", px[0, 1]), ("x2", px[1, 0]), ("y2", px[1, 1])] + attrs))
        elif it.kind == "text":
            self.elements.append(Element(it.layer, "text", [("x", px[0, 0]), ("y", px[0, 1])] + attrs, it.text))
        else:
            raise DomainError(f"unknown item kind {it.kind!r}")

    def to_svg(self) -> str:
        self.finalize()
        w, h = fmt(self.width), fmt(self.height)
        lines = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">',
        ]
        if self.legend:
            lines.append("<!-- legend")
            for color, name in self.legend:
                lines.append(f"  {color} {name.replace('--', '- -')}")
            lines.append("-->")
        lines.extend(e.render() for e in self.elements)
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    def save(self, path):
        from ..io import write_text_atomic

        write_text_atomic(path, self.to_svg())

    def count(self, tag: str) -> int:
        self.finalize()
        return sum(1 for e in self.elements if e.tag == tag)
