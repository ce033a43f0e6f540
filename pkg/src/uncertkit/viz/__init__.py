from .geometry import (
    DEFAULT_QUANTILES,
    beeswarm_offsets,
    box_stats,
    contour_geometry,
    gaussian_isoline,
    hdr_contours,
    hdr_thresholds,
    violin_profile,
)
from .plots import UNIVARIATE_KINDS, render_contours, render_matrix, render_scatter, render_univariate
from .svg import PALETTE, Panel, PlotDocument, PlotStyle, nice_ticks

__all__ = [
    "DEFAULT_QUANTILES",
    "PALETTE",
    "Panel",
    "PlotDocument",
    "PlotStyle",
    "UNIVARIATE_KINDS",
    "beeswarm_offsets",
    "box_stats",
    "contour_geometry",
    "gaussian_isoline",
    "hdr_contours",
    "hdr_thresholds",
    "nice_ticks",
    "render_contours",
    "render_matrix",
    "render_scatter",
    "render_univariate",
    "violin_profile",
]
