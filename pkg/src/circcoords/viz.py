"""Self-contained SVG figures, each with a CSV twin holding the plotted data.

Every emitter returns a :class:`Figure`; ``Figure.write`` saves the SVG and
the CSV.  Data glyphs carry the class ``glyph`` so their count can be checked
against the CSV rows.
"""
from __future__ import annotations

import colorsys
import csv
import io
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import ParameterError

KINDS = ("colored_scatter", "correlation", "coordinate_plot", "barcode", "density")
SVG_NS = "http://www.w3.org/2000/svg"


@dataclass(frozen=True)
class PlotSpec:
    kind: str = "colored_scatter"
    width: int = 420
    height: int = 420
    margin: int = 36
    point_radius: float = 3.0
    color_scheme: str = "hsv"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown plot kind {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if self.width <= 0 or self.height <= 0 or self.margin < 0 or self.point_radius <= 0:
            raise ParameterError("plot dimensions must be positive")
        if 2 * self.margin >= min(self.width, self.height):
            raise ParameterError("margins leave no room for the plot")


@dataclass
class Figure:
    svg: str
    header: List[str]
    rows: List[list] = field(default_factory=list)

    def csv_text(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(self.header)
        out.writerows(self.rows)
        return buf.getvalue()

    def write(self, svg_path=None, csv_path=None):
        if svg_path is not None:
            with open(svg_path, "w") as fh:
                fh.write(self.svg)
        if csv_path is not None:
            with open(csv_path, "w", newline="") as fh:
                fh.write(self.csv_text())
        return self


def hue_degrees(theta) -> np.ndarray:
    return 360.0 * np.asarray(theta, dtype=float)


def hue_color(theta: float) -> str:
    r, g, b = colorsys.hsv_to_rgb(float(theta) % 1.0, 1.0, 1.0)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Canvas:
    """Maps a data rectangle onto the plotting area of a spec."""

    def __init__(self, spec: PlotSpec, xlim, ylim, title=""):
        self.spec = spec
        self.xlim = xlim
        self.ylim = ylim
        self.root = ET.Element("svg", {
            "xmlns": SVG_NS, "version": "1.1",
            "width": str(spec.width), "height": str(spec.height),
            "viewBox": f"0 0 {spec.width} {spec.height}"})
        ET.SubElement(self.root, "rect", {"x": "0", "y": "0", "width": str(spec.width),
                                          "height": str(spec.height), "fill": "white"})
        m = spec.margin
        self.frame = ET.SubElement(self.root, "rect", {
            "class": "frame", "x": str(m), "y": str(m), "width": str(spec.width - 2 * m),
            "height": str(spec.height - 2 * m), "fill": "none", "stroke": "#444"})
        if title:
            t = ET.SubElement(self.root, "text", {"x": str(spec.width / 2), "y": str(m / 2 + 5),
                                                  "text-anchor": "middle", "font-size": "13",
                                                  "font-family": "sans-serif"})
            t.text = title
        self._axis_labels()

    def _axis_labels(self):
        s = self.spec
        for value, x in ((self.xlim[0], s.margin), (self.xlim[1], s.width - s.margin)):
            t = ET.SubElement(self.root, "text", {"x": _fmt(x), "y": _fmt(s.height - s.margin + 14),
                                                  "text-anchor": "middle", "font-size": "10",
                                                  "font-family": "sans-serif"})
            t.text = f"{value:.3g}"
        for value, y in ((self.ylim[0], s.height - s.margin), (self.ylim[1], s.margin)):
            t = ET.SubElement(self.root, "text", {"x": _fmt(s.margin - 4), "y": _fmt(y + 3),
                                                  "text-anchor": "end", "font-size": "10",
                                                  "font-family": "sans-serif"})
            t.text = f"{value:.3g}"

    def px(self, x):
        (a, b), s = self.xlim, self.spec
        return s.margin + (np.asarray(x, dtype=float) - a) / (b - a) * (s.width - 2 * s.margin)

    def py(self, y):
        (a, b), s = self.ylim, self.spec
        return s.height - s.margin - (np.asarray(y, dtype=float) - a) / (b - a) * (s.height - 2 * s.margin)

    def group(self, cls, parent=None, **attrs):
        return ET.SubElement(self.root if parent is None else parent, "g", {"class": cls, **attrs})

    def tostring(self) -> str:
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(self.root, encoding="unicode") + "\n"


def _limits(values, pad=0.05):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def _square_limits(xy, pad=0.05):
    (x0, x1), (y0, y1) = _limits(xy[:, 0], pad), _limits(xy[:, 1], pad)
    half = max(x1 - x0, y1 - y0) / 2
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    return (cx - half, cx + half), (cy - half, cy + half)


def _circle(parent, x, y, r, fill, cls="glyph"):
    ET.SubElement(parent, "circle", {"class": cls, "cx": _fmt(x), "cy": _fmt(y), "r": _fmt(r),
                                     "fill": fill, "stroke": "#222", "stroke-width": "0.3"})


def emit_colored_scatter(points, theta, edges=None, constant=None, spec: Optional[PlotSpec] = None,
                         title: str = "") -> Figure:
    """Points (first two coordinates) coloured by hue ``360 * theta``; constant edges drawn as strokes."""
    spec = spec or PlotSpec("colored_scatter")
    xy = np.atleast_2d(np.asarray(points, dtype=float))[:, :2]
    theta = np.asarray(theta, dtype=float).ravel()
    if xy.shape[0] != theta.size:
        raise ParameterError(f"{xy.shape[0]} points but {theta.size} coordinate values")
    canvas = _Canvas(spec, *_square_limits(xy), title=title)
    X, Y = canvas.px(xy[:, 0]), canvas.py(xy[:, 1])
    if edges is not None and constant is not None:
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        flags = np.asarray(constant, dtype=bool)
        if flags.size != e.shape[0]:
            raise ParameterError("need one constant flag per edge")
        g = canvas.group("constant-edges", stroke="#000", **{"stroke-width": "0.6", "stroke-opacity": "0.5"})
        for u, v in e[flags]:
            ET.SubElement(g, "line", {"class": "constant-edge", "x1": _fmt(X[u]), "y1": _fmt(Y[u]),
                                      "x2": _fmt(X[v]), "y2": _fmt(Y[v])})
    g = canvas.group("points")
    hues = hue_degrees(theta)
    rows = []
    for i in range(theta.size):
        _circle(g, X[i], Y[i], spec.point_radius, hue_color(theta[i]))
        rows.append([repr(float(xy[i, 0])), repr(float(xy[i, 1])), repr(float(theta[i])), repr(float(hues[i]))])
    return Figure(canvas.tostring(), ["x", "y", "theta", "hue_degrees"], rows)


def emit_correlation(angles, theta, spec: Optional[PlotSpec] = None, title: str = "") -> Figure:
    """Circular coordinate (vertical) against the data angle in ``[0, 2 pi)`` (horizontal)."""
    spec = spec or PlotSpec("correlation")
    angles = np.asarray(angles, dtype=float).ravel()
    theta = np.asarray(theta, dtype=float).ravel()
    if angles.size != theta.size:
        raise ParameterError("angles and coordinates differ in length")
    canvas = _Canvas(spec, (0.0, 2 * math.pi), (0.0, 1.0), title=title)
    g = canvas.group("points")
    X, Y = canvas.px(angles), canvas.py(theta)
    rows = []
    for i in range(theta.size):
        _circle(g, X[i], Y[i], spec.point_radius * 0.8, hue_color(theta[i]))
        rows.append([repr(float(angles[i])), repr(float(theta[i]))])
    return Figure(canvas.tostring(), ["angle", "theta"], rows)


def emit_coordinate_plot(theta1, theta2, spec: Optional[PlotSpec] = None, title: str = "") -> Figure:
    """Two circle coordinates on the unit square with opposite sides identified.

    Glyphs that overlap a side are repeated, clipped, on the opposite side.
    """
    spec = spec or PlotSpec("coordinate_plot")
    t1 = np.asarray(theta1, dtype=float).ravel()
    t2 = np.asarray(theta2, dtype=float).ravel()
    if t1.size != t2.size:
        raise ParameterError("coordinate columns differ in length")
    canvas = _Canvas(spec, (0.0, 1.0), (0.0, 1.0), title=title)
    m = spec.margin
    defs = ET.SubElement(canvas.root, "defs")
    clip = ET.SubElement(defs, "clipPath", {"id": "torus-box"})
    ET.SubElement(clip, "rect", {"x": str(m), "y": str(m), "width": str(spec.width - 2 * m),
                                 "height": str(spec.height - 2 * m)})
    g = canvas.group("points", **{"clip-path": "url(#torus-box)"})
    r = spec.point_radius
    rx = r / (spec.width - 2 * m)
    ry = r / (spec.height - 2 * m)
    rows = []
    for a, b in zip(t1, t2):
        color = hue_color(a)
        _circle(g, canvas.px(a), canvas.py(b), r, color)
        xs = [a] + ([a + 1] if a < rx else []) + ([a - 1] if a > 1 - rx else [])
        ys = [b] + ([b + 1] if b < ry else []) + ([b - 1] if b > 1 - ry else [])
        for x in xs:
            for y in ys:
                if (x, y) != (a, b):
                    _circle(g, canvas.px(x), canvas.py(y), r, color, cls="wrap")
        rows.append([repr(float(a)), repr(float(b))])
    return Figure(canvas.tostring(), ["theta_1", "theta_2"], rows)


def emit_barcode(pairs, spec: Optional[PlotSpec] = None, title: str = "") -> Figure:
    """Horizontal persistence bars; degree-1 bars highlighted, infinite bars end in an arrow."""
    spec = spec or PlotSpec("barcode")
    pairs = sorted(pairs, key=lambda pr: (pr.dim, pr.birth, pr.death))
    finite = [v for pr in pairs for v in (pr.birth, pr.death) if math.isfinite(v)]
    hi = max(finite) if finite else 1.0
    hi = hi if hi > 0 else 1.0
    xmax = hi * 1.1
    canvas = _Canvas(spec, (0.0, xmax), (0.0, max(len(pairs), 1)), title=title)
    defs = ET.SubElement(canvas.root, "defs")
    marker = ET.SubElement(defs, "marker", {"id": "arrow", "markerWidth": "8", "markerHeight": "8",
                                            "refX": "6", "refY": "4", "orient": "auto"})
    ET.SubElement(marker, "path", {"d": "M0,0 L8,4 L0,8 z", "fill": "#444"})
    g = canvas.group("bars")
    rows = []
    for k, pr in enumerate(pairs):
        y = canvas.py(len(pairs) - k - 0.5)
        end = pr.death if math.isfinite(pr.death) else xmax
        attrs = {"class": "glyph bar dim%d" % pr.dim, "x1": _fmt(canvas.px(pr.birth)), "y1": _fmt(y),
                 "x2": _fmt(canvas.px(end)), "y2": _fmt(y),
                 "stroke": "#d62728" if pr.dim == 1 else "#7f7f7f",
                 "stroke-width": "2.5" if pr.dim == 1 else "1.2"}
        if not math.isfinite(pr.death):
            attrs["marker-end"] = "url(#arrow)"
        ET.SubElement(g, "line", attrs)
        rows.append([pr.dim, repr(float(pr.birth)), "inf" if not math.isfinite(pr.death) else repr(float(pr.death))])
    return Figure(canvas.tostring(), ["dim", "birth", "death"], rows)


def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        return 0.0
    sd = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return float(0.9 * spread * x.size ** -0.2)


def circular_kde(samples, grid: int = 256, bandwidth: Optional[float] = None):
    """Wrapped Gaussian kernel density of samples on ``[0, 1)``, on ``grid`` points."""
    x = np.mod(np.asarray(samples, dtype=float).ravel(), 1.0)
    if x.size == 0:
        raise ParameterError("no samples")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0:
        h = 1.0 / grid
    g = np.arange(grid) / grid
    wraps = np.arange(-(int(math.ceil(4 * h)) + 1), int(math.ceil(4 * h)) + 2)
    diff = g[:, None, None] - x[None, :, None] - wraps[None, None, :]
    dens = np.exp(-0.5 * (diff / h) ** 2).sum(axis=(1, 2)) / (x.size * h * math.sqrt(2 * math.pi))
    return g, dens


def emit_density(columns: Sequence, combined=None, spec: Optional[PlotSpec] = None, title: str = "") -> Figure:
    """Circular density curves of each coordinate column plus the combined column (thick black)."""
    spec = spec or PlotSpec("density")
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if not cols:
        raise ParameterError("need at least one coordinate column")
    curves = [circular_kde(c) for c in cols]
    if combined is not None:
        curves.append(circular_kde(combined))
    grid = curves[0][0]
    top = max(float(np.max(d)) for _, d in curves) * 1.05
    canvas = _Canvas(spec, (0.0, 1.0), (0.0, top), title=title)
    g = canvas.group("curves", fill="none")
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
    for k, (x, d) in enumerate(curves):
        is_combined = combined is not None and k == len(curves) - 1
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(canvas.px(x), canvas.py(d)))
        ET.SubElement(g, "polyline", {"class": "glyph curve" + (" combined" if is_combined else ""),
                                      "points": pts,
                                      "stroke": "#000" if is_combined else palette[k % len(palette)],
                                      "stroke-width": "2.5" if is_combined else "1.2"})
    header = ["grid"] + [f"density_{k + 1}" for k in range(len(cols))] + (["combined"] if combined is not None else [])
    rows = [[repr(float(grid[i]))] + [repr(float(d[i])) for _, d in curves] for i in range(grid.size)]
    return Figure(canvas.tostring(), header, rows)
