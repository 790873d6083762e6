"""Synthetic manifolds, sampling schemes and point-cloud file I/O.

All generators draw from ``numpy.random.Generator(PCG64(seed))`` so a
(parameters, seed) pair always yields byte-identical output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import FormatError, ParameterError, SamplingError

PARAMETER_UNIFORM = "parameter_uniform"
VOLUME_UNIFORM = "volume_uniform"
SCHEMES = (PARAMETER_UNIFORM, VOLUME_UNIFORM)
SHAPES = ("ring", "double_ring", "dupin", "figure8_2d", "two_circles_3d")

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"point cloud must be a non-empty 2-D array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("point cloud contains NaN or Inf")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SamplerSpec:
    """Declarative description of a synthetic sample.

    ``params`` holds the shape parameters by name, e.g. ``{"R": 1.5, "w": 1.5}``
    for a ring or ``{"r": 2, "R": 1.5}`` for the Dupin cyclide.
    """

    shape: str
    n: int
    scheme: str = PARAMETER_UNIFORM
    seed: int = 0
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown sampling scheme {self.scheme!r}")
        if int(self.n) < 1:
            raise ParameterError("n must be >= 1")

    def generate(self) -> PointCloud:
        p = dict(self.params)
        if self.shape == "ring":
            return generate_ring(p.get("R", 1.5), p.get("w", 1.5), self.n, self.scheme, self.seed)
        if self.shape == "double_ring":
            return generate_double_ring(p.get("R", 1.5), p.get("w", 0.5), self.n, self.scheme, self.seed,
                                        offset=p.get("offset", 2.0))
        if self.shape == "dupin":
            return generate_dupin(p.get("r", 2.0), p.get("R", 1.5), self.n, self.scheme, self.seed)
        if self.shape == "figure8_2d":
            return generate_figure8_2d(self.n)
        return generate_two_circles_3d(self.n)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_scheme(scheme):
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown sampling scheme {scheme!r}; expected one of {SCHEMES}")


def _check_n(n, minimum=1):
    if int(n) != n or n < minimum:
        raise ParameterError(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def rejection_sample(
    domain: Sequence[Sequence[float]],
    param_map: Callable[[np.ndarray], np.ndarray],
    area_element: Callable[[np.ndarray], np.ndarray],
    n: int,
    seed=0,
    sup: Optional[float] = None,
    grid: int = 512,
    inflate: float = 1.05,
    batch: int = 4096,
    min_rate: float = 1e-6,
    attempt_cap: int = 10_000_000,
) -> PointCloud:
    """Sample ``param_map`` proportionally to ``area_element``.

    Parameters are drawn uniformly from the rectangle ``domain`` (a list of
    ``(lo, hi)`` per parameter) and kept iff ``u * sup <= area_element``
    with ``u ~ U(0, 1)``.  When ``sup`` is not given it is estimated on a
    ``grid``-point-per-axis lattice and inflated by ``inflate``.

    Both callables take an ``(m, k)`` array of parameter rows.
    """
    n = _check_n(n)
    lo = np.array([a for a, _ in domain], dtype=float)
    hi = np.array([b for _, b in domain], dtype=float)
    if np.any(hi < lo):
        raise ParameterError("domain bounds must satisfy lo <= hi")
    if sup is None:
        axes = [np.linspace(a, b, grid) for a, b in zip(lo, hi)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        sup = float(np.max(area_element(mesh))) * inflate
    if not np.isfinite(sup) or sup <= 0:
        raise SamplingError(f"area element supremum must be finite and positive, got {sup}")

    rng = _rng(seed)
    accepted = []
    n_acc = 0
    attempts = 0
    while n_acc < n:
        params = lo + (hi - lo) * rng.random((batch, lo.size))
        u = rng.random(batch)
        keep = params[u * sup <= area_element(params)]
        accepted.append(keep)
        n_acc += keep.shape[0]
        attempts += batch
        if attempts >= attempt_cap and n_acc / attempts < min_rate:
            raise SamplingError(
                f"acceptance rate {n_acc / attempts:.3g} below {min_rate} after {attempts} attempts")
    params = np.concatenate(accepted)[:n]
    return PointCloud(param_map(params))


# -- ring / annulus ---------------------------------------------------------

def _ring_map(R, w):
    def f(params):
        rad = R + params[:, 0] * w
        return np.column_stack([rad * np.cos(params[:, 1]), rad * np.sin(params[:, 1])])
    return f


def generate_ring(R: float, w: float, n: int, scheme: str = PARAMETER_UNIFORM, seed=0) -> PointCloud:
    """Annulus of inner radius ``R`` and width ``w`` in the plane."""
    if not R > 0 or not w >= 0:
        raise ParameterError(f"ring needs R > 0 and w >= 0, got R={R}, w={w}")
    n = _check_n(n)
    _check_scheme(scheme)
    f = _ring_map(R, w)
    if scheme == PARAMETER_UNIFORM:
        rng = _rng(seed)
        r = rng.random(n)
        theta = TWO_PI * rng.random(n)
        return PointCloud(f(np.column_stack([r, theta])))
    # Jacobian of (r, theta) -> annulus is w * (R + r w); normalise by its maximum.
    return rejection_sample([(0.0, 1.0), (0.0, TWO_PI)], f, lambda p: R + p[:, 0] * w, n, seed, sup=R + w)


def generate_double_ring(R: float, w: float, n: int, scheme: str = PARAMETER_UNIFORM, seed=0,
                         offset: float = 2.0) -> PointCloud:
    """Two rings centred at ``(-offset, 0)`` and ``(offset, 0)``, ``n // 2`` points each."""
    n = _check_n(n, 2)
    if n % 2:
        raise ParameterError(f"double ring needs an even n, got {n}")
    s_left, s_right = np.random.SeedSequence(seed).spawn(2)
    left = generate_ring(R, w, n // 2, scheme, s_left).points + [-offset, 0.0]
    right = generate_ring(R, w, n // 2, scheme, s_right).points + [offset, 0.0]
    return PointCloud(np.vstack([left, right]))


# -- Dupin cyclide (pinched torus) -------------------------------------------

def dupin_map(r: float, R: float):
    def f(params):
        x, y = params[:, 0], params[:, 1]
        s = np.sin(x / 2.0)
        rad = (r + s * np.cos(y)) * R
        return np.column_stack([rad * np.cos(x), rad * np.sin(x), R * s * np.sin(y)])
    return f


def numeric_area_element(param_map, h: float = 1e-5):
    """Area element |X_x cross X_y| of a surface patch by central differences."""
    def dA(params):
        params = np.asarray(params, dtype=float)
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        px = (param_map(params + ex) - param_map(params - ex)) / (2 * h)
        py = (param_map(params + ey) - param_map(params - ey)) / (2 * h)
        return np.linalg.norm(np.cross(px, py), axis=1)
    return dA


def generate_dupin(r: float = 2.0, R: float = 1.5, n: int = 300, scheme: str = PARAMETER_UNIFORM,
                   seed=0) -> PointCloud:
    if not r > 1 or not R > 0:
        raise ParameterError(f"pinched torus needs r > 1 and R > 0, got r={r}, R={R}")
    n = _check_n(n)
    _check_scheme(scheme)
    f = dupin_map(r, R)
    domain = [(0.0, TWO_PI), (0.0, TWO_PI)]
    if scheme == PARAMETER_UNIFORM:
        rng = _rng(seed)
        return PointCloud(f(TWO_PI * rng.random((n, 2))))
    return rejection_sample(domain, f, numeric_area_element(f), n, seed)


# -- equidistant figure-eights -------------------------------------------------

def _split(n):
    n = _check_n(n, 8)
    first = (n + 1) // 2
    return first, n - first


def generate_figure8_2d(n: int = 50) -> PointCloud:
    """Two unit circles tangent at the origin, centres ``(-1, 0)`` and ``(1, 0)``.

    The second circle is shifted by half an angular step so the tangency
    point is sampled only once.
    """
    m1, m2 = _split(n)
    a = TWO_PI * np.arange(m1) / m1
    b = np.pi + TWO_PI * (np.arange(m2) + 0.5) / m2
    first = np.column_stack([-1.0 + np.cos(a), np.sin(a)])
    second = np.column_stack([1.0 + np.cos(b), np.sin(b)])
    return PointCloud(np.vstack([first, second]))


def generate_two_circles_3d(n: int = 150) -> PointCloud:
    """Unit circle in the plane z=0 plus the unit circle x=0 centred at (y, z) = (-1, -1).

    The two circles meet orthogonally at ``(0, -1, 0)``.
    """
    m1, m2 = _split(n)
    a = TWO_PI * np.arange(m1) / m1
    b = TWO_PI * (np.arange(m2) + 0.5) / m2
    first = np.column_stack([np.cos(a), np.sin(a), np.zeros(m1)])
    second = np.column_stack([np.zeros(m2), -1.0 + np.cos(b), -1.0 + np.sin(b)])
    return PointCloud(np.vstack([first, second]))


def angle_of(points, center=(0.0, 0.0)) -> np.ndarray:
    """Quadrant-aware polar angle in ``[0, 2*pi)`` of the first two coordinates."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xy = pts[:, :2] - np.asarray(center, dtype=float)
    if np.any(np.all(xy == 0.0, axis=1)):
        raise ParameterError("angle is undefined at the origin")
    ang = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative angles
    ang[ang >= TWO_PI] = 0.0
    return ang


# -- file I/O -----------------------------------------------------------------

def _parse_cell(cell: str, value_map):
    token = cell.strip()
    if value_map is not None and token in value_map:
        return float(value_map[token])
    return float(token)


def _is_number(cell, value_map):
    try:
        _parse_cell(cell, value_map)
        return True
    except ValueError:
        return False


def load_matrix(path, drop_first_columns: int = 0, value_map: Optional[Mapping[str, float]] = None,
                delimiter: str = ",") -> PointCloud:
    """Read a rectangular CSV into a point cloud, one row per point.

    A single header row is detected when the first row holds a cell that is
    neither numeric nor a ``value_map`` key.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{path}: row {i} has {len(row)} cells, expected {width}")
    # leading columns (ids, labels) are dropped before any parsing
    if drop_first_columns < 0 or drop_first_columns >= width:
        raise ParameterError(f"cannot drop {drop_first_columns} of {width} columns")
    rows = [r[drop_first_columns:] for r in rows]
    if not all(_is_number(c, value_map) for c in rows[0]):
        rows = rows[1:]
        if not rows:
            raise FormatError(f"{path}: header row but no data")
    data = np.empty((len(rows), width - drop_first_columns))
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            try:
                data[i, j] = _parse_cell(cell, value_map)
            except ValueError:
                raise FormatError(f"{path}: non-numeric cell {cell!r} at row {i}, "
                                  f"column {j + drop_first_columns}") from None
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: non-finite values")
    return PointCloud(data)


def save_point_cloud(path, cloud, header: Optional[Sequence[str]] = None):
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    np.savetxt(path, pts, fmt="%.17g", delimiter=",",
               header=",".join(header) if header else "", comments="")
