"""Vietoris-Rips filtration up to dimension 2.

Simplices are ordered by (value, dimension, lexicographic vertices).  Edges
are materialised eagerly; triangles only on request, since the cohomology
reduction generates coboundaries straight from the distance matrix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .datasets import PointCloud
from .errors import ParameterError, SizeError

DEFAULT_MEMORY_CAP = 4 * 2**30
# bytes per stored triangle (three int64 vertices plus a float64 value)
_TRIANGLE_BYTES = 32


def distance_matrix(cloud, metric: str = "euclidean") -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(np.asarray(cloud, dtype=float))
    if metric != "euclidean":
        raise ParameterError(f"unsupported metric {metric!r}")
    if pts.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(pts))


def check_distance_matrix(dm) -> np.ndarray:
    dm = np.asarray(dm, dtype=float)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1]:
        raise ParameterError(f"distance matrix must be square, got {dm.shape}")
    if not np.all(np.isfinite(dm)) or np.any(dm < 0):
        raise ParameterError("distance matrix must be finite and nonnegative")
    if np.any(np.diag(dm) != 0) or not np.allclose(dm, dm.T, rtol=0, atol=1e-12):
        raise ParameterError("distance matrix must be symmetric with zero diagonal")
    return dm


def enclosing_radius(dm) -> float:
    """Smallest scale at which some vertex is adjacent to every other vertex."""
    dm = np.asarray(dm, dtype=float)
    return float(np.min(np.max(dm, axis=1)))


class Simplex(NamedTuple):
    vertices: tuple
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _triangles_below(dm, scale, edge_mask=None):
    """All ``u < v < w`` whose three edges are at most ``scale``, with their values."""
    adj = dm <= scale if edge_mask is None else edge_mask
    n = dm.shape[0]
    tris, vals = [], []
    for u in range(n - 2):
        nb = np.flatnonzero(adj[u, u + 1:]) + u + 1
        if nb.size < 2:
            continue
        sub = adj[np.ix_(nb, nb)]
        i, j = np.nonzero(np.triu(sub, 1))
        if i.size == 0:
            continue
        v, w = nb[i], nb[j]
        tris.append(np.column_stack([np.full(v.size, u), v, w]))
        vals.append(np.maximum(np.maximum(dm[u, v], dm[u, w]), dm[v, w]))
    if not tris:
        return np.empty((0, 3), dtype=np.int64), np.empty(0)
    return np.concatenate(tris).astype(np.int64), np.concatenate(vals)


def count_triangles(dm, scale) -> int:
    adj = (np.asarray(dm) <= scale).astype(float)
    np.fill_diagonal(adj, 0.0)
    return int(round(np.sum((adj @ adj) * adj) / 6.0))


@dataclass
class Filtration:
    """Rips filtration of a distance matrix truncated at ``max_scale``."""

    dm: np.ndarray
    max_scale: float
    max_dim: int = 2
    edges: np.ndarray = field(init=False, repr=False)
    edge_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        iu, ju = np.triu_indices(n, 1)
        vals = self.dm[iu, ju]
        keep = vals <= self.max_scale
        iu, ju, vals = iu[keep], ju[keep], vals[keep]
        order = np.lexsort((ju, iu, vals))
        self.edges = np.column_stack([iu[order], ju[order]]).astype(np.int64)
        self.edge_values = vals[order]

    @property
    def n(self) -> int:
        return self.dm.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @cached_property
    def edge_index(self) -> dict:
        return {(int(u), int(v)): k for k, (u, v) in enumerate(self.edges)}

    @cached_property
    def _triangle_data(self):
        if self.max_dim < 2:
            return np.empty((0, 3), dtype=np.int64), np.empty(0)
        tris, vals = _triangles_below(self.dm, self.max_scale)
        order = np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0], vals))
        return tris[order], vals[order]

    @property
    def triangles(self) -> np.ndarray:
        return self._triangle_data[0]

    @property
    def triangle_values(self) -> np.ndarray:
        return self._triangle_data[1]

    def __len__(self):
        return self.n + self.n_edges + len(self.triangles)

    def simplices(self) -> Iterator[Simplex]:
        """All simplices in filtration order."""
        rows = [(0.0, 0, (v,)) for v in range(self.n)]
        rows += [(float(x), 1, (int(u), int(v))) for (u, v), x in zip(self.edges, self.edge_values)]
        rows += [(float(x), 2, tuple(int(a) for a in t)) for t, x in zip(self.triangles, self.triangle_values)]
        rows.sort()
        for value, _, verts in rows:
            yield Simplex(verts, value)

    def dump_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["dim", "v0", "v1", "v2", "value"])
            for s in self.simplices():
                verts = list(s.vertices) + [""] * (3 - len(s.vertices))
                out.writerow([s.dim, *verts, repr(s.value)])


def build_rips(dm, max_scale: Optional[float] = None, max_dim: int = 2,
               memory_cap: int = DEFAULT_MEMORY_CAP) -> Filtration:
    """Rips filtration of ``dm`` with all simplices of value at most ``max_scale``.

    ``max_scale`` defaults to the enclosing radius.  Raises ``SizeError`` when
    the triangles at ``max_scale`` would need more than ``memory_cap`` bytes.
    """
    dm = check_distance_matrix(dm)
    if max_scale is None:
        max_scale = enclosing_radius(dm)
        if max_scale <= 0:
            max_scale = 1.0
    if not max_scale > 0:
        raise ParameterError(f"max_scale must be positive, got {max_scale}")
    if max_dim not in (0, 1, 2):
        raise ParameterError("max_dim must be 0, 1 or 2")
    if max_dim == 2:
        n_tri = count_triangles(dm, max_scale)
        n_edge = int(np.count_nonzero(np.triu(dm <= max_scale, 1)))
        need = n_tri * _TRIANGLE_BYTES
        if need > memory_cap:
            raise SizeError(
                f"Rips complex at scale {max_scale:.6g} has {dm.shape[0]} vertices, {n_edge} edges and "
                f"{n_tri} triangles (~{need / 2**20:.0f} MiB), above the cap of {memory_cap / 2**20:.0f} MiB")
    return Filtration(dm, float(max_scale), max_dim)


@dataclass
class ComplexSlice:
    """The subcomplex of a filtration with all values at most ``scale``."""

    n: int
    scale: float
    edge_ids: np.ndarray
    edges: np.ndarray
    edge_values: np.ndarray
    dm: np.ndarray = field(repr=False)

    @cached_property
    def triangles(self) -> np.ndarray:
        return _triangles_below(self.dm, self.scale, self.adjacency)[0]

    @cached_property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        adj[self.edges[:, 0], self.edges[:, 1]] = True
        adj[self.edges[:, 1], self.edges[:, 0]] = True
        return adj

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


def restrict_to_scale(filt: Filtration, t: float) -> ComplexSlice:
    if t < 0:
        raise ParameterError(f"scale must be nonnegative, got {t}")
    t = min(float(t), filt.max_scale)
    k = int(np.searchsorted(filt.edge_values, t, side="right"))
    ids = np.arange(k)
    return ComplexSlice(filt.n, t, ids, filt.edges[:k], filt.edge_values[:k], filt.dm)
