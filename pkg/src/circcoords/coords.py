"""Circle-valued coordinates from smoothed vertex functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .datasets import PointCloud
from .errors import ParameterError

CONSTANT_EDGE_EPS = 1e-4


def extract_coords(f) -> np.ndarray:
    """``f mod 1`` in ``[0, 1)``."""
    theta = np.mod(np.asarray(f, dtype=float), 1.0)
    # -1e-17 mod 1 rounds to 1.0
    theta[theta >= 1.0] = 0.0
    return theta


@dataclass
class CircularCoordinates:
    theta: np.ndarray
    cocycle_ids: list = field(default_factory=list)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.ndim == 1:
            self.theta = self.theta[:, None]
        if np.any(self.theta < 0) or np.any(self.theta >= 1):
            raise ParameterError("circular coordinates must lie in [0, 1)")
        if not self.cocycle_ids:
            self.cocycle_ids = list(range(self.theta.shape[1]))

    @property
    def k(self) -> int:
        return self.theta.shape[1]

    @classmethod
    def from_functions(cls, fs: Sequence, cocycle_ids=None):
        return cls(np.column_stack([extract_coords(f) for f in fs]), list(cocycle_ids or []))


@dataclass
class EdgeClassification:
    alpha_bar: np.ndarray
    constant: np.ndarray
    eps: float
    component_counts: dict = field(default_factory=dict)

    @property
    def n_constant(self) -> int:
        return int(np.count_nonzero(self.constant))

    @property
    def n_nonconstant(self) -> int:
        return int(self.constant.size - self.n_constant)


def classify_edges(alpha_bar, eps: float = CONSTANT_EDGE_EPS, edges=None, n=None) -> EdgeClassification:
    """Flag edges with ``|alpha_bar| < eps``.

    When ``edges`` and ``n`` are given, constant-edge counts are also reported
    per connected component of the edge graph (keyed by smallest vertex).
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    abar = np.asarray(alpha_bar, dtype=float)
    constant = np.abs(abar) < eps
    counts = {}
    if edges is not None and n is not None:
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        g = csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        _, labels = connected_components(g, directed=False)
        _, first = np.unique(labels, return_index=True)
        for comp, root in enumerate(first):
            on = labels[e[:, 0]] == comp
            if on.any():
                counts[int(root)] = int(np.count_nonzero(constant & on))
    return EdgeClassification(abar, constant, eps, counts)


def combine_coords(cc) -> np.ndarray:
    theta = cc.theta if isinstance(cc, CircularCoordinates) else np.atleast_2d(np.asarray(cc, dtype=float))
    if theta.shape[1] < 1:
        raise ParameterError("need at least one coordinate column")
    return extract_coords(theta.sum(axis=1))


def torus_embed(cc) -> PointCloud:
    """Send each circle coordinate to ``(cos 2 pi t, sin 2 pi t)``; columns are concatenated."""
    theta = cc.theta if isinstance(cc, CircularCoordinates) else np.asarray(cc, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    ang = 2.0 * np.pi * theta
    out = np.empty((theta.shape[0], 2 * theta.shape[1]))
    out[:, 0::2] = np.cos(ang)
    out[:, 1::2] = np.sin(ang)
    return PointCloud(out)
