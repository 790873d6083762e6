"""Integer lifts of Z/p cocycles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LiftError
from .persistence import Cocycle


@dataclass
class IntegerCocycle:
    edges: np.ndarray
    coeffs: np.ndarray
    scale: float

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.coeffs = np.asarray(self.coeffs, dtype=np.int64).ravel()

    def as_dict(self) -> dict:
        return {(int(u), int(v)): int(c) for (u, v), c in zip(self.edges, self.coeffs)}

    def on_edges(self, edges) -> np.ndarray:
        """Coefficient vector aligned with ``edges`` (zero off the support)."""
        table = self.as_dict()
        return np.array([table.get((int(u), int(v)), 0) for u, v in edges], dtype=float)

    def to_json(self, ident=None) -> dict:
        return {"id": ident, "scale": self.scale,
                "entries": [{"u": int(u), "v": int(v), "coeff": int(c)}
                            for (u, v), c in zip(self.edges, self.coeffs)]}


def symmetric_residue(c, p: int):
    """The representative of ``c mod p`` in ``(-p/2, p/2)``."""
    r = np.mod(c, p)
    return np.where(r > p // 2, r - p, r)


def lift(cocycle: Cocycle, p: int = None) -> IntegerCocycle:
    p = cocycle.p if p is None else p
    coeffs = symmetric_residue(cocycle.coeffs, p)
    keep = coeffs != 0
    return IntegerCocycle(cocycle.edges[keep], coeffs[keep], cocycle.scale)


def triangle_defects(edges, coeffs, n, triangles) -> np.ndarray:
    """``a(v, w) - a(u, w) + a(u, v)`` on each triangle ``u < v < w``."""
    A = np.zeros((n, n))
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    A[edges[:, 0], edges[:, 1]] = coeffs
    A[edges[:, 1], edges[:, 0]] = -np.asarray(coeffs, dtype=float)
    t = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    u, v, w = t[:, 0], t[:, 1], t[:, 2]
    return A[v, w] - A[u, w] + A[u, v]


def verify_integer_cocycle(ic: IntegerCocycle, sl, max_report: int = 10) -> bool:
    """Check the cocycle identity over Z on every triangle of the slice ``sl``."""
    if len(ic.coeffs):
        adj = sl.adjacency
        missing = ~adj[ic.edges[:, 0], ic.edges[:, 1]]
        if np.any(missing):
            bad = [tuple(int(x) for x in e) for e in ic.edges[missing][:max_report]]
            raise LiftError(f"cocycle uses edges outside the complex at scale {sl.scale:.6g}: {bad}")
    tris = sl.triangles
    if len(tris) == 0 or len(ic.coeffs) == 0:
        return True
    defects = triangle_defects(ic.edges, ic.coeffs, sl.n, tris)
    bad = np.flatnonzero(defects != 0)
    if bad.size:
        report = [tuple(int(x) for x in tris[k]) for k in bad[:max_report]]
        raise LiftError(
            f"integer lift fails the cocycle condition on {bad.size} triangles at scale {sl.scale:.6g} "
            f"(first: {report}); lower the working scale or use a different prime", report)
    return True
