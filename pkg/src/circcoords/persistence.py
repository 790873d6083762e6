"""Persistent cohomology over Z/p with representative 1-cocycles.

Degree 0 is handled by union-find (elder rule).  The edges that merge
components are exactly the pivots of the degree-0 coboundary matrix, so their
degree-1 columns are cleared.  Degree-1 columns are generated on demand from
the distance matrix and reduced in reverse filtration order; the reduction
matrix column of a birth edge is its representative cocycle.

Orientation: for ``u < v < w``, ``(delta a)(u, v, w) = a(v, w) - a(u, w) + a(u, v)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ParameterError, SizeError
from .rips import Filtration, restrict_to_scale

DEFAULT_PRIME = 23
ORACLE_LIMIT = 2000


def is_prime(p: int) -> bool:
    if int(p) != p or p < 2:
        return False
    p = int(p)
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def check_prime(p) -> int:
    if not is_prime(p):
        raise ParameterError(f"coefficient modulus must be prime, got {p}")
    if p > 2**16:
        raise ParameterError(f"prime {p} too large (limit 2**16)")
    return int(p)


@dataclass
class Cocycle:
    """A 1-cochain with coefficients in Z/p, supported on ``edges``."""

    edges: np.ndarray
    coeffs: np.ndarray
    scale: float
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.coeffs = np.asarray(self.coeffs, dtype=np.int64).ravel()

    def __len__(self):
        return self.coeffs.size

    def as_dict(self) -> dict:
        return {(int(u), int(v)): int(c) for (u, v), c in zip(self.edges, self.coeffs)}

    def restrict(self, edge_set) -> "Cocycle":
        keep = np.array([(int(u), int(v)) in edge_set for u, v in self.edges], dtype=bool)
        return Cocycle(self.edges[keep], self.coeffs[keep], self.scale, self.p)

    def to_json(self, ident=None) -> dict:
        return {"id": ident, "scale": self.scale,
                "entries": [{"u": int(u), "v": int(v), "coeff": int(c)}
                            for (u, v), c in zip(self.edges, self.coeffs)]}


@dataclass
class PersistencePair:
    dim: int
    birth: float
    death: float
    cocycle: Optional[Cocycle] = None
    birth_edge: Optional[int] = None
    death_simplex: Optional[tuple] = field(default=None, repr=False)

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.death)


class _CoboundaryColumns:
    """Implicit degree-1 coboundary columns, keyed by filtration order of triangles."""

    def __init__(self, filt: Filtration, p: int):
        self.filt = filt
        self.p = p
        n = filt.n
        self.n = n
        self.adj = filt.dm <= filt.max_scale
        np.fill_diagonal(self.adj, False)
        self.values = np.unique(filt.edge_values)
        self.n3 = n ** 3
        if (self.values.size + 1) * self.n3 >= 2**62:
            raise SizeError(f"{n} vertices is too many for 64-bit triangle keys")

    def column(self, idx):
        u, v = (int(x) for x in self.filt.edges[idx])
        d = self.filt.edge_values[idx]
        dm = self.filt.dm
        w = np.flatnonzero(self.adj[u] & self.adj[v])
        if w.size == 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        vals = np.maximum(np.maximum(dm[u, w], dm[v, w]), d)
        rank = np.searchsorted(self.values, vals)
        n = self.n
        below, above = w < u, w > v
        middle = ~(below | above)
        a = np.where(below, w, u)
        b = np.where(below, u, np.where(middle, w, v))
        c = np.where(above, w, v)
        keys = rank * self.n3 + (a * n + b) * n + c
        coeffs = np.where(middle, self.p - 1, 1)
        order = np.argsort(keys)
        return keys[order], coeffs[order]

    def triangle_of(self, key):
        code = int(key) % self.n3
        n = self.n
        return (code // (n * n), (code // n) % n, code % n), float(self.values[int(key) // self.n3])


def _axpy(keys, coeffs, other_keys, other_coeffs, factor, p):
    """``column + factor * other`` over Z/p, dropping zeros."""
    allk = np.concatenate([keys, other_keys])
    allc = np.concatenate([coeffs, factor * other_coeffs])
    # both inputs are sorted with unique keys: a stable sort is a linear merge
    # and every key occurs at most twice
    order = np.argsort(allk, kind="stable")
    allk, allc = allk[order], allc[order]
    dup = np.flatnonzero(allk[1:] == allk[:-1])
    allc[dup] += allc[dup + 1]
    keep = np.ones(allk.size, dtype=bool)
    keep[dup + 1] = False
    allk, allc = allk[keep], allc[keep] % p
    nz = allc != 0
    return allk[nz], allc[nz]


def _h0_pairs(filt: Filtration):
    parent = list(range(filt.n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    pairs, negative = [], np.zeros(filt.n_edges, dtype=bool)
    components = filt.n
    for idx, (u, v) in enumerate(filt.edges):
        if components == 1:
            break
        ru, rv = find(int(u)), find(int(v))
        if ru == rv:
            continue
        # elder rule: all vertices enter at 0, the larger index is younger
        young, old = max(ru, rv), min(ru, rv)
        parent[young] = old
        negative[idx] = True
        components -= 1
        death = float(filt.edge_values[idx])
        if death > 0:
            pairs.append(PersistencePair(0, 0.0, death, death_simplex=(int(u), int(v))))
    roots = sorted({find(x) for x in range(filt.n)})
    pairs.extend(PersistencePair(0, 0.0, math.inf) for _ in roots)
    return pairs, negative


def persistent_cohomology(filt: Filtration, p: int = DEFAULT_PRIME) -> List[PersistencePair]:
    """Barcode in degrees 0 and 1; every degree-1 pair carries a representative.

    A finite pair's representative is a cocycle on the subcomplex at scale
    ``death - eps`` (``eps = 1e-9 * max_scale``); an infinite pair's on the
    whole filtration.  Zero-length intervals are dropped.
    """
    p = check_prime(p)
    inverse = np.array([0] + [pow(a, -1, p) for a in range(1, p)], dtype=np.int64)
    h0, negative = _h0_pairs(filt)
    if filt.max_dim < 2:
        cols = None
    else:
        cols = _CoboundaryColumns(filt, p)
    eps = 1e-9 * filt.max_scale

    pivot_col = {}
    reduced_R = {}
    stored_V = {}
    h1 = []
    for idx in range(filt.n_edges - 1, -1, -1):
        if negative[idx]:
            continue
        if cols is None:
            keys = np.empty(0, dtype=np.int64)
            coeffs = keys
        else:
            keys, coeffs = cols.column(idx)
        V = {idx: 1}
        touched = False
        while keys.size:
            j = pivot_col.get(int(keys[0]))
            if j is None:
                break
            kj, cj = reduced_R[j] if j in reduced_R else cols.column(j)
            factor = int(coeffs[0] * inverse[cj[0]] % p)
            keys, coeffs = _axpy(keys, coeffs, kj, cj, p - factor, p)
            for e, c in stored_V[j].items():
                val = (V.get(e, 0) - factor * c) % p
                if val:
                    V[e] = val
                else:
                    V.pop(e, None)
            touched = True

        birth = float(filt.edge_values[idx])
        if keys.size:
            pivot = int(keys[0])
            pivot_col[pivot] = idx
            stored_V[idx] = V
            if touched:
                reduced_R[idx] = (keys, coeffs)
            tri, death = cols.triangle_of(pivot)
            if death <= birth:
                continue
            scale = death - eps
        else:
            tri, death, scale = None, math.inf, filt.max_scale
        support = sorted(e for e in V if filt.edge_values[e] <= scale)
        cocycle = Cocycle(filt.edges[support], [V[e] for e in support], scale, p)
        h1.append(PersistencePair(1, birth, death, cocycle, birth_edge=idx, death_simplex=tri))

    h1.sort(key=lambda pr: (pr.birth, pr.birth_edge))
    return h0 + h1


def significant_cocycles(pairs, tau: Optional[float] = 1.0, top_k: Optional[int] = None,
                         include_infinite: bool = False) -> List[PersistencePair]:
    """Degree-1 pairs with persistence above ``tau``, most persistent first."""
    if tau is not None and tau < 0:
        raise ParameterError(f"tau must be nonnegative, got {tau}")
    chosen = [pr for pr in pairs if pr.dim == 1 and (pr.is_finite or include_infinite)]
    if tau is not None:
        chosen = [pr for pr in chosen if pr.persistence > tau]
    chosen.sort(key=lambda pr: (-pr.persistence, pr.birth, pr.birth_edge if pr.birth_edge is not None else -1))
    if top_k is not None:
        chosen = chosen[:top_k]
    return chosen


def betti_from_barcode(pairs, t: float):
    b = [0, 0]
    for pr in pairs:
        if pr.birth <= t < pr.death:
            b[pr.dim] += 1
    return tuple(b)


def rank_mod_p(matrix, p: int) -> int:
    """Rank over Z/p by dense Gaussian elimination."""
    A = np.array(matrix, dtype=np.int64) % p
    if A.size == 0:
        return 0
    rows, ncols = A.shape
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        if others.size:
            A[others] = (A[others] - np.outer(A[others, c], A[r])) % p
        r += 1
    return r


def boundary_matrices(n, edges, triangles):
    """Dense boundary matrices with ``d[u, v] = v - u`` and ``d[a, b, c] = bc - ac + ab``."""
    d1 = np.zeros((n, len(edges)), dtype=np.int64)
    for k, (u, v) in enumerate(edges):
        d1[u, k] -= 1
        d1[v, k] += 1
    index = {(int(u), int(v)): k for k, (u, v) in enumerate(edges)}
    d2 = np.zeros((len(edges), len(triangles)), dtype=np.int64)
    for k, (a, b, c) in enumerate(triangles):
        d2[index[(int(b), int(c))], k] += 1
        d2[index[(int(a), int(c))], k] -= 1
        d2[index[(int(a), int(b))], k] += 1
    return d1, d2


def betti_oracle(filt: Filtration, scale: float, p: int = DEFAULT_PRIME, limit: int = ORACLE_LIMIT):
    """Betti numbers (b0, b1) of the complex at ``scale`` from ranks of boundary maps."""
    p = check_prime(p)
    sl = restrict_to_scale(filt, scale)
    tris = sl.triangles if filt.max_dim >= 2 else np.empty((0, 3), dtype=np.int64)
    size = filt.n + sl.n_edges + len(tris)
    if size > limit:
        raise SizeError(f"complex at scale {scale} has {size} simplices, oracle limit is {limit}")
    d1, d2 = boundary_matrices(filt.n, sl.edges, tris)
    r1 = rank_mod_p(d1, p)
    r2 = rank_mod_p(d2, p)
    return filt.n - r1, sl.n_edges - r1 - r2
