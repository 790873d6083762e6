"""Embedding quality: coranking matrices, block sharpness and a PCA baseline."""
from __future__ import annotations

import warnings

import numpy as np

from .datasets import PointCloud
from .errors import ParameterError
from .rips import distance_matrix


def _points(x):
    return x.points if isinstance(x, PointCloud) else np.atleast_2d(np.asarray(x, dtype=float))


def neighbor_ranks(dm) -> np.ndarray:
    """``R[i, j]`` = rank of ``j`` among the neighbours of ``i`` (1-based, self = 0).

    Ties are broken by ascending point index.
    """
    D = np.array(dm, dtype=float)
    n = D.shape[0]
    np.fill_diagonal(D, -np.inf)
    order = np.argsort(D, axis=1, kind="stable")
    ranks = np.empty((n, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(n), (n, n)), axis=1)
    return ranks


def coranking_from_distances(d_high, d_low) -> np.ndarray:
    d_high = np.asarray(d_high)
    d_low = np.asarray(d_low)
    if d_high.shape != d_low.shape or d_high.shape[0] != d_high.shape[1]:
        raise ParameterError(f"distance matrices must be square and equal-sized, got {d_high.shape} and {d_low.shape}")
    n = d_high.shape[0]
    if n < 3:
        raise ParameterError("coranking needs at least 3 points")
    rh = neighbor_ranks(d_high)
    rl = neighbor_ranks(d_low)
    off = ~np.eye(n, dtype=bool)
    flat = (rh[off] - 1) * (n - 1) + (rl[off] - 1)
    return np.bincount(flat, minlength=(n - 1) ** 2).reshape(n - 1, n - 1)


def coranking(high, low) -> np.ndarray:
    """Coranking matrix ``Q[rho - 1, r - 1]`` of a high- and a low-dimensional representation."""
    hp, lp = _points(high), _points(low)
    if hp.shape[0] != lp.shape[0]:
        raise ParameterError(f"representations have {hp.shape[0]} and {lp.shape[0]} points")
    return coranking_from_distances(distance_matrix(hp), distance_matrix(lp))


def block_sharpness(Q, labels) -> float:
    """Share of coranking mass inside the diagonal rank blocks induced by ``labels``.

    Block edges sit at the distinct within-cluster neighbour counts
    ``|cluster| - 1``: a point's first ``|cluster| - 1`` neighbours are its
    cluster mates when the clustering is preserved.
    """
    Q = np.asarray(Q, dtype=float)
    labels = np.asarray(labels)
    m = Q.shape[0]
    if labels.size != m + 1:
        raise ParameterError(f"need {m + 1} labels, got {labels.size}")
    _, sizes = np.unique(labels, return_counts=True)
    cuts = sorted({int(s) - 1 for s in sizes if 0 < s - 1 < m})
    edges = [0] + cuts + [m]
    inside = sum(Q[a:b, a:b].sum() for a, b in zip(edges[:-1], edges[1:]))
    total = Q.sum()
    return float(inside / total) if total else 0.0


def pca(cloud, k: int, return_components: bool = False):
    """Project the centred cloud on its top ``k`` principal axes.

    Each axis is signed so its largest-magnitude entry is positive.  When
    ``d > n`` the eigenproblem is solved on the Gram matrix instead.
    """
    X = _points(cloud)
    n, d = X.shape
    if n < 2:
        raise ParameterError("PCA needs at least 2 points")
    if not 1 <= k <= d:
        raise ParameterError(f"k must lie in [1, {d}], got {k}")
    Xc = X - X.mean(axis=0)
    if d <= n:
        evals, evecs = np.linalg.eigh(Xc.T @ Xc / (n - 1))
        order = np.argsort(evals)[::-1]
        evals, comps = evals[order], evecs[:, order]
    else:
        gvals, gvecs = np.linalg.eigh(Xc @ Xc.T)
        order = np.argsort(gvals)[::-1]
        gvals, gvecs = np.clip(gvals[order], 0, None), gvecs[:, order]
        keep = gvals > gvals[0] * 1e-12 if gvals[0] > 0 else np.zeros_like(gvals, dtype=bool)
        comps = np.zeros((d, n))
        comps[:, keep] = Xc.T @ gvecs[:, keep] / np.sqrt(gvals[keep])
        evals = gvals / (n - 1)
    tol = max(evals[0], 0) * max(n, d) * np.finfo(float).eps
    rank = int(np.count_nonzero(evals > tol))
    W = np.zeros((d, k))
    usable = min(k, rank)
    if usable < k:
        warnings.warn(f"data has rank {rank} < {k}; padding with zero components", RuntimeWarning)
    W[:, :usable] = comps[:, :usable]
    for j in range(usable):
        big = np.argmax(np.abs(W[:, j]))
        if W[big, j] < 0:
            W[:, j] = -W[:, j]
    Y = PointCloud(Xc @ W)
    if return_components:
        return Y, W, np.clip(evals[:k], 0, None)
    return Y
