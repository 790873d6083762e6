"""Cohomologous smoothing of an integer 1-cocycle.

Given an edge cochain ``alpha`` we look for a vertex function ``f`` that
minimises ``(1 - lam) * P_p(alpha + delta f) + lam * P_q(alpha + delta f)``
where ``P_1`` is the L1 norm and ``P_2`` the (by default squared) L2 norm.
Edges are oriented ``u < v`` and ``(delta f)(u, v) = f(u) - f(v)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .errors import DivergenceError, ParameterError, UnsupportedConfigError


@dataclass(frozen=True)
class PenaltyConfig:
    lam: float = 1.0
    p: int = 1
    q: int = 2
    l2_squared: bool = True

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.p < 1 or self.q < 1:
            raise ParameterError("penalty exponents must be >= 1")
        if self.p not in (1, 2) or self.q not in (1, 2):
            raise UnsupportedConfigError(f"only exponents 1 and 2 are supported, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 1e-4
    steps: int = 1000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    init: str = "zeros"
    sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError("learning rate must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ParameterError("steps must be a positive integer")
        if self.init not in ("zeros", "gaussian"):
            raise ParameterError(f"unknown init {self.init!r}")


def _edges(edges):
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def coboundary_matrix(edges, n: int) -> sparse.csr_matrix:
    e = _edges(edges)
    m = e.shape[0]
    rows = np.repeat(np.arange(m), 2)
    cols = e.ravel()
    vals = np.tile([1.0, -1.0], m)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(m, n))


def coboundary_apply(f, edges) -> np.ndarray:
    e = _edges(edges)
    f = np.asarray(f, dtype=float)
    return f[e[:, 0]] - f[e[:, 1]]


def coboundary_transpose(g, edges, n: int) -> np.ndarray:
    e = _edges(edges)
    g = np.asarray(g, dtype=float)
    return np.bincount(e[:, 0], g, minlength=n) - np.bincount(e[:, 1], g, minlength=n)


def smoothed_cocycle(alpha, f, edges) -> np.ndarray:
    return np.asarray(alpha, dtype=float) + coboundary_apply(f, edges)


def _term(x, exponent, squared):
    if exponent == 1:
        return np.sum(np.abs(x)), np.sign(x)
    if squared:
        return np.sum(x * x), 2.0 * x
    norm = np.sqrt(np.sum(x * x))
    return norm, (x / norm if norm > 0 else np.zeros_like(x))


def penalty(abar, pc: PenaltyConfig):
    """Penalty value of an edge vector and its (sub)gradient, with sign(0) = 0."""
    abar = np.asarray(abar, dtype=float)
    vp, gp = _term(abar, pc.p, pc.l2_squared)
    vq, gq = _term(abar, pc.q, pc.l2_squared)
    return (1.0 - pc.lam) * vp + pc.lam * vq, (1.0 - pc.lam) * gp + pc.lam * gq


def objective(alpha, f, edges, pc: PenaltyConfig) -> float:
    return float(penalty(smoothed_cocycle(alpha, f, edges), pc)[0])


def objective_and_gradient(alpha, f, edges, n, pc: PenaltyConfig):
    value, g = penalty(smoothed_cocycle(alpha, f, edges), pc)
    return float(value), coboundary_transpose(g, edges, n)


def smooth_l2_exact(alpha, edges, n: int) -> np.ndarray:
    """Harmonic representative: solves ``L f = -delta^T alpha``.

    The gauge is fixed by ``f = 0`` at the smallest vertex of every connected
    component of the edge graph.
    """
    e = _edges(edges)
    alpha = np.asarray(alpha, dtype=float)
    f = np.zeros(n)
    if e.shape[0] == 0:
        return f
    B = coboundary_matrix(e, n)
    L = (B.T @ B).tocsc()
    rhs = -(B.T @ alpha)
    graph = sparse.csr_matrix((np.ones(e.shape[0]), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    _, gauge = np.unique(labels, return_index=True)
    free = np.setdiff1d(np.arange(n), gauge)
    if free.size:
        sol = spsolve(L[free][:, free].tocsc(), rhs[free])
        f[free] = np.atleast_1d(sol)
    return f


def smooth_generalized(alpha, edges, n: int, pc: PenaltyConfig = PenaltyConfig(),
                       oc: OptimizerConfig = OptimizerConfig()):
    """Adam on the penalised objective; returns the final ``f`` and the objective trace.

    ``trace[k]`` is the objective after ``k`` updates, so the trace has
    ``steps + 1`` entries.
    """
    e = _edges(edges)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (e.shape[0],):
        raise ParameterError(f"alpha has shape {alpha.shape}, expected ({e.shape[0]},)")
    if oc.init == "zeros":
        f = np.zeros(n)
    else:
        f = np.random.Generator(np.random.PCG64(oc.seed)).normal(0.0, oc.sigma, n)
    m = np.zeros(n)
    v = np.zeros(n)
    trace = np.empty(oc.steps + 1)
    b1t = b2t = 1.0
    for step in range(oc.steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            value, grad = objective_and_gradient(alpha, f, e, n, pc)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise DivergenceError(f"objective became non-finite at step {step}", step)
        trace[step] = value
        if step == oc.steps:
            break
        b1t *= oc.beta1
        b2t *= oc.beta2
        m = oc.beta1 * m + (1.0 - oc.beta1) * grad
        v = oc.beta2 * v + (1.0 - oc.beta2) * grad * grad
        f = f - oc.learning_rate * (m / (1.0 - b1t)) / (np.sqrt(v / (1.0 - b2t)) + oc.eps)
    return f, trace
