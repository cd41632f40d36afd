"""Normalized-Laplacian spectral gap and Cheeger-number bounds."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, diags
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .graph import BipartiteGraph, GraphError, largest_component

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_VERTICES = 24


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


def adjacency(g: BipartiteGraph, weighted: bool = True):
    """Symmetric adjacency over users ``0..U-1`` then communities ``U..U+C-1``."""
    n = g.n_users + g.n_communities
    w = g.edge_weight.astype(float) if weighted else np.ones(g.n_edges)
    rows = np.concatenate([g.edge_user, g.n_users + g.edge_community])
    cols = np.concatenate([g.n_users + g.edge_community, g.edge_user])
    return coo_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n)).tocsr()


def _connected(g: BipartiteGraph) -> BipartiteGraph:
    sub, dropped = largest_component(g)
    if dropped:
        logger.warning(
            "graph is disconnected; using largest component (%d of %d vertices)",
            sub.n_users + sub.n_communities, g.n_users + g.n_communities,
        )
    return sub


def lambda2(g: BipartiteGraph, tolerance: float = 1e-8, weighted: bool = True,
            max_iter: int | None = None) -> float:
    """Second-smallest eigenvalue of ``I - D^-1/2 A D^-1/2``.

    Works on the largest connected component. The trivial eigenvector
    ``D^1/2 1`` is deflated by shifting it to the bottom of the spectrum of
    ``D^-1/2 A D^-1/2``, whose top remaining eigenvalue is then ``1 - lambda2``.
    """
    g = _connected(g)
    A = adjacency(g, weighted)
    deg = np.asarray(A.sum(axis=1)).ravel()
    n = len(deg)
    if n < 2:
        raise GraphError("need at least 2 vertices")
    inv_sqrt = diags(1.0 / np.sqrt(deg))
    N = (inv_sqrt @ A @ inv_sqrt).tocsr()
    v0 = np.sqrt(deg)
    v0 /= np.linalg.norm(v0)

    def matvec(x):
        x = np.asarray(x).ravel()
        return N @ x - 2.0 * v0 * (v0 @ x)

    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    start = np.random.default_rng(0).standard_normal(n)
    try:
        vals, vecs = eigsh(op, k=1, which="LA", tol=tolerance, v0=start,
                           maxiter=max_iter or max(1000, 20 * n))
    except ArpackNoConvergence as err:
        if len(err.eigenvalues):
            x = err.eigenvectors[:, 0]
            res = float(np.linalg.norm(matvec(x) - err.eigenvalues[0] * x))
        else:
            res = float("nan")
        raise ConvergenceError("eigensolver did not converge", res) from err
    mu, x = float(vals[0]), vecs[:, 0]
    residual = float(np.linalg.norm(matvec(x) - mu * x) / np.linalg.norm(x))
    if residual > max(tolerance, 1e-12) * max(1.0, abs(mu)) * 10:
        raise ConvergenceError("eigenvector residual above tolerance", residual)
    return min(2.0, max(0.0, 1.0 - mu))


@dataclass(frozen=True)
class CheegerEstimate:
    lambda2: float
    lower: float
    upper: float
    exact: float | None = None
    weighted: bool = True

    @classmethod
    def from_lambda2(cls, lam: float, exact: float | None = None, weighted: bool = True):
        return cls(lambda2=lam, lower=lam / 2.0, upper=math.sqrt(2.0 * lam), exact=exact,
                   weighted=weighted)


def brute_force_cheeger(g: BipartiteGraph, weighted: bool = False) -> float:
    """Exact minimum of ``|dA| / |A|`` over vertex sets of at most half the graph.

    ``|dA|`` counts edges leaving ``A`` and ``|A|`` all edges with at least
    one endpoint in ``A``. Edge counts by default; edge weights when
    ``weighted``. Exhaustive, so limited to small graphs.
    """
    V = g.n_users + g.n_communities
    if V > BRUTE_FORCE_MAX_VERTICES:
        raise GraphError(f"brute force limited to {BRUTE_FORCE_MAX_VERTICES} vertices, got {V}")
    a = g.edge_user.astype(np.int64)
    b = (g.n_users + g.edge_community).astype(np.int64)
    w = g.edge_weight.astype(np.int64) if weighted else np.ones(g.n_edges, dtype=np.int64)
    half = V // 2
    best = math.inf
    chunk = 1 << 16
    for start in range(1, 1 << V, chunk):
        masks = np.arange(start, min(start + chunk, 1 << V), dtype=np.int64)
        size = np.zeros(len(masks), dtype=np.int64)
        for v in range(V):
            size += (masks >> v) & 1
        masks = masks[size <= half]
        if len(masks) == 0:
            continue
        in_a = (masks[:, None] >> a[None, :]) & 1
        in_b = (masks[:, None] >> b[None, :]) & 1
        cut = ((in_a ^ in_b) * w).sum(axis=1)
        touch = ((in_a | in_b) * w).sum(axis=1)
        ok = touch > 0
        if np.any(ok):
            best = min(best, float((cut[ok] / touch[ok]).min()))
    return best


def cheeger_bounds(g: BipartiteGraph, tolerance: float = 1e-8, weighted: bool = True,
                   exact: bool | None = None) -> CheegerEstimate:
    """``lambda2 / 2 <= h(G) <= sqrt(2 lambda2)`` on the largest component.

    The exhaustive value is filled in when the component is small enough,
    unless ``exact`` is False. It always counts edges; with heterogeneous
    weights and ``weighted=True`` the sandwich is then not guaranteed.
    """
    g = _connected(g)
    lam = lambda2(g, tolerance=tolerance, weighted=weighted)
    h = None
    small = g.n_users + g.n_communities <= BRUTE_FORCE_MAX_VERTICES
    if exact or (exact is None and small):
        h = brute_force_cheeger(g)
    return CheegerEstimate.from_lambda2(lam, exact=h, weighted=weighted)
