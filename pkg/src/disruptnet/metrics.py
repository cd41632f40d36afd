"""Cumulative disruption curves and related removal-sweep metrics.

All curves here are computed from one pass over the edges, using the step
at which each user loses its last community (see
:func:`~disruptnet.graph.smallest_community_rank`). Nothing mutates the
graph per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import BipartiteGraph, RemovalPlan, _check_plan, smallest_community_rank


@dataclass(frozen=True, eq=False)
class DisruptionCurve:
    """Disruption after each cumulative removal, ``k = 1..C``.

    ``cut_weight[k-1]`` is the survivors' weight severed so far and
    ``original_weight[k-1]`` their full original weight; ``disruption`` is
    their ratio, with 1.0 when nobody survives.
    """

    k: np.ndarray
    n_communities: int
    cut_weight: np.ndarray
    original_weight: np.ndarray
    surviving_users: np.ndarray
    weighted: bool

    @property
    def fraction_removed(self) -> np.ndarray:
        return self.k / self.n_communities

    @property
    def surviving_edge_weight(self) -> np.ndarray:
        return self.original_weight - self.cut_weight

    @property
    def disruption(self) -> np.ndarray:
        out = np.ones(len(self.k))
        alive = self.original_weight > 0
        # int/int true division is correctly rounded, so equal integer
        # sums always give bit-identical floats
        out[alive] = [
            c / o for c, o in zip(self.cut_weight[alive].tolist(),
                                  self.original_weight[alive].tolist())
        ]
        return out

    def as_fractions(self) -> list[Fraction]:
        return [
            Fraction(c, o) if o else Fraction(1)
            for c, o in zip(self.cut_weight.tolist(), self.original_weight.tolist())
        ]

    def __len__(self) -> int:
        return len(self.k)


def disruption_curve(
    g: BipartiteGraph, plan: RemovalPlan, weighted: bool = True
) -> DisruptionCurve:
    """Fraction of surviving users' edges severed as communities are removed.

    After removing the first ``k`` communities of ``plan``, a user survives if
    it still has an edge to a remaining community. Disruption is the share of
    the survivors' original degree that now points into removed communities.
    """
    _check_plan(g, plan)
    C = g.n_communities
    w = g.edge_weight if weighted else np.ones(g.n_edges, dtype=np.int64)
    last_step = smallest_community_rank(g, plan)
    user_deg = np.bincount(g.edge_user, weights=None if not weighted else w,
                           minlength=g.n_users).astype(np.int64)

    # weight leaving the graph when the community at each position goes
    removed_at = np.bincount(plan.position[g.edge_community], weights=w, minlength=C)
    remaining = int(w.sum()) - np.cumsum(removed_at.astype(np.int64))

    # users (and their whole degree) pruned at each step
    pruned_deg = np.bincount(last_step, weights=user_deg, minlength=C).astype(np.int64)
    pruned_cnt = np.bincount(last_step, minlength=C)
    original = int(user_deg.sum()) - np.cumsum(pruned_deg)
    survivors = g.n_users - np.cumsum(pruned_cnt)

    return DisruptionCurve(
        k=np.arange(1, C + 1),
        n_communities=C,
        cut_weight=original - remaining,
        original_weight=original,
        surviving_users=survivors.astype(np.int64),
        weighted=weighted,
    )


def dauc(curve: DisruptionCurve | Sequence[float]) -> float:
    """Area under a disruption curve in log space, normalised to [0, 1].

    The trapezoid rule is applied against ``log(k / C)`` for ``k = 1..C``
    and divided by ``log(C)``, the width of that interval.
    """
    y = curve.disruption if isinstance(curve, DisruptionCurve) else np.asarray(curve, float)
    n = len(y)
    if n == 0:
        raise ValueError("cannot integrate an empty curve")
    if n == 1:
        return float(y[0])
    x = np.log(np.arange(1, n + 1) / n)
    area = float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))
    return area / math.log(n)


def population_curve(g: BipartiteGraph, plan: RemovalPlan) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative membership share as communities are added smallest first.

    Returns ``(fraction_of_communities, cumulative_fraction)``. Sizes are
    membership counts, so a user in two communities counts twice.
    """
    _check_plan(g, plan)
    sizes = g.community_unique_degree[plan.order[::-1]]
    C = g.n_communities
    return np.arange(1, C + 1) / C, np.cumsum(sizes) / sizes.sum()


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return self.size[ra]
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return self.size[ra]


def giant_component_sizes(g: BipartiteGraph, plan: RemovalPlan) -> np.ndarray:
    """Largest component size (users + communities) after ``k`` removals.

    Entry ``k`` covers ``k = 0..C``. Computed by adding communities back in
    reverse plan order, so each edge is unioned once.
    """
    _check_plan(g, plan)
    C, U = g.n_communities, g.n_users
    by_pos: list[list[int]] = [[] for _ in range(C)]
    for c, u in zip(g.edge_community.tolist(), g.edge_user.tolist()):
        by_pos[plan.position[c]].append(u)
    ds = _DisjointSet(U + C)
    sizes = np.zeros(C + 1, dtype=np.int64)
    best = 0
    for pos in range(C - 1, -1, -1):
        cnode = U + int(plan.order[pos])
        best = max(best, 1)
        for u in by_pos[pos]:
            best = max(best, ds.union(cnode, u))
        sizes[pos] = best
    return sizes


def giant_component_curve(g: BipartiteGraph, plan: RemovalPlan) -> tuple[np.ndarray, np.ndarray]:
    """Giant component size relative to the unpruned graph, for ``k = 0..C``."""
    sizes = giant_component_sizes(g, plan)
    return np.arange(g.n_communities + 1), sizes / sizes[0]


@dataclass(frozen=True, eq=False)
class LocalCheegerCurve:
    k: np.ndarray
    boundary: np.ndarray
    incident: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return self.boundary / self.incident


def local_cheeger_curve(
    g: BipartiteGraph, plan: RemovalPlan, weighted: bool = True
) -> LocalCheegerCurve:
    """``|dA| / |A|`` where ``A`` is the removed prefix of the plan.

    ``|A|`` is the weight of edges touching removed communities; ``|dA|`` is
    the part of it attached to users that still have an edge outside ``A``.
    """
    _check_plan(g, plan)
    C = g.n_communities
    w = g.edge_weight if weighted else np.ones(g.n_edges, dtype=np.int64)
    pos = plan.position[g.edge_community]
    last = smallest_community_rank(g, plan)[g.edge_user]
    incident = np.cumsum(np.bincount(pos, weights=w, minlength=C)).astype(np.int64)
    # edge counts as boundary for k in (pos, last]; index k-1 in the output
    diff = np.zeros(C + 1, dtype=np.int64)
    crosses = last > pos
    np.add.at(diff, pos[crosses], w[crosses])
    np.add.at(diff, last[crosses], -w[crosses])
    boundary = np.cumsum(diff)[:C]
    return LocalCheegerCurve(k=np.arange(1, C + 1), boundary=boundary, incident=incident)
