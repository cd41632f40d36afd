"""Degree assortativity and degree-preserving rewiring."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix, triu

from .graph import BipartiteGraph, GraphError, RankKey, removal_plan
from .metrics import dauc, disruption_curve


class Direction(str, enum.Enum):
    INCREASE = "increase"
    DECREASE = "decrease"


class Correlation(NamedTuple):
    value: float
    defined: bool


def pearson(x: np.ndarray, y: np.ndarray) -> Correlation:
    """Pearson correlation; zero-variance input gives ``(0.0, False)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return Correlation(0.0, False)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        return Correlation(0.0, False)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return Correlation(min(1.0, max(-1.0, r)), True)


def user_community_assortativity(g: BipartiteGraph, weighted: bool = True) -> Correlation:
    """Correlation between endpoint user and community degrees over edges."""
    if g.n_edges < 2:
        raise GraphError("assortativity needs at least 2 edges")
    x = g.user_degree(weighted)[g.edge_user]
    y = g.community_degree(weighted)[g.edge_community]
    return pearson(x, y)


def community_projection(g: BipartiteGraph) -> tuple[np.ndarray, np.ndarray]:
    """Community pairs ``(a, b)``, ``a < b``, that share at least one user."""
    inc = coo_matrix(
        (np.ones(g.n_edges), (g.edge_user, g.edge_community)),
        shape=(g.n_users, g.n_communities),
    ).tocsr()
    shared = triu(inc.T @ inc, k=1).tocoo()
    order = np.lexsort((shared.col, shared.row))
    return shared.row[order].astype(np.int64), shared.col[order].astype(np.int64)


def projected_community_assortativities(
    g: BipartiteGraph,
) -> tuple[Correlation, Correlation]:
    """Degree and population assortativity of the community projection.

    Each projected edge enters both ways round, as is usual for undirected
    assortativity. Degrees are weighted degrees; populations are unique
    user counts.
    """
    a, b = community_projection(g)
    if len(a) == 0:
        return Correlation(0.0, False), Correlation(0.0, False)
    src = np.concatenate([a, b])
    dst = np.concatenate([b, a])
    deg = g.community_weighted_degree
    pop = g.community_unique_degree
    return pearson(deg[src], deg[dst]), pearson(pop[src], pop[dst])


@dataclass
class TracePoint:
    target_fraction: float
    accepted_swaps: int
    achieved_fraction: float
    user_community: Correlation
    projected_degree: Correlation
    projected_population: Correlation
    dauc: float
    complete: bool

    def as_row(self) -> dict:
        return {
            "target_fraction": self.target_fraction,
            "accepted_swaps": self.accepted_swaps,
            "achieved_fraction": self.achieved_fraction,
            "user_community_assortativity": self.user_community.value,
            "user_community_defined": self.user_community.defined,
            "projected_degree_assortativity": self.projected_degree.value,
            "projected_degree_defined": self.projected_degree.defined,
            "projected_population_assortativity": self.projected_population.value,
            "projected_population_defined": self.projected_population.defined,
            "dauc": self.dauc,
            "complete": self.complete,
        }


@dataclass
class RewiringTrace:
    direction: Direction
    seed: int
    n_edges: int
    points: list[TracePoint] = field(default_factory=list)

    @property
    def target_fractions(self) -> list[float]:
        return [p.target_fraction for p in self.points]

    @property
    def complete(self) -> bool:
        return all(p.complete for p in self.points)


class Rewirer:
    """Stateful endpoint-swap rewiring of one graph.

    Two edges ``(u1, c1)`` and ``(u2, c2)`` become ``(u1, c2)`` and
    ``(u2, c1)``. A swap is accepted only if both edges carry the same weight
    (so weighted and unweighted degrees of every vertex are kept), it creates
    no duplicate pair, and it strictly moves the user-community correlation
    in the requested direction.

    Degrees never change, so the correlation's means and variances are
    constant and a swap changes only the cross term, by
    ``-(x1 - x2) * (y1 - y2)`` with ``x`` the user and ``y`` the community
    degree. Each candidate is checked in constant time.
    """

    def __init__(self, g: BipartiteGraph, direction: Direction | str, seed: int,
                 weighted: bool = True):
        if g.n_edges < 2:
            raise GraphError("rewiring needs at least 2 edges")
        self.graph = g
        self.direction = Direction(direction)
        self.weighted = weighted
        self.rng = np.random.default_rng(seed)
        self.users = g.edge_user.tolist()
        self.comms = g.edge_community.tolist()
        self.weights = g.edge_weight.tolist()
        self.udeg = g.user_degree(weighted).tolist()
        self.cdeg = g.community_degree(weighted).tolist()
        self.pairs = set(zip(self.users, self.comms))
        self.accepted = 0
        self.exhausted = False
        self._queue: list[int] = []
        self._accepted_this_pass = 0
        self._in_pass = False

    def _refill(self) -> None:
        self._queue = self.rng.permutation(len(self.users)).tolist()
        self._queue.reverse()
        self._accepted_this_pass = 0
        self._in_pass = True

    def _try(self, e1: int, e2: int) -> bool:
        users, comms = self.users, self.comms
        if self.weights[e1] != self.weights[e2]:
            return False
        u1, c1, u2, c2 = users[e1], comms[e1], users[e2], comms[e2]
        delta = -(self.udeg[u1] - self.udeg[u2]) * (self.cdeg[c1] - self.cdeg[c2])
        if delta == 0 or (delta > 0) != (self.direction is Direction.INCREASE):
            return False
        if (u1, c2) in self.pairs or (u2, c1) in self.pairs:
            return False
        self.pairs.difference_update(((u1, c1), (u2, c2)))
        self.pairs.update(((u1, c2), (u2, c1)))
        comms[e1], comms[e2] = c2, c1
        return True

    def run_until(self, n_accepted: int) -> bool:
        """Accept swaps until ``n_accepted`` in total; False if stuck."""
        while self.accepted < n_accepted:
            if self.exhausted:
                return False
            if len(self._queue) < 2:
                # a whole reshuffled pass without any acceptance: give up
                if self._in_pass and self._accepted_this_pass == 0:
                    self.exhausted = True
                    return False
                self._refill()
            e1 = self._queue.pop()
            e2 = self._queue.pop()
            if self._try(e1, e2):
                self.accepted += 1
                self._accepted_this_pass += 1
        return True

    def current_graph(self) -> BipartiteGraph:
        g = self.graph
        return BipartiteGraph.from_indices(
            np.array(self.users), np.array(self.comms), np.array(self.weights),
            g.user_ids, g.community_ids,
        )


def _target_count(fraction: float, n_edges: int) -> int:
    if not 0 <= fraction <= 1:
        raise ValueError(f"target fraction must lie in [0, 1], got {fraction}")
    return math.ceil(round(fraction * n_edges, 9))


def _checkpoint(g: BipartiteGraph, target: float, accepted: int, complete: bool,
                weighted: bool, rank_by: RankKey) -> TracePoint:
    deg, pop = projected_community_assortativities(g)
    curve = disruption_curve(g, removal_plan(g, rank_by), weighted=weighted)
    return TracePoint(
        target_fraction=float(target),
        accepted_swaps=accepted,
        achieved_fraction=accepted / g.n_edges,
        user_community=user_community_assortativity(g, weighted),
        projected_degree=deg,
        projected_population=pop,
        dauc=dauc(curve),
        complete=complete,
    )


def _sweep(g, direction, fractions, seed, weighted, rank_by):
    fractions = [float(f) for f in fractions]
    if any(b < a for a, b in zip(fractions, fractions[1:])):
        raise ValueError("fractions must be sorted ascending")
    rank_by = RankKey(rank_by)
    rw = Rewirer(g, direction, seed, weighted=weighted)
    trace = RewiringTrace(direction=rw.direction, seed=seed, n_edges=g.n_edges)
    current = g
    for f in fractions:
        before = rw.accepted
        complete = rw.run_until(_target_count(f, g.n_edges))
        if rw.accepted != before:
            current = rw.current_graph()
        trace.points.append(_checkpoint(current, f, rw.accepted, complete, weighted, rank_by))
    return current, trace


def rewire(
    g: BipartiteGraph,
    direction: Direction | str,
    target_fraction: float,
    seed: int,
    weighted: bool = True,
    rank_by: RankKey | str = RankKey.USERS,
) -> tuple[BipartiteGraph, RewiringTrace]:
    """Rewire until ``target_fraction`` of edges have been swapped.

    An unreachable target is not an error: the returned trace point has
    ``complete=False`` and records how far rewiring got.
    """
    return _sweep(g, direction, [target_fraction], seed, weighted, rank_by)


def rewiring_sweep(
    g: BipartiteGraph,
    direction: Direction | str,
    fractions: Sequence[float],
    seed: int,
    weighted: bool = True,
    rank_by: RankKey | str = RankKey.USERS,
) -> RewiringTrace:
    """Cumulative rewiring with metrics recorded at each fraction."""
    return _sweep(g, direction, fractions, seed, weighted, rank_by)[1]
