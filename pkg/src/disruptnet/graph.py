"""Immutable bipartite user-community graph and largest-first removal plans."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for invalid graph input."""


class EmptyGraphError(GraphError):
    pass


class InvalidRecordError(GraphError):
    def __init__(self, position: int, message: str):
        super().__init__(f"record {position}: {message}")
        self.position = position


class RankKey(str, enum.Enum):
    USERS = "users"
    WEIGHT = "weight"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Weighted bipartite graph between users and communities.

    Edges are stored as three parallel arrays in first-seen order with
    duplicate (user, community) pairs already merged. Build instances with
    :func:`build_graph` or :meth:`from_indices`, never directly.
    """

    user_ids: tuple[str, ...]
    community_ids: tuple[str, ...]
    edge_user: np.ndarray
    edge_community: np.ndarray
    edge_weight: np.ndarray

    @classmethod
    def from_indices(
        cls,
        users: np.ndarray,
        communities: np.ndarray,
        weights: np.ndarray | None,
        user_ids: Sequence[str],
        community_ids: Sequence[str],
    ) -> "BipartiteGraph":
        """Build from dense index arrays, merging duplicate pairs.

        Vertices that end up without edges are dropped and the remaining
        ones re-indexed in first-seen order, so every vertex has degree >= 1.
        """
        users = np.asarray(users, dtype=np.int64)
        communities = np.asarray(communities, dtype=np.int64)
        if weights is None:
            weights = np.ones(len(users), dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        if not (len(users) == len(communities) == len(weights)):
            raise GraphError("edge arrays differ in length")
        if len(users) == 0:
            raise EmptyGraphError("graph has no edges")
        if weights.min() < 1:
            bad = int(np.argmax(weights < 1))
            raise InvalidRecordError(bad, f"weight must be >= 1, got {weights[bad]}")
        n_users, n_comms = len(user_ids), len(community_ids)
        if users.min() < 0 or users.max() >= n_users:
            raise GraphError("user index out of range")
        if communities.min() < 0 or communities.max() >= n_comms:
            raise GraphError("community index out of range")

        # first-seen order of distinct pairs
        key = users * n_comms + communities
        uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
        summed = np.bincount(inverse, weights=weights, minlength=len(uniq))
        order = np.argsort(first, kind="stable")
        e_user = users[first[order]]
        e_comm = communities[first[order]]
        e_weight = np.rint(summed[order]).astype(np.int64)

        # re-index vertices in first-seen edge order
        u_uniq, u_first, u_inv = np.unique(e_user, return_index=True, return_inverse=True)
        u_rank = np.empty(len(u_uniq), dtype=np.int64)
        u_rank[np.argsort(u_first, kind="stable")] = np.arange(len(u_uniq))
        c_uniq, c_first, c_inv = np.unique(e_comm, return_index=True, return_inverse=True)
        c_rank = np.empty(len(c_uniq), dtype=np.int64)
        c_rank[np.argsort(c_first, kind="stable")] = np.arange(len(c_uniq))

        new_user_ids = [None] * len(u_uniq)
        for old, new in zip(u_uniq, u_rank):
            new_user_ids[new] = user_ids[old]
        new_comm_ids = [None] * len(c_uniq)
        for old, new in zip(c_uniq, c_rank):
            new_comm_ids[new] = community_ids[old]

        g = cls(
            user_ids=tuple(new_user_ids),
            community_ids=tuple(new_comm_ids),
            edge_user=_frozen(u_rank[u_inv]),
            edge_community=_frozen(c_rank[c_inv]),
            edge_weight=_frozen(e_weight),
        )
        g._check()
        return g

    def _check(self) -> None:
        if len(set(self.user_ids)) != len(self.user_ids):
            raise GraphError("duplicate user identifiers")
        if len(set(self.community_ids)) != len(self.community_ids):
            raise GraphError("duplicate community identifiers")
        n_edges = self.n_edges
        if int(self.community_unique_degree.sum()) != n_edges:
            raise GraphError("community degree sum does not match edge count")
        if int(self.user_unique_degree.sum()) != n_edges:
            raise GraphError("user membership sum does not match edge count")

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_communities(self) -> int:
        return len(self.community_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_weight)

    @property
    def total_weight(self) -> int:
        return int(self.edge_weight.sum())

    @cached_property
    def community_unique_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_community, minlength=self.n_communities))

    @cached_property
    def community_weighted_degree(self) -> np.ndarray:
        return _frozen(
            np.bincount(
                self.edge_community, weights=self.edge_weight, minlength=self.n_communities
            ).astype(np.int64)
        )

    @cached_property
    def user_unique_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_user, minlength=self.n_users))

    @cached_property
    def user_weighted_degree(self) -> np.ndarray:
        return _frozen(
            np.bincount(self.edge_user, weights=self.edge_weight, minlength=self.n_users).astype(
                np.int64
            )
        )

    def community_degree(self, weighted: bool) -> np.ndarray:
        return self.community_weighted_degree if weighted else self.community_unique_degree

    def user_degree(self, weighted: bool) -> np.ndarray:
        return self.user_weighted_degree if weighted else self.user_unique_degree

    @cached_property
    def user_adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per user, the (community index, weight) pairs in edge order."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_users)]
        for u, c, w in zip(self.edge_user.tolist(), self.edge_community.tolist(),
                           self.edge_weight.tolist()):
            adj[u].append((c, w))
        return tuple(tuple(a) for a in adj)

    def edge_records(self) -> list[tuple[str, str, int]]:
        return [
            (self.user_ids[u], self.community_ids[c], w)
            for u, c, w in zip(self.edge_user.tolist(), self.edge_community.tolist(),
                               self.edge_weight.tolist())
        ]

    def with_unit_weights(self) -> "BipartiteGraph":
        return BipartiteGraph.from_indices(
            self.edge_user, self.edge_community, None, self.user_ids, self.community_ids
        )

    def same_as(self, other: "BipartiteGraph") -> bool:
        """Structural identity: same ids, same edges in the same order."""
        return (
            self.user_ids == other.user_ids
            and self.community_ids == other.community_ids
            and np.array_equal(self.edge_user, other.edge_user)
            and np.array_equal(self.edge_community, other.edge_community)
            and np.array_equal(self.edge_weight, other.edge_weight)
        )

    def __repr__(self) -> str:
        return (
            f"BipartiteGraph(users={self.n_users}, communities={self.n_communities}, "
            f"edges={self.n_edges}, weight={self.total_weight})"
        )


def build_graph(edge_records: Iterable[tuple]) -> BipartiteGraph:
    """Build a graph from ``(user, community[, weight])`` records.

    Duplicate pairs are merged by summing weights. Indexes are assigned in
    first-seen order.
    """
    user_index: dict[str, int] = {}
    comm_index: dict[str, int] = {}
    users: list[int] = []
    comms: list[int] = []
    weights: list[int] = []
    for pos, rec in enumerate(edge_records):
        if len(rec) == 2:
            user, comm = rec
            weight = 1
        elif len(rec) == 3:
            user, comm, weight = rec
        else:
            raise InvalidRecordError(pos, f"expected 2 or 3 fields, got {len(rec)}")
        if not isinstance(user, str) or not user:
            raise InvalidRecordError(pos, "user id must be a non-empty string")
        if not isinstance(comm, str) or not comm:
            raise InvalidRecordError(pos, "community id must be a non-empty string")
        if isinstance(weight, bool) or int(weight) != weight:
            raise InvalidRecordError(pos, f"weight must be an integer, got {weight!r}")
        if weight < 1:
            raise InvalidRecordError(pos, f"weight must be >= 1, got {weight}")
        users.append(user_index.setdefault(user, len(user_index)))
        comms.append(comm_index.setdefault(comm, len(comm_index)))
        weights.append(int(weight))
    if not users:
        raise EmptyGraphError("no edge records")
    return BipartiteGraph.from_indices(
        np.array(users, dtype=np.int64),
        np.array(comms, dtype=np.int64),
        np.array(weights, dtype=np.int64),
        list(user_index),
        list(comm_index),
    )


def largest_component(g: BipartiteGraph) -> tuple[BipartiteGraph, bool]:
    """Restrict ``g`` to its largest connected component.

    Returns the (possibly identical) graph and whether anything was dropped.
    Ties between equal-size components go to the one containing the
    lowest-indexed user.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    n = g.n_users + g.n_communities
    adj = coo_matrix(
        (np.ones(g.n_edges), (g.edge_user, g.n_users + g.edge_community)), shape=(n, n)
    )
    n_comp, labels = connected_components(adj, directed=False)
    if n_comp == 1:
        return g, False
    sizes = np.bincount(labels)
    best = int(np.argmax(sizes))
    keep = labels[g.edge_user] == best
    sub = BipartiteGraph.from_indices(
        g.edge_user[keep], g.edge_community[keep], g.edge_weight[keep],
        g.user_ids, g.community_ids,
    )
    return sub, True


@dataclass(frozen=True, eq=False)
class RemovalPlan:
    """Largest-first community ordering.

    ``order[k]`` is the community removed at step ``k``; ``position`` is the
    inverse permutation.
    """

    order: np.ndarray
    key: RankKey
    key_values: np.ndarray

    @cached_property
    def position(self) -> np.ndarray:
        pos = np.empty(len(self.order), dtype=np.int64)
        pos[self.order] = np.arange(len(self.order))
        return _frozen(pos)

    def __len__(self) -> int:
        return len(self.order)

    def community_order(self, g: BipartiteGraph) -> list[str]:
        return [g.community_ids[c] for c in self.order.tolist()]


def removal_plan(g: BipartiteGraph, key: RankKey | str = RankKey.USERS) -> RemovalPlan:
    """Order communities by descending key, ties by ascending identifier."""
    key = RankKey(key)
    if g.n_communities == 0:
        raise EmptyGraphError("graph has no communities")
    values = g.community_unique_degree if key is RankKey.USERS else g.community_weighted_degree
    id_rank = np.empty(g.n_communities, dtype=np.int64)
    id_rank[np.argsort(np.array(g.community_ids, dtype=object), kind="stable")] = np.arange(
        g.n_communities
    )
    order = np.lexsort((id_rank, -values))
    return RemovalPlan(order=_frozen(order), key=key, key_values=values)


def smallest_community_rank(g: BipartiteGraph, plan: RemovalPlan) -> np.ndarray:
    """Step index at which each user loses its last community.

    A user whose communities sit at plan positions ``{p1, ..., pk}`` survives
    until the community at ``max(p)`` is removed, so its removal step is that
    maximum.
    """
    _check_plan(g, plan)
    step = np.full(g.n_users, -1, dtype=np.int64)
    np.maximum.at(step, g.edge_user, plan.position[g.edge_community])
    return step


def _check_plan(g: BipartiteGraph, plan: RemovalPlan) -> None:
    if len(plan) != g.n_communities:
        raise GraphError(
            f"plan covers {len(plan)} communities but graph has {g.n_communities}"
        )
