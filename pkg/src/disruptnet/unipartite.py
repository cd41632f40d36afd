"""Unipartite graphs, label propagation, and projection to bipartite form."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import BipartiteGraph, GraphError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UnipartiteGraph:
    """Undirected weighted simple graph on nodes ``0..N-1``.

    Edges are stored once each with ``source < target``.
    """

    node_ids: tuple[str, ...]
    source: np.ndarray
    target: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_pairs(
        cls,
        edges: Iterable[tuple],
        n_nodes: int | None = None,
        node_ids: Sequence[str] | None = None,
    ) -> "UnipartiteGraph":
        """Build from ``(a, b[, weight])`` index pairs; repeated pairs add up."""
        merged: dict[tuple[int, int], int] = {}
        for pos, e in enumerate(edges):
            a, b = int(e[0]), int(e[1])
            w = int(e[2]) if len(e) > 2 else 1
            if a == b:
                raise GraphError(f"edge {pos}: self-loop on node {a}")
            if w < 1:
                raise GraphError(f"edge {pos}: weight must be >= 1, got {w}")
            key = (a, b) if a < b else (b, a)
            merged[key] = merged.get(key, 0) + w
        if n_nodes is None:
            n_nodes = len(node_ids) if node_ids is not None else (
                1 + max((max(k) for k in merged), default=-1)
            )
        if node_ids is None:
            width = len(str(max(n_nodes - 1, 0)))
            node_ids = [f"n{i:0{width}d}" for i in range(n_nodes)]
        if len(node_ids) != n_nodes:
            raise GraphError("node id count does not match node count")
        pairs = np.array(list(merged), dtype=np.int64).reshape(-1, 2)
        if len(pairs) and (pairs.min() < 0 or pairs.max() >= n_nodes):
            raise GraphError("node index out of range")
        return cls(
            node_ids=tuple(node_ids),
            source=pairs[:, 0],
            target=pairs[:, 1],
            weight=np.array(list(merged.values()), dtype=np.int64),
        )

    @classmethod
    def from_records(cls, records: Iterable[tuple]) -> "UnipartiteGraph":
        """Build from ``(source id, target id[, weight])`` string records."""
        index: dict[str, int] = {}
        edges = []
        for rec in records:
            a = index.setdefault(rec[0], len(index))
            b = index.setdefault(rec[1], len(index))
            edges.append((a, b, *rec[2:]))
        return cls.from_pairs(edges, node_ids=list(index))

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def total_weight(self) -> int:
        return int(self.weight.sum())

    def neighbors(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nodes)]
        for a, b, w in zip(self.source.tolist(), self.target.tolist(), self.weight.tolist()):
            adj[a].append((b, w))
            adj[b].append((a, w))
        return adj


@dataclass(frozen=True)
class Labels:
    labels: np.ndarray
    converged: bool
    rounds: int

    @property
    def n_labels(self) -> int:
        return len(np.unique(self.labels))


def _best_labels(nbrs: list[tuple[int, int]], labels: list[int]) -> list[int]:
    totals: dict[int, int] = {}
    for v, w in nbrs:
        lab = labels[v]
        totals[lab] = totals.get(lab, 0) + w
    top = max(totals.values())
    return sorted(lab for lab, t in totals.items() if t == top)


def label_propagation(g: UnipartiteGraph, seed: int, max_rounds: int = 100) -> Labels:
    """Asynchronous weighted label propagation.

    Every node starts with its own label. Each round visits nodes in a fresh
    random order and sets each to a label carrying the most incident weight,
    picking uniformly among ties. Stops once every node already holds one of
    its maximal labels. Labels are renumbered ``0..L-1`` by first node.
    """
    if g.n_nodes == 0:
        raise GraphError("graph has no nodes")
    rng = np.random.default_rng(seed)
    adj = g.neighbors()
    labels = list(range(g.n_nodes))
    converged = False
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        for node in rng.permutation(g.n_nodes).tolist():
            if not adj[node]:
                continue
            best = _best_labels(adj[node], labels)
            labels[node] = best[0] if len(best) == 1 else best[int(rng.integers(len(best)))]
        if all(not adj[v] or labels[v] in _best_labels(adj[v], labels)
               for v in range(g.n_nodes)):
            converged = True
            break
    if not converged:
        logger.warning("label propagation stopped after %d rounds without converging", rounds)
    first: dict[int, int] = {}
    out = np.array([first.setdefault(x, len(first)) for x in labels], dtype=np.int64)
    return Labels(labels=out, converged=converged, rounds=rounds)


def project_to_bipartite(g: UnipartiteGraph, labels: Sequence[int] | Labels) -> BipartiteGraph:
    """Replace user-user edges with user-community edges.

    A node gets an edge to community ``l`` weighted by the total weight of its
    edges to nodes labelled ``l``, its own community included. Every
    unipartite edge therefore contributes its weight twice.
    """
    lab = np.asarray(labels.labels if isinstance(labels, Labels) else labels, dtype=np.int64)
    if len(lab) != g.n_nodes:
        raise GraphError("labels must cover every node")
    if len(g.weight) == 0:
        raise GraphError("graph has no edges")
    users = np.concatenate([g.source, g.target])
    comms = np.concatenate([lab[g.target], lab[g.source]])
    weights = np.concatenate([g.weight, g.weight])
    n_labels = int(lab.max()) + 1
    width = len(str(max(n_labels - 1, 0)))
    return BipartiteGraph.from_indices(
        users, comms, weights, g.node_ids, [f"L{i:0{width}d}" for i in range(n_labels)]
    )


def convert(g: UnipartiteGraph, seed: int, max_rounds: int = 100) -> BipartiteGraph:
    """Label propagation followed by projection."""
    labels = label_propagation(g, seed=seed, max_rounds=max_rounds)
    if labels.n_labels == 1:
        logger.warning("community detection found a single community")
    return project_to_bipartite(g, labels)
