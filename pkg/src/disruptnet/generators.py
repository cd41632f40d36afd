"""Seeded synthetic bipartite topologies.

Every generator takes an integer seed, draws from a single
``numpy.random.Generator`` and produces unit-weight edges, so a given
(parameters, seed) pair always yields the same edge list.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import zeta

from .graph import BipartiteGraph


class Topology(str, enum.Enum):
    NEAR_STAR = "near-star"
    BIPARTITE_BA = "ba"
    POWERLAW_CONFIG = "powerlaw"
    BIPARTITE_ER = "er"
    SMALL_WORLD = "small-world"


def _ids(prefix: str, n: int) -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def _graph(users, comms, n_users: int, n_comms: int) -> BipartiteGraph:
    return BipartiteGraph.from_indices(
        np.asarray(users), np.asarray(comms), None, _ids("u", n_users), _ids("c", n_comms)
    )


def near_star(n_communities: int, n_users: int, seed: int) -> BipartiteGraph:
    """Hub community ``c0`` plus one uniformly chosen leaf per user."""
    if n_communities < 2:
        raise ValueError("near-star needs at least 2 communities")
    if n_users < 1:
        raise ValueError("near-star needs at least 1 user")
    rng = np.random.default_rng(seed)
    leaves = 1 + rng.integers(0, n_communities - 1, size=n_users)
    users = np.repeat(np.arange(n_users), 2)
    comms = np.column_stack([np.zeros(n_users, dtype=np.int64), leaves]).ravel()
    return _graph(users, comms, n_users, n_communities)


def bipartite_ba(n_communities: int, n_users: int, m: int, seed: int) -> BipartiteGraph:
    """Users arrive one by one and join ``m`` distinct communities.

    Each choice picks a community with probability proportional to its
    current size plus one. That is sampled as a mixture: a uniform community
    with probability ``C / (E + C)``, otherwise the community at the end of a
    uniformly chosen existing edge. Repeats within one user are redrawn.

    The first ``ceil(C / m)`` users seed the process by covering the
    communities in order, so no community is left empty when ``U`` allows it.
    """
    if not 1 <= m <= n_communities:
        raise ValueError(f"need 1 <= m <= communities, got m={m}")
    if n_users < 1:
        raise ValueError("need at least 1 user")
    rng = np.random.default_rng(seed)
    C = n_communities
    endpoints = np.empty(n_users * m, dtype=np.int64)
    n_edges = 0
    n_seed = -(-C // m)
    for i in range(n_users):
        chosen = [(i * m + j) % C for j in range(m)] if i < n_seed else []
        while len(chosen) < m:
            if rng.random() * (n_edges + C) < C:
                c = int(rng.integers(C))
            else:
                c = int(endpoints[rng.integers(n_edges)])
            if c not in chosen:
                chosen.append(c)
        endpoints[n_edges:n_edges + m] = chosen
        n_edges += m
    users = np.repeat(np.arange(n_users), m)
    return _graph(users, endpoints, n_users, C)


def powerlaw_pmf(gamma: float, cap: int) -> np.ndarray:
    """Discrete power law on ``1..cap`` with ``x_min = 1``.

    Mass beyond ``cap`` is folded onto ``cap``. Entry ``i`` is the
    probability of degree ``i + 1``.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    k = np.arange(1, cap + 1, dtype=float)
    pmf = k ** (-gamma) / zeta(gamma, 1)
    pmf[-1] += max(0.0, 1.0 - pmf.sum())
    return pmf / pmf.sum()


def powerlaw_degrees(n: int, gamma: float, cap: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(powerlaw_pmf(gamma, cap))
    cdf[-1] = 1.0
    return 1 + np.searchsorted(cdf, rng.random(n), side="right")


def powerlaw_config(n_communities: int, n_users: int, gamma: float, seed: int) -> BipartiteGraph:
    """Communities with power-law sizes, each filled with distinct random users."""
    if n_communities < 1 or n_users < 1:
        raise ValueError("need at least one community and one user")
    rng = np.random.default_rng(seed)
    degrees = powerlaw_degrees(n_communities, gamma, n_users, rng)
    users = np.concatenate(
        [rng.choice(n_users, size=int(d), replace=False) for d in degrees]
    )
    comms = np.repeat(np.arange(n_communities), degrees)
    return _graph(users, comms, n_users, n_communities)


def bipartite_er(n_communities: int, n_users: int, p: float, seed: int) -> BipartiteGraph:
    """Every user-community pair is an edge independently with probability ``p``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    users, comms = [], []
    rows = max(1, 2_000_000 // max(n_communities, 1))
    for start in range(0, n_users, rows):
        stop = min(n_users, start + rows)
        u, c = np.nonzero(rng.random((stop - start, n_communities)) < p)
        users.append(u + start)
        comms.append(c)
    users_a, comms_a = np.concatenate(users), np.concatenate(comms)
    return _graph(users_a, comms_a, n_users, n_communities)


def watts_strogatz(n_nodes: int, neighbors: int, p: float, seed: int):
    """Ring lattice with random rewiring.

    Each node links to ``neighbors // 2`` nearest nodes on each side; each
    lattice edge then has its far endpoint moved to a uniformly random node
    with probability ``p``, skipping moves that would create a self-loop or
    duplicate.
    """
    from .unipartite import UnipartiteGraph

    if not n_nodes > neighbors >= 2:
        raise ValueError("need nodes > neighbors >= 2")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    half = neighbors // 2
    adj: list[set[int]] = [set() for _ in range(n_nodes)]
    for j in range(1, half + 1):
        for i in range(n_nodes):
            t = (i + j) % n_nodes
            adj[i].add(t)
            adj[t].add(i)
    for j in range(1, half + 1):
        for i in range(n_nodes):
            t = (i + j) % n_nodes
            if t not in adj[i] or rng.random() >= p:
                continue
            w = int(rng.integers(n_nodes))
            while w == i or w in adj[i]:
                if len(adj[i]) >= n_nodes - 1:
                    break
                w = int(rng.integers(n_nodes))
            else:
                adj[i].discard(t)
                adj[t].discard(i)
                adj[i].add(w)
                adj[w].add(i)
    edges = [(i, t) for i in range(n_nodes) for t in sorted(adj[i]) if i < t]
    return UnipartiteGraph.from_pairs(edges, n_nodes)


def bipartite_small_world(
    n_nodes: int, neighbors: int, p: float, seed: int, max_rounds: int = 100
) -> BipartiteGraph:
    """Watts-Strogatz graph converted with label propagation and projection."""
    from .unipartite import convert

    uni = watts_strogatz(n_nodes, neighbors, p, seed)
    return convert(uni, seed=seed, max_rounds=max_rounds)


@dataclass(frozen=True)
class GeneratorSpec:
    """Topology plus parameters; ``build(seed)`` produces the graph.

    ``communities``/``users`` size the bipartite models. The small-world
    model uses ``users`` as its node count and ``neighbors``/``p`` for the
    lattice.
    """

    topology: Topology
    communities: int = 150
    users: int = 3000
    gamma: float = 2.5
    p: float = 0.05
    neighbors: int = 5
    edges_per_user: int = 2

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if self.communities < 1 or self.users < 1:
            raise ValueError("communities and users must be positive")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if not 0 < self.p <= 1 and self.topology is not Topology.SMALL_WORLD:
            raise ValueError("p must lie in (0, 1]")
        if self.edges_per_user < 1 or self.neighbors < 1:
            raise ValueError("edges_per_user and neighbors must be positive")

    def build(self, seed: int) -> BipartiteGraph:
        t = self.topology
        if t is Topology.NEAR_STAR:
            return near_star(self.communities, self.users, seed)
        if t is Topology.BIPARTITE_BA:
            return bipartite_ba(self.communities, self.users, self.edges_per_user, seed)
        if t is Topology.POWERLAW_CONFIG:
            return powerlaw_config(self.communities, self.users, self.gamma, seed)
        if t is Topology.BIPARTITE_ER:
            return bipartite_er(self.communities, self.users, self.p, seed)
        return bipartite_small_world(self.users, self.neighbors, self.p, seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topology"] = self.topology.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown generator fields: {sorted(unknown)}")
        return cls(**known)
