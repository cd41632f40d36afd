"""Closed-form disruption for random bipartite ensembles.

A random bipartite graph is described by the community size distribution
``p_n``, the per-user membership distribution ``g_m`` and the joint matrix
``P[n, m]``: the probability that a uniformly random edge joins a size-``n``
community to a user with ``m`` memberships. Removing communities from the
largest size class down, the disruption at class ``n`` is::

    D(n) = (1 - u_n) n p_n / (sum_{n' < n} n' p_n' + (1 - u_n) n p_n)

where ``u_n`` is the probability that a member of a size-``n`` community has
no smaller community (and is pruned along with it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .graph import BipartiteGraph, GraphError


class Extreme(str, enum.Enum):
    MAX = "max"
    MIN = "min"


class CorrelationDirection(str, enum.Enum):
    TOWARD_MAX = "toward_max"
    TOWARD_MIN = "toward_min"

    @property
    def extreme(self) -> Extreme:
        return Extreme.MAX if self is CorrelationDirection.TOWARD_MAX else Extreme.MIN


@dataclass(frozen=True, eq=False)
class Distribution:
    """Finite-support distribution over positive integers, sorted ascending."""

    support: np.ndarray
    probs: np.ndarray

    @classmethod
    def of(cls, support, probs) -> "Distribution":
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        if support.ndim != 1 or support.shape != probs.shape or len(support) == 0:
            raise ValueError("support and probs must be matching non-empty vectors")
        if support.min() < 1:
            raise ValueError("support points must be >= 1")
        if len(np.unique(support)) != len(support):
            raise ValueError("support points must be distinct")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and non-negative")
        total = probs.sum()
        if total <= 0:
            raise ValueError("distribution has no mass")
        order = np.argsort(support)
        return cls(support=support[order], probs=probs[order] / total)

    @property
    def mean(self) -> float:
        return float(self.support @ self.probs)

    def edge_weighted(self) -> np.ndarray:
        """Probabilities re-weighted by the support value (stub share)."""
        w = self.support * self.probs
        return w / w.sum()

    def to_dict(self) -> dict:
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class JointDegreeModel:
    """``sizes`` (for ``p_n``), ``degrees`` (for ``g_m``) and the joint ``P``.

    ``P`` has one row per size and one column per degree, both ascending.
    """

    sizes: Distribution
    degrees: Distribution
    P: np.ndarray

    def __post_init__(self):
        P = self.P
        if P.shape != (len(self.sizes.support), len(self.degrees.support)):
            raise ValueError("joint matrix shape does not match supports")
        if np.any(P < -1e-15):
            raise ValueError("joint matrix has negative entries")
        if abs(P.sum() - 1.0) > 1e-12:
            raise ValueError(f"joint matrix sums to {P.sum()!r}, not 1")

    def marginal_error(self) -> float:
        """Largest deviation of ``P``'s margins from the stub-weighted marginals."""
        rows = np.abs(self.P.sum(axis=1) - self.sizes.edge_weighted()).max()
        cols = np.abs(self.P.sum(axis=0) - self.degrees.edge_weighted()).max()
        return float(max(rows, cols))

    def correlation(self) -> float:
        """Pearson correlation of ``(n, m)`` at a random edge."""
        n = self.sizes.support.astype(float)
        m = self.degrees.support.astype(float)
        pn, pm = self.P.sum(axis=1), self.P.sum(axis=0)
        mn, mm = n @ pn, m @ pm
        cov = (n - mn) @ self.P @ (m - mm)
        vn, vm = ((n - mn) ** 2) @ pn, ((m - mm) ** 2) @ pm
        if vn <= 0 or vm <= 0:
            return 0.0
        return float(cov / np.sqrt(vn * vm))


def _model(sizes: Distribution, degrees: Distribution, P: np.ndarray) -> JointDegreeModel:
    P = np.clip(P, 0.0, None)
    return JointDegreeModel(sizes, degrees, P / P.sum())


def random_joint(sizes: Distribution, degrees: Distribution) -> JointDegreeModel:
    """Uncorrelated joint matrix, ``P ∝ n p_n * m g_m``."""
    return _model(sizes, degrees, np.outer(sizes.edge_weighted(), degrees.edge_weighted()))


def extreme_joint(
    sizes: Distribution, degrees: Distribution, which: Extreme | str
) -> JointDegreeModel:
    """Monotone coupling of the stub-weighted marginals.

    Community-size mass is taken largest first and filled with user-degree
    mass taken largest first (``max``) or smallest first (``min``), moving
    the smaller remaining mass at each step.
    """
    which = Extreme(which)
    a = sizes.edge_weighted().copy()
    b = degrees.edge_weighted().copy()
    rows = list(range(len(a)))[::-1]
    cols = list(range(len(b)))
    if which is Extreme.MAX:
        cols = cols[::-1]
    P = np.zeros((len(a), len(b)))
    i = j = 0
    while i < len(rows) and j < len(cols):
        r, c = rows[i], cols[j]
        t = min(a[r], b[c])
        P[r, c] += t
        a[r] -= t
        b[c] -= t
        # advance whichever side ran out; float residue below 1e-15 counts as empty
        if a[r] <= 1e-15:
            i += 1
        if b[c] <= 1e-15:
            j += 1
    return _model(sizes, degrees, P)


def interpolate(base: JointDegreeModel, other: JointDegreeModel, rho: float) -> JointDegreeModel:
    """``(1 - rho) * base + rho * other``; ``rho = 0`` returns ``base`` itself."""
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    if rho == 0:
        return base
    P = (1 - rho) * base.P + rho * other.P
    return JointDegreeModel(base.sizes, base.degrees, P / P.sum())


def _size_index(model: JointDegreeModel, n: int) -> int:
    idx = np.searchsorted(model.sizes.support, n)
    if idx >= len(model.sizes.support) or model.sizes.support[idx] != n:
        raise ValueError(f"size {n} is not in the support")
    return int(idx)


def u_all(model: JointDegreeModel) -> np.ndarray:
    """``u_n`` for every size in the support (ascending)."""
    P = model.P
    m = model.degrees.support
    row = P.sum(axis=1, keepdims=True)
    col = P.sum(axis=0)
    # share of degree-m stubs sitting in communities of size >= n
    tail = np.cumsum(P[::-1], axis=0)[::-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        given_n = np.where(row > 0, P / row, 0.0)
        larger = np.where(col > 0, tail / col, 0.0)
    terms = given_n * np.power(larger, m - 1)
    return np.clip(terms.sum(axis=1), 0.0, 1.0)


def u_n(model: JointDegreeModel, n: int) -> float:
    """Probability that a member of a size-``n`` community has no smaller one."""
    return float(u_all(model)[_size_index(model, n)])


@dataclass(frozen=True, eq=False)
class AnalyticCurve:
    """``D(n)`` per size class, ordered largest size first (removal order).

    ``zero_denominator`` marks classes where no edges remain; ``D`` is 0
    there.
    """

    sizes: np.ndarray
    D: np.ndarray
    u: np.ndarray
    zero_denominator: np.ndarray

    def at(self, n: int) -> float:
        hit = np.nonzero(self.sizes == n)[0]
        if len(hit) == 0:
            raise ValueError(f"size {n} is not in the support")
        return float(self.D[hit[0]])


def analytic_disruption(model: JointDegreeModel) -> AnalyticCurve:
    n = model.sizes.support.astype(float)
    edges = n * model.sizes.probs
    u = u_all(model)
    lost = (1.0 - u) * edges
    below = np.concatenate([[0.0], np.cumsum(edges)[:-1]])
    denom = below + lost
    zero = denom <= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        D = np.where(lost > 0, lost / np.where(zero, 1.0, denom), 0.0)
    D = np.clip(D, 0.0, 1.0)
    rev = slice(None, None, -1)
    return AnalyticCurve(
        sizes=model.sizes.support[rev].copy(),
        D=D[rev].copy(),
        u=u[rev].copy(),
        zero_denominator=zero[rev].copy(),
    )


@dataclass(frozen=True, eq=False)
class RelativeDifference:
    sizes: np.ndarray
    value: np.ndarray
    defined: np.ndarray
    correlated: AnalyticCurve
    baseline: AnalyticCurve


def correlation_experiment(
    sizes: Distribution,
    degrees: Distribution,
    rho: float,
    direction: CorrelationDirection | str,
) -> RelativeDifference:
    """``D_corr(n) / D_rand(n) - 1`` for a partially correlated joint matrix."""
    direction = CorrelationDirection(direction)
    base = random_joint(sizes, degrees)
    corr = interpolate(base, extreme_joint(sizes, degrees, direction.extreme), rho)
    d_rand = analytic_disruption(base)
    d_corr = analytic_disruption(corr)
    defined = d_rand.D > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.where(defined, d_corr.D / np.where(defined, d_rand.D, 1.0) - 1.0, np.nan)
    return RelativeDifference(d_rand.sizes, value, defined, d_corr, d_rand)


def truncated_binomial_memberships(mean: float, trials: int) -> Distribution:
    """Binomial(trials, q) conditioned on at least one success, with given mean."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 1 < mean < trials:
        raise ValueError("mean must lie strictly between 1 and trials")

    def excess(q):
        return trials * q / (1 - (1 - q) ** trials) - mean

    q = optimize.brentq(excess, 1e-12, 1 - 1e-12, xtol=1e-15)
    k = np.arange(1, trials + 1)
    return Distribution.of(k, stats.binom.pmf(k, trials, q))


def poisson_sizes(mean: float, tail: float = 1e-9) -> Distribution:
    """Poisson(mean) on ``n >= 1``, cut where the upper tail drops below ``tail``."""
    hi = int(stats.poisson.isf(tail, mean)) + 1
    k = np.arange(1, hi + 1)
    pmf = stats.poisson.pmf(k, mean)
    keep = pmf > 0
    return Distribution.of(k[keep], pmf[keep])


def er_like_distributions(
    ratio: float = 30.0, mean_memberships: float = 1.2, trials: int = 10
) -> tuple[Distribution, Distribution]:
    """Size and membership distributions of a random bipartite network.

    Memberships are zero-truncated binomial with the requested mean; sizes
    are Poisson with mean ``ratio * mean_memberships`` so that users per
    community equals ``ratio``.
    """
    degrees = truncated_binomial_memberships(mean_memberships, trials)
    sizes = poisson_sizes(ratio * degrees.mean)
    return sizes, degrees


def sample_finite_network(
    model: JointDegreeModel, n_communities: int, seed: int, max_retries: int = 50
) -> BipartiteGraph:
    """Draw a finite graph whose edges follow ``model``.

    Community sizes are drawn from ``p_n`` and kept exactly. Every community
    stub then draws its partner's membership class from ``P[n, :] / sum``;
    the stubs landing in class ``m`` are grouped into users with ``m`` stubs
    each (the last user of a class takes the remainder) and paired at random.
    Pairings that would repeat a (user, community) pair are swapped with
    random partners in the same class; a stub still repeating after
    ``max_retries`` rounds is moved to a new single-membership user.
    """
    if n_communities < 1:
        raise ValueError("need at least one community")
    rng = np.random.default_rng(seed)
    sz = model.sizes
    m_support = model.degrees.support
    size_idx = rng.choice(len(sz.support), size=n_communities, p=sz.probs)
    comm_sizes = sz.support[size_idx]
    stub_comm = np.repeat(np.arange(n_communities), comm_sizes)
    stub_row = np.repeat(size_idx, comm_sizes)

    row_sums = model.P.sum(axis=1)
    cond = np.where(row_sums[:, None] > 0, model.P / np.where(row_sums > 0, row_sums, 1)[:, None], 0)
    cdf = np.cumsum(cond, axis=1)
    cdf[:, -1] = 1.0
    draws = rng.random(len(stub_comm))
    stub_class = (draws[:, None] >= cdf[stub_row]).sum(axis=1)

    users_out, comms_out = [], []
    next_user = 0
    for j, m in enumerate(m_support.tolist()):
        comm_stubs = stub_comm[stub_class == j]
        s = len(comm_stubs)
        if s == 0:
            continue
        n_users = -(-s // m)
        user_stubs = next_user + np.arange(s) // m
        next_user += n_users
        comm_stubs = rng.permutation(comm_stubs)
        stuck = _fix_duplicates(user_stubs, comm_stubs, rng, max_retries)
        if len(stuck):
            # only possible in classes too small to reshuffle; each stuck
            # stub becomes its own single-membership user
            user_stubs[stuck] = next_user + np.arange(len(stuck))
            next_user += len(stuck)
        users_out.append(user_stubs)
        comms_out.append(comm_stubs)

    users = np.concatenate(users_out)
    comms = np.concatenate(comms_out)
    uw = len(str(max(next_user - 1, 0)))
    cw = len(str(max(n_communities - 1, 0)))
    return BipartiteGraph.from_indices(
        users, comms, None,
        [f"u{i:0{uw}d}" for i in range(next_user)],
        [f"c{i:0{cw}d}" for i in range(n_communities)],
    )


def _duplicate_positions(users: np.ndarray, comms: np.ndarray) -> np.ndarray:
    key = users * (int(comms.max()) + 1) + comms
    order = np.argsort(key, kind="stable")
    sk = key[order]
    dup = np.zeros(len(key), dtype=bool)
    dup[order[1:][sk[1:] == sk[:-1]]] = True
    return np.nonzero(dup)[0]


def _fix_duplicates(users: np.ndarray, comms: np.ndarray, rng, max_retries: int) -> np.ndarray:
    """Swap stubs until no pair repeats; returns positions still repeating."""
    bad = _duplicate_positions(users, comms)
    for _ in range(max_retries):
        if len(bad) == 0:
            break
        partners = rng.integers(len(comms), size=len(bad))
        for i, k in zip(bad.tolist(), partners.tolist()):
            comms[i], comms[k] = comms[k], comms[i]
        bad = _duplicate_positions(users, comms)
    return bad


def empirical_disruption_by_size(g: BipartiteGraph) -> tuple[np.ndarray, np.ndarray]:
    """Finite-graph counterpart of ``D(n)``, ordered largest size first.

    Communities are removed one whole size class at a time. At class ``n``
    the value is the survivors' edges cut by that class divided by the
    survivors' edges still present just before it. Unweighted.
    """
    size = g.community_unique_degree
    classes = np.unique(size)[::-1]
    edge_size = size[g.edge_community]
    # smallest community size each user belongs to
    user_min = np.full(g.n_users, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(user_min, g.edge_user, edge_size)
    edge_user_min = user_min[g.edge_user]
    out = np.empty(len(classes))
    below = np.cumsum(np.bincount(edge_size, minlength=int(size.max()) + 1))
    for i, n in enumerate(classes.tolist()):
        in_class = edge_size == n
        lost = int(np.count_nonzero(in_class & (edge_user_min < n)))
        denom = int(below[n - 1]) + lost
        out[i] = lost / denom if denom else 0.0
    return classes, out
