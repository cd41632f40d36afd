from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from disruptnet import build_graph


def random_records(rng: np.random.Generator, max_comms=20, max_users=100, max_weight=5):
    """Random ``(user, community, weight)`` records, possibly with repeats."""
    C = int(rng.integers(1, max_comms + 1))
    U = int(rng.integers(1, max_users + 1))
    n = int(rng.integers(1, 3 * U + 2))
    users = rng.integers(0, U, size=n)
    comms = rng.integers(0, C, size=n)
    weights = rng.integers(1, max_weight + 1, size=n)
    return [(f"u{u}", f"c{c}", int(w)) for u, c, w in zip(users, comms, weights)]


def random_graph(rng, **kw):
    return build_graph(random_records(rng, **kw))


def merged_edges(records) -> dict[tuple[str, str], int]:
    edges: dict[tuple[str, str], int] = {}
    for u, c, *w in records:
        edges[(u, c)] = edges.get((u, c), 0) + (w[0] if w else 1)
    return edges


def naive_order(edges, key="users") -> list[str]:
    """Largest-first, ties by id, straight from the edge dict."""
    score: dict[str, int] = {}
    for (u, c), w in edges.items():
        score[c] = score.get(c, 0) + (1 if key == "users" else w)
    return sorted(score, key=lambda c: (-score[c], c))


def naive_disruption(edges, order, weighted=True) -> list[Fraction]:
    """Recompute every step from scratch with exact fractions."""
    out = []
    for k in range(1, len(order) + 1):
        removed = set(order[:k])
        survivors = {u for (u, c) in edges if c not in removed}
        cut = orig = 0
        for (u, c), w in edges.items():
            if u not in survivors:
                continue
            w = w if weighted else 1
            orig += w
            if c in removed:
                cut += w
        out.append(Fraction(cut, orig) if orig else Fraction(1))
    return out


@pytest.fixture
def toy():
    """A(u1,u2,u3), B(u1), C(u2)."""
    return build_graph([
        ("u1", "A"), ("u2", "A"), ("u3", "A"), ("u1", "B"), ("u2", "C"),
    ])
