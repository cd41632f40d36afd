import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disruptnet import GraphError, UnipartiteGraph, convert, label_propagation, project_to_bipartite


def cliques_with_bridge(k=5):
    a = [(i, j) for i in range(k) for j in range(i + 1, k)]
    b = [(i + k, j + k) for i, j in a]
    return UnipartiteGraph.from_pairs(a + b + [(0, k)])


def test_from_pairs_merges_and_orders():
    g = UnipartiteGraph.from_pairs([(1, 0), (0, 1, 2), (1, 2)])
    assert list(zip(g.source.tolist(), g.target.tolist(), g.weight.tolist())) == [
        (0, 1, 3), (1, 2, 1)
    ]


def test_self_loop_rejected():
    with pytest.raises(GraphError):
        UnipartiteGraph.from_pairs([(0, 0)])


def test_two_cliques_found():
    g = cliques_with_bridge()
    for seed in range(10):
        lab = label_propagation(g, seed=seed)
        assert lab.converged
        assert len(set(lab.labels[:5].tolist())) == 1
        assert len(set(lab.labels[5:].tolist())) == 1
        assert lab.labels[0] != lab.labels[5]


def test_complete_graph_single_community(caplog):
    g = UnipartiteGraph.from_pairs([(i, j) for i in range(6) for j in range(i + 1, 6)])
    with caplog.at_level(logging.WARNING):
        b = convert(g, seed=0)
    assert b.n_communities == 1
    assert "single community" in caplog.text


def test_labels_first_seen_numbering():
    lab = label_propagation(cliques_with_bridge(), seed=1)
    assert lab.labels[0] == 0
    assert sorted(set(lab.labels.tolist())) == list(range(lab.n_labels))


def test_projection_weights():
    g = UnipartiteGraph.from_records([("a", "b", 2), ("b", "c", 1)])
    b = project_to_bipartite(g, [0, 0, 1])
    assert sorted(b.edge_records()) == [
        ("a", "L0", 2), ("b", "L0", 2), ("b", "L1", 1), ("c", "L0", 1)
    ]


def test_projection_label_length():
    g = UnipartiteGraph.from_pairs([(0, 1)])
    with pytest.raises(GraphError):
        project_to_bipartite(g, [0])


def test_deterministic():
    g = cliques_with_bridge(6)
    assert convert(g, seed=4).same_as(convert(g, seed=4))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conversion_doubles_weight(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    m = int(rng.integers(1, 3 * n))
    a = rng.integers(0, n, size=m)
    b = rng.integers(0, n, size=m)
    keep = a != b
    if not keep.any():
        return
    w = rng.integers(1, 6, size=m)
    g = UnipartiteGraph.from_pairs(zip(a[keep], b[keep], w[keep]), n_nodes=n)
    out = convert(g, seed=seed)
    assert out.total_weight == 2 * g.total_weight
