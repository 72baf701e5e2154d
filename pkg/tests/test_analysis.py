import numpy as np

from keynetsim import (
    analyze,
    class_edge_audit,
    connectivity,
    count_isolated,
    generate,
    rng_stream,
)
from keynetsim.oracle import dfs_connectivity

from conftest import graph_from_edges, make_params


def test_empty_graph_is_all_isolated():
    g = graph_from_edges(7, [])
    per_class, total = count_isolated(g)
    assert total == 7
    assert per_class.tolist() == [7]


def test_complete_graph_has_no_isolated_node():
    n = 6
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    _, total = count_isolated(graph_from_edges(n, edges))
    assert total == 0


def test_star_with_two_free_nodes():
    edges = [(0, i) for i in range(1, 5)]
    g = graph_from_edges(7, edges)
    _, total = count_isolated(g)
    assert total == 2


def test_isolation_count_invariant_under_relabeling():
    rng = np.random.default_rng(0)
    edges = [(0, 1), (1, 2), (4, 5)]
    g = graph_from_edges(8, edges, classes=[0, 1, 0, 1, 0, 1, 0, 1], r=2)
    perm = rng.permutation(8)
    relabeled = graph_from_edges(
        8,
        [(int(perm[a]), int(perm[b])) for a, b in edges],
        classes=np.asarray([0, 1, 0, 1, 0, 1, 0, 1])[np.argsort(perm)],
        r=2,
    )
    assert count_isolated(g)[1] == count_isolated(relabeled)[1]
    assert sorted(count_isolated(g)[0]) == sorted(count_isolated(relabeled)[0])


def test_path_graph_is_connected():
    n = 12
    g = graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])
    assert connectivity(g) == (True, 1, n)


def test_two_triangles():
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    g = graph_from_edges(6, edges)
    assert connectivity(g) == (False, 2, 3)


def test_union_find_agrees_with_dfs_on_random_graphs():
    rng_master = np.random.default_rng(42)
    for _ in range(200):
        pool = int(rng_master.integers(6, 40))
        k = int(rng_master.integers(1, pool // 2 + 1))
        alpha = float(rng_master.uniform(0, 1))
        params = make_params(100, [1.0], [k], pool, [[alpha]])
        g = generate(params, rng_stream(int(rng_master.integers(0, 2**32))))
        uf = connectivity(g)
        dfs = dfs_connectivity(g)
        assert (uf[0], uf[1]) == dfs


def test_audit_single_class_equals_edge_count():
    g = graph_from_edges(5, [(0, 1), (2, 3), (1, 4)])
    audit = class_edge_audit(g)
    assert audit.shape == (1, 1)
    assert audit[0, 0] == g.edge_count


def test_audit_diagonal_zero_for_bipartite_channel():
    params = make_params(80, [0.5, 0.5], [15, 16], 80, [[0.0, 0.8], [0.8, 0.0]])
    g = generate(params, rng_stream(7))
    audit = class_edge_audit(g)
    assert audit[0, 0] == 0 and audit[1, 1] == 0
    assert np.triu(audit).sum() == g.edge_count


def test_audit_totals_match_edge_count():
    rng_master = np.random.default_rng(3)
    for _ in range(100):
        pool = int(rng_master.integers(8, 30))
        k1 = int(rng_master.integers(1, pool // 2 + 1))
        k2 = int(rng_master.integers(k1, pool // 2 + 1))
        a = rng_master.uniform(0, 1, size=(2, 2))
        params = make_params(40, [0.4, 0.6], [k1, k2], pool, (a + a.T) / 2)
        g = generate(params, rng_stream(int(rng_master.integers(0, 2**32))))
        audit = class_edge_audit(g)
        assert np.array_equal(audit, audit.T)
        assert np.triu(audit).sum() == g.edge_count


def test_trial_outcome_consistency():
    rng_master = np.random.default_rng(9)
    for _ in range(30):
        pool = int(rng_master.integers(8, 30))
        k = int(rng_master.integers(1, pool // 2 + 1))
        params = make_params(
            50, [0.5, 0.5], [k, k], pool, np.full((2, 2), rng_master.uniform(0, 1))
        )
        g = generate(params, rng_stream(int(rng_master.integers(0, 2**32))))
        out = analyze(g)
        assert out.isolated_count == int(out.class_isolated_counts.sum())
        assert out.is_connected == (out.component_count == 1)
        if out.is_connected:
            assert out.isolated_count == 0
        assert out.edge_count == g.edge_count
        assert np.array_equal(
            out.intra_class_edge_counts, np.diagonal(class_edge_audit(g))
        )
