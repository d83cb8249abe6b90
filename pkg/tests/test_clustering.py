import io
import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clausekit import _kernels
from clausekit.clustering import (
    ClusterSpec,
    WeightedGraph,
    cluster_clauses,
    cluster_matrix,
    fcm_memberships,
    fcm_objective,
    fuzzy_cmeans,
    graph_from_L,
    kmeans,
    kmeans_objective,
    louvain,
    modularity,
    overlap_by_hubs,
    soft_clusters,
)
from clausekit.scorer import init_params, sigmoid

from _util import adjacency_modularity, best_two_partition, bridge_graph, random_clause

seeds = st.integers(0, 2**32 - 1)


def random_graph(rng, n, p=0.3):
    g = WeightedGraph(n)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.add_edge(i, j, float(rng.uniform(0.1, 3.0)))
    return g


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_weighted_edges_from((i, j, w) for (i, j), w in g.edges.items())
    return h


# -- k-means ---------------------------------------------------------------------------


def test_kmeans_one_dimensional_example():
    r = kmeans([0.0, 0.1, 10.0, 10.1], 2)
    assert sorted(map(sorted, r.clustering.clusters)) == [[0, 1], [2, 3]]


def test_kmeans_single_cluster_is_the_mean():
    X = np.random.default_rng(0).standard_normal((7, 3))
    r = kmeans(X, 1)
    assert r.clustering.clusters == [list(range(7))]
    np.testing.assert_allclose(r.centroids[0], X.mean(axis=0), atol=1e-12)


def test_kmeans_rejects_bad_k():
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 4)
    with pytest.raises(ValueError):
        kmeans(np.zeros((3, 2)), 0)


def exhaustive_two_means(X):
    best = np.inf
    for mask in range(1, 2 ** (len(X) - 1)):
        labels = np.array([mask >> v & 1 for v in range(len(X))])
        best = min(best, kmeans_objective(X, labels))
    return best


@pytest.mark.parametrize("trial", range(20))
def test_kmeans_reaches_exhaustive_optimum(trial):
    X = np.random.default_rng(trial).standard_normal((8, 2))
    r = kmeans(X, 2, seed=trial)
    assert r.inertia == pytest.approx(exhaustive_two_means(X), rel=1e-9, abs=1e-12)
    assert r.inertia == pytest.approx(kmeans_objective(X, r.labels), rel=1e-12)


def test_kmeans_handles_duplicate_points():
    r = kmeans(np.zeros((5, 2)), 3)
    assert sum(len(c) for c in r.clustering.clusters) == 5 and r.inertia == 0


# -- fuzzy c-means ---------------------------------------------------------------------


def test_fcm_two_points():
    U = fuzzy_cmeans([[0.0], [1.0]], 2).U
    assert sorted(U.argmax(axis=1).tolist()) == [0, 1]
    np.testing.assert_allclose(np.sort(U, axis=1), [[0, 1], [0, 1]], atol=1e-6)


def test_fcm_equidistant_point_splits_evenly():
    U = fcm_memberships(np.array([[0.0, 0.0], [-1.0, 0.0]]), np.array([[-1.0, 0.0], [1.0, 0.0]]), 2.0)
    assert U[0].tolist() == [0.5, 0.5]
    assert U[1].tolist() == [1.0, 0.0]  # on a centre
    sym = fuzzy_cmeans([[-1.0], [0.0], [1.0]], 2, seed=3).U
    np.testing.assert_allclose(sym[1], [0.5, 0.5], atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(1.3, 3.0))
def test_fcm_rows_sum_to_one_and_objective_decreases(seed, m):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((int(rng.integers(3, 25)), 3))
    k = int(rng.integers(1, min(4, len(X)) + 1))
    r = fuzzy_cmeans(X, k, m, seed=seed)
    assert np.all(np.abs(r.U.sum(axis=1) - 1) <= 1e-9)
    assert np.all((r.U >= 0) & (r.U <= 1))
    trace = r.objective
    assert all(b <= a + 1e-9 * (1 + abs(a)) for a, b in zip(trace, trace[1:]))
    assert trace[-1] == pytest.approx(fcm_objective(X, r.U, r.centers, m))


def test_fcm_validation():
    with pytest.raises(ValueError):
        fuzzy_cmeans([[0.0], [1.0]], 2, m=1.0)
    with pytest.raises(ValueError):
        fuzzy_cmeans([[0.0]], 2)


def test_soft_clusters():
    U = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
    assert soft_clusters(U, 1.0).clusters == [[0, 1], [2]]
    assert soft_clusters(U, 0.5).clusters == [[0, 1], [1, 2]]
    rng = np.random.default_rng(0)
    V = rng.dirichlet(np.ones(4), size=30)
    got = soft_clusters(V, 0.3).clusters
    scan = [sum(1 for p in range(30) if V[p, c] >= 0.3 or V[p].argmax() == c) for c in range(4)]
    assert [len(c) for c in got] == [s for s in scan if s]
    with pytest.raises(ValueError):
        soft_clusters(U, 0)


# -- graphs ------------------------------------------------------------------------------


def test_graph_from_L_thresholds():
    L = np.random.default_rng(0).standard_normal((6, 6)) * 4
    L = (L + L.T) / 2
    assert graph_from_L(L, 1.0).edges == {}
    assert len(graph_from_L(L, 0.0).edges) == 15
    for t in (0.2, 0.5, 0.8):
        g = graph_from_L(L, t)
        scan = [(i, j) for i, j in itertools.combinations(range(6), 2) if sigmoid(L[i, j]) >= t]
        assert sorted(g.edges) == scan
        assert all(w == sigmoid(L[i, j]) for (i, j), w in g.edges.items())


def test_graph_validation_and_edgelist_round_trip():
    g = WeightedGraph(3)
    with pytest.raises(ValueError):
        g.add_edge(1, 1, 1.0)
    with pytest.raises(ValueError):
        g.add_edge(0, 1, -1.0)
    h = random_graph(np.random.default_rng(1), 9)
    buf = io.StringIO()
    h.write_edgelist(buf)
    buf.seek(0)
    assert WeightedGraph.read_edgelist(buf, 9).edges == h.edges


def test_bridge_graph_modularity():
    g = bridge_graph()
    assert modularity(g, [[0, 1, 2], [3, 4, 5]]) == pytest.approx(5 / 14, abs=1e-15)
    assert modularity(g, [list(range(6))]) == pytest.approx(0.0, abs=1e-15)
    best, arg = best_two_partition(g)
    assert best == pytest.approx(5 / 14) and arg == [[0, 1, 2], [3, 4, 5]]


def test_empty_graph_modularity_is_zero():
    assert modularity(WeightedGraph(3), [[0], [1], [2]]) == 0.0


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_modularity_matches_oracles_and_bounds(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 12)))
    if not g.edges:
        return
    labels = rng.integers(0, 3, size=g.n)
    clusters = [np.flatnonzero(labels == c).tolist() for c in range(3)]
    clusters = [c for c in clusters if c]
    q = modularity(g, clusters)
    assert q == pytest.approx(adjacency_modularity(g, clusters), abs=1e-12)
    assert q == pytest.approx(nx.community.modularity(to_nx(g), clusters), abs=1e-12)
    assert -0.5 <= q < 1


# -- Louvain ----------------------------------------------------------------------------


@pytest.mark.parametrize("k", _kernels.backends(), ids=[k.BACKEND for k in _kernels.backends()])
def test_louvain_splits_bridge_graph(k):
    c = louvain(bridge_graph(), kernels=k)
    assert c.clusters == [[0, 1, 2], [3, 4, 5]]
    assert c.info["Q"] == pytest.approx(5 / 14)


def test_louvain_finds_disjoint_cliques():
    g = WeightedGraph(12)
    for block in (range(0, 4), range(4, 9), range(9, 12)):
        for i, j in itertools.combinations(block, 2):
            g.add_edge(i, j, 1.0)
    assert louvain(g, seed=5).clusters == [[0, 1, 2, 3], [4, 5, 6, 7, 8], [9, 10, 11]]


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_louvain_improves_on_trivial_partitions(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 30)), float(rng.uniform(0.05, 0.5)))
    c = louvain(g, seed=seed)
    assert sorted(v for cl in c.clusters for v in cl) == list(range(g.n))
    q = c.info["Q"]
    assert q >= modularity(g, [[v] for v in range(g.n)]) - 1e-12
    assert q >= modularity(g, [list(range(g.n))]) - 1e-12
    trace = c.info["modularity"]
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
    assert louvain(g, seed=seed).clusters == c.clusters


def test_louvain_target_k():
    rng = np.random.default_rng(2)
    g = random_graph(rng, 40, 0.08)
    free = louvain(g)
    capped = louvain(g, target_k=2)
    assert len(free) > 2 and len(capped) == 2
    assert sorted(v for c in capped.clusters for v in c) == list(range(40))
    assert louvain(g, target_k=100).clusters == free.clusters


def test_louvain_edgeless_graph_keeps_singletons():
    assert louvain(WeightedGraph(3)).clusters == [[0], [1], [2]]
    assert louvain(WeightedGraph(0)).clusters == []


def test_overlap_by_hubs():
    g = bridge_graph()
    assert overlap_by_hubs(g, 0.0).clusters == louvain(g).clusters
    star = WeightedGraph(7)
    for leaf in range(1, 7):
        star.add_edge(0, leaf, 1.0)
    star.add_edge(1, 2, 1.0)
    star.add_edge(5, 6, 1.0)
    c = overlap_by_hubs(star, 0.15)
    assert c.overlapping and c.info["hubs"] == [0]
    assert all(0 in cl for cl in c.clusters) and len(c) >= 2
    with pytest.raises(ValueError):
        overlap_by_hubs(star, 0.9)


# -- clause front end -------------------------------------------------------------------


@pytest.mark.parametrize("method", ["kmeans", "fcm", "graph", "hubs"])
def test_cluster_clauses_covers_every_clause(method):
    rng = np.random.default_rng(0)
    clauses = [random_clause(rng).with_id(k) for k in range(15)]
    head = init_params(arch=2, d=32, n=8, seed=1, scale=0.5)
    parts = cluster_clauses(clauses, head, ClusterSpec(method=method, k=3, target_k=3))
    ids = [c.id for part in parts for c in part]
    assert set(ids) == set(range(15)) and all(parts)
    if method in ("kmeans", "graph"):
        assert len(ids) == 15


def test_cluster_matrix_on_embeddings():
    E = np.vstack([np.zeros((4, 3)), np.ones((4, 3)) * 5])
    c = cluster_matrix(E, np.zeros((8, 8)), ClusterSpec(method="kmeans", representation="embeddings"))
    assert sorted(map(sorted, c.clusters)) == [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_cluster_spec_validation():
    with pytest.raises(ValueError):
        ClusterSpec(method="spectral")
