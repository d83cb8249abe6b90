"""The compiled and pure-Python kernels must agree exactly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clausekit import _kernels
from clausekit.clustering import WeightedGraph

from _util import random_atom, random_clause, random_term

BACKENDS = _kernels.backends()
IDS = [k.BACKEND for k in BACKENDS]


def test_fallback_is_always_available():
    assert BACKENDS[0].BACKEND == "python"
    assert _kernels.BACKEND in IDS


@pytest.mark.parametrize("k", BACKENDS, ids=IDS)
def test_unify_examples(k):
    assert k.apply(0, k.unify(0, ("f", ("a",)), {})) == ("f", ("a",))
    s = k.unify(("f", 0, ("b",)), ("f", ("a",), 1), {})
    assert k.apply(0, s) == ("a",) and k.apply(1, s) == ("b",)
    assert k.unify(0, ("f", 0), {}) is None
    assert k.unify(("f", 0), ("g", 0), {}) is None


@pytest.mark.parametrize("k", BACKENDS, ids=IDS)
def test_unify_does_not_mutate(k):
    s = {5: ("a",)}
    k.unify(0, ("b",), s)
    assert s == {5: ("a",)}


@pytest.mark.parametrize("k", BACKENDS, ids=IDS)
def test_match_is_one_way(k):
    assert k.match(0, ("f", 1), {}) == {0: ("f", 1)}
    # target variables are opaque
    assert k.match(("f", ("a",)), ("f", 0), {}) is None
    assert k.match(("g", 0, 0), ("g", ("a",), ("b",)), {}) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unify_and_apply_agree_across_backends(seed):
    rng = np.random.default_rng(seed)
    a = random_term(rng, 3, nvars=4)
    b = random_term(rng, 3, nvars=4)
    results = []
    for k in BACKENDS:
        s = k.unify(a, b, {})
        results.append(None if s is None else (k.apply(a, s), k.apply(b, s)))
    assert all(r == results[0] for r in results)
    if results[0] is not None:
        assert results[0][0] == results[0][1]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_match_agrees_across_backends(seed):
    rng = np.random.default_rng(seed)
    a = random_atom(rng, 2, nvars=2)
    b = random_atom(rng, 2, nvars=2)
    out = [k.match(a, b, {}) for k in BACKENDS]
    assert all(o == out[0] for o in out)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_subsumption_agrees_across_backends(seed):
    rng = np.random.default_rng(seed)
    c1 = random_clause(rng, 2, depth=1, nvars=2)
    c2 = random_clause(rng, 4, depth=1, nvars=2)
    out = [k.subsumes_literals(c1.literals, c2.literals) for k in BACKENDS]
    assert all(o == out[0] for o in out)


def _random_graph(rng, n, p):
    g = WeightedGraph(n)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.add_edge(i, j, float(rng.uniform(0.1, 2.0)))
    return g


@pytest.mark.parametrize("seed", range(10))
def test_louvain_moves_agree_across_backends(seed):
    rng = np.random.default_rng(seed)
    g = _random_graph(rng, 40, 0.15)
    indptr, indices, weights = g.csr()
    degree = g.degrees()
    order = rng.permutation(g.n).astype(np.int64)
    out = []
    for k in BACKENDS:
        comm = np.arange(g.n, dtype=np.int64)
        tot = degree.copy()
        moves = k.louvain_local_moves(indptr, indices, weights, degree, order, comm, tot, float(weights.sum()))
        out.append((moves, comm.tolist(), tot.tolist()))
    assert all(o == out[0] for o in out)


@pytest.mark.parametrize("seed", range(10))
def test_ordered_matmul_agrees_across_backends_and_with_numpy(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((int(rng.integers(1, 30)), 12))
    w = rng.standard_normal((12, 7))
    out = [k.ordered_matmul(x, w) for k in BACKENDS]
    assert all(np.array_equal(o, out[0]) for o in out)
    np.testing.assert_allclose(out[0], x @ w, rtol=1e-12, atol=1e-12)
    # each row is computed independently of the others
    assert np.array_equal(BACKENDS[0].ordered_matmul(x[2:3] if len(x) > 2 else x[:1], w)[0], out[0][min(2, len(x) - 1)])


def _sequential_sorted_sums(vals, starts, counts):
    out = []
    for s, c in zip(starts, counts):
        row = []
        for col in range(vals.shape[1]):
            acc = None
            for v in sorted(vals[s : s + c, col]):
                acc = v if acc is None else acc + v
            row.append(acc)
        out.append(row)
    return np.array(out)


@pytest.mark.parametrize("seed", range(10))
def test_segment_sorted_sums(seed):
    rng = np.random.default_rng(seed)
    counts = rng.integers(1, 9, size=int(rng.integers(1, 12)))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    # wildly mixed magnitudes make the summation order observable
    vals = rng.standard_normal((int(counts.sum()), 5)) * 10.0 ** rng.integers(-8, 9, size=(int(counts.sum()), 1))
    expect = _sequential_sorted_sums(vals, starts, counts)
    for k in BACKENDS:
        got = k.segment_sorted_sums(vals, starts, counts)
        assert np.array_equal(got, expect)
        # permuting rows inside a segment does not change the bits
        shuffled = vals.copy()
        for s, c in zip(starts, counts):
            shuffled[s : s + c] = shuffled[s : s + c][rng.permutation(c)]
        assert np.array_equal(k.segment_sorted_sums(shuffled, starts, counts), expect)
