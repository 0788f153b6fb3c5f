import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from gstlab.errors import ZeroSpectralRadius
from gstlab.graph import (
    Connectivity,
    DiGraph,
    adjacency,
    connectivity_class,
    cycle_graph,
    degree_matrix,
    erdos_renyi,
    from_edges,
    is_dag,
    normalize,
    path_graph,
    random_dag,
)


def test_er_probability_zero_and_one():
    assert erdos_renyi(5, 0.0, 3).num_edges == 0
    g = erdos_renyi(4, 1.0, 11)
    assert g.num_edges == 12
    assert all(s != d for s, d, _ in g.edges)


def test_er_rejects_bad_probability():
    with pytest.raises(ValueError):
        erdos_renyi(5, 1.5, 0)
    with pytest.raises(ValueError):
        erdos_renyi(5, -0.1, 0)


def test_er_mean_edge_count():
    # binomial oracle: 1000 seeds, n=100, p=0.04
    counts = np.array([erdos_renyi(100, 0.04, s).num_edges for s in range(1000)])
    trials = 100 * 99
    mean, var = trials * 0.04, trials * 0.04 * 0.96
    assert abs(counts.mean() - mean) <= 3 * np.sqrt(var / len(counts))
    assert abs(counts.var() - var) / var < 0.15


def test_er_stream_contract():
    # one PCG64 uniform per ordered off-diagonal pair, row-major
    n, p, seed = 7, 0.3, 42
    u = np.random.Generator(np.random.PCG64(seed)).random(n * (n - 1))
    expect = [(i, j) for i in range(n) for j in range(n) if i != j]
    expect = [e for e, x in zip(expect, u) if x < p]
    got = [(s, d) for s, d, _ in erdos_renyi(n, p, seed).edges]
    assert got == expect


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), p=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_er_deterministic_and_simple(n, p, seed):
    g1, g2 = erdos_renyi(n, p, seed), erdos_renyi(n, p, seed)
    assert g1.edges == g2.edges
    pairs = [(s, d) for s, d, _ in g1.edges]
    assert len(set(pairs)) == len(pairs)
    assert all(s != d for s, d in pairs)
    A = adjacency(g1)
    assert (np.diag(A) == 0).all() and (A >= 0).all()


def test_digraph_validation():
    with pytest.raises(ValueError):
        DiGraph(0)
    with pytest.raises(ValueError):
        DiGraph(2, ((0, 2, 1.0),))
    with pytest.raises(ValueError):
        DiGraph(2, ((0, 1, 0.0),))
    with pytest.raises(ValueError):
        DiGraph(2, ((0, 1, 1.0), (0, 1, 2.0)))


def test_adjacency_examples():
    assert_array_equal(adjacency(DiGraph(3)), np.zeros((3, 3)))
    A = adjacency(cycle_graph(3))
    assert A[0, 1] == A[1, 2] == A[2, 0] == 1 and A.sum() == 3
    g = DiGraph(2, ((0, 1, 2.5),))
    assert adjacency(g)[0, 1] == 2.5


def test_adjacency_row_counts_match_out_degree():
    g = erdos_renyi(40, 0.1, 5)
    A = adjacency(g)
    out = np.zeros(40, dtype=int)
    for s, _, _ in g.edges:
        out[s] += 1
    assert_array_equal((A != 0).sum(axis=1), out)
    assert_array_equal(g.out_degrees(), out)


def test_degree_matrix():
    assert_array_equal(degree_matrix(adjacency(cycle_graph(3))), np.eye(3))
    assert_array_equal(degree_matrix(np.zeros((3, 3))), np.zeros((3, 3)))
    K4 = np.ones((4, 4)) - np.eye(4)
    assert_array_equal(degree_matrix(K4), 3 * np.eye(4))
    with pytest.raises(ValueError):
        degree_matrix(np.ones((2, 3)))


def test_connectivity_examples():
    c = connectivity_class(cycle_graph(3))
    assert c.kind is Connectivity.STRONG and c.sinks == () and c.sources == ()
    c = connectivity_class(path_graph(3))
    assert c.kind is Connectivity.WEAK and c.sinks == (2,) and c.sources == (0,)
    c = connectivity_class(from_edges(4, [(0, 1), (2, 3)]))
    assert c.kind is Connectivity.DISCONNECTED


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 25), p=st.floats(0.05, 0.6), seed=st.integers(0, 10**6))
def test_strong_graphs_have_no_sinks_or_sources(n, p, seed):
    c = connectivity_class(erdos_renyi(n, p, seed))
    if c.kind is Connectivity.STRONG:
        assert c.sinks == () and c.sources == ()


def test_is_dag():
    assert is_dag(path_graph(3))
    assert not is_dag(cycle_graph(3))
    assert not is_dag(DiGraph(2, ((0, 0, 1.0),)))
    for seed in range(10):
        g = random_dag(30, 0.2, seed)
        assert is_dag(g)
        assert np.abs(np.linalg.eigvals(adjacency(g))).max() <= 1e-8


def test_normalize_examples():
    C = adjacency(cycle_graph(3))
    assert_allclose(normalize(C), C, atol=1e-14)
    assert_allclose(normalize(2 * C), C, atol=1e-14)
    with pytest.raises(ZeroSpectralRadius):
        normalize(np.triu(np.ones((3, 3)), 1))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 25), seed=st.integers(0, 10**6))
def test_normalize_idempotent_and_unit_radius(n, seed):
    A = adjacency(erdos_renyi(n, 0.3, seed))
    if np.abs(np.linalg.eigvals(A)).max() <= 1e-10 * n:
        return
    An = normalize(A)
    assert_allclose(normalize(An), An, atol=1e-12)
    assert abs(np.abs(np.linalg.eigvals(An)).max() - 1) < 1e-6
