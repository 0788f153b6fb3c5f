import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_array_equal

from gstlab.graph import DiGraph, adjacency, erdos_renyi
from gstlab.graphio import (
    format_edge_list,
    load_graph,
    parse_edge_list,
    read_matrix_market,
    save_graph,
    write_matrix_market,
)


def test_parse_edge_list_defaults_and_comments():
    g = parse_edge_list("# header\nn 3\n0 1\n1 2 2.5  # weighted\n\n")
    assert g.n == 3
    assert g.edges == ((0, 1, 1.0), (1, 2, 2.5))


@pytest.mark.parametrize(
    "text",
    ["", "3\n0 1\n", "n 3\n0\n", "n 3\n0 1 2 3\n", "n 2\n0 5\n"],
)
def test_parse_edge_list_rejects(text):
    with pytest.raises(ValueError):
        parse_edge_list(text)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 20), p=st.floats(0, 1), seed=st.integers(0, 10**6))
def test_edge_list_roundtrip(n, p, seed):
    g = erdos_renyi(n, p, seed)
    h = parse_edge_list(format_edge_list(g))
    assert h.n == g.n and h.edges == g.edges


def test_matrix_market_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    A = (rng.random((9, 9)) < 0.3) * rng.uniform(0.1, 3, (9, 9))
    np.fill_diagonal(A, 0)
    write_matrix_market(A, tmp_path / "a.mtx")
    assert_array_equal(read_matrix_market(tmp_path / "a.mtx"), A)
    g = load_graph(tmp_path / "a.mtx")
    assert_array_equal(adjacency(g), A)


def test_save_and_load_both_formats(tmp_path):
    g = DiGraph(4, ((0, 1, 1.0), (1, 2, 0.5), (3, 0, 2.0)))
    for name in ("g.txt", "g.mtx"):
        save_graph(g, tmp_path / name)
        assert_array_equal(adjacency(load_graph(tmp_path / name)), adjacency(g))
