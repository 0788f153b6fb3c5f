import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from gstlab.dw import DwBasis, build_dw, dw_eigen_range, eps_span_basis
from gstlab.graph import adjacency, erdos_renyi, normalize


def random_symmetric(n, seed, spread=None):
    """Symmetric operator with spectral radius 1 and known eigenpairs."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(-1, 1, n) if spread is None else spread(rng, n)
    lam[np.argmax(np.abs(lam))] = 1.0
    return Q @ np.diag(lam) @ Q.T, lam, Q


def check_blocks(basis: DwBasis):
    blocks = basis.blocks
    assert sum(b.shape[1] for b in blocks) == basis.n
    for i, Bi in enumerate(blocks):
        assert np.linalg.norm(Bi.conj().T @ Bi - np.eye(Bi.shape[1])) <= 1e-9
        for Bj in blocks[i + 1 :]:
            assert np.linalg.norm(Bi.conj().T @ Bj) <= 1e-9


# -- eps_span_basis -------------------------------------------------------------


def test_eps_span_identity_and_rank_one():
    B = eps_span_basis(np.eye(5), 1e-6)
    assert B.shape == (5, 5)
    assert_allclose(np.abs(B.T @ B), np.eye(5), atol=1e-14)
    v = np.array([0.6, 0.8, 0.0])
    B = eps_span_basis(np.tile(v[:, None], 4), 1e-6)
    assert B.shape == (3, 1)
    assert abs(abs(B[:, 0] @ v) - 1) < 1e-14


def test_eps_span_rank_three_plus_noise():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 12)) + 1e-9 * rng.standard_normal((30, 12))
    B = eps_span_basis(X, 1e-6)
    assert B.shape[1] == 3
    assert np.linalg.norm(X - B @ (B.T @ X), axis=0).max() <= 1e-6


def test_eps_span_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        eps_span_basis(np.eye(2), 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 15), m=st.integers(1, 15), eps=st.floats(1e-8, 0.5))
def test_eps_span_contract(seed, n, m, eps):
    X = np.random.default_rng(seed).standard_normal((n, m))
    B = eps_span_basis(X, eps)
    r = B.shape[1]
    assert r <= min(n, m)
    assert np.linalg.norm(B.T @ B - np.eye(r)) <= 1e-12 * max(r, 1)
    assert np.linalg.norm(X - B @ (B.T @ X), axis=0).max() <= eps * (1 + 1e-9)


# -- dw_eigen_range ---------------------------------------------------------------


def test_dw_eigen_range_examples():
    assert dw_eigen_range(1e-3, 1) == (0.0, 1e-3)
    lo, hi = dw_eigen_range(1e-3, 2)
    assert_allclose([lo, hi], [1e-3, 10**-1.5], rtol=1e-12)
    lo, hi = dw_eigen_range(1e-3, 3)
    assert_allclose([lo, hi], [10**-1.5, 10**-0.75], rtol=1e-12)
    with pytest.raises(ValueError):
        dw_eigen_range(1.5, 1)
    with pytest.raises(ValueError):
        dw_eigen_range(0.1, 0)


# -- build_dw --------------------------------------------------------------------


def test_dw_diagonal_operator():
    # powers are explicit: 0.1 drops below eps at level 1, 0.9^8 ~ 0.43 at level 4
    A = np.diag([0.1, 0.9, 1.0])
    basis = build_dw(A, 4, eps=0.5)
    check_blocks(basis)
    assert basis.indices == (1, 4)
    assert_allclose(np.abs(basis.levels[0][:, 0]), [1, 0, 0], atol=1e-14)
    assert_allclose(np.abs(basis.levels[1][:, 0]), [0, 1, 0], atol=1e-14)
    assert_allclose(np.abs(basis.terminal[:, 0]), [0, 0, 1], atol=1e-14)


def test_dw_identity_has_no_wavelets():
    basis = build_dw(np.eye(6), 3, eps=0.1)
    assert basis.L == 0 and basis.terminal.shape == (6, 6)
    check_blocks(basis)


def test_dw_random_symmetric_stops_early():
    A, _, _ = random_symmetric(60, 1)
    basis = build_dw(A, 30, eps=1e-5)
    assert basis.L < 30 and basis.depth < 30
    check_blocks(basis)


def test_dw_validation():
    with pytest.raises(ValueError):
        build_dw(np.ones((2, 3)), 2)
    with pytest.raises(ValueError):
        build_dw(np.eye(2), 0)
    with pytest.raises(ValueError):
        build_dw(np.eye(2), 2, eps=1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(5, 40), M=st.integers(1, 12))
def test_dw_graph_blocks_orthogonal_and_complete(seed, n, M):
    A = adjacency(erdos_renyi(n, min(1.0, 4 / n), seed))
    if np.abs(np.linalg.eigvals(A)).max() < 1e-6:
        return
    basis = build_dw(normalize(A), M)
    assert basis.L <= M and basis.depth <= M
    check_blocks(basis)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), eps=st.sampled_from([1e-3, 1e-2, 0.1]))
def test_dw_symmetric_invariance_and_localization(seed, eps):
    A, lam, Q = random_symmetric(40, seed)
    basis = build_dw(A, 12, eps)
    check_blocks(basis)
    for k, W in zip(basis.indices, basis.levels):
        # approximately annihilated by the level's dyadic power
        Ak = np.linalg.matrix_power(A, 2 ** (k - 1))
        assert np.linalg.norm(Ak @ W, axis=0).max() <= 10 * eps
        lo, hi = dw_eigen_range(eps, k)
        energy = np.linalg.norm(W.T @ Q, axis=0) ** 2
        for mag in np.abs(lam[energy >= 0.99]):
            assert lo / 2 <= mag <= 2 * hi


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), M=st.integers(2, 6), eps=st.sampled_from([1e-3, 1e-2, 0.1]))
def test_dw_early_stop_bound(seed, M, eps):
    # second magnitude below eps^(1/2^(M-2)) leaves one direction by level M-1
    cap = eps ** (1 / 2 ** (M - 2))

    def spread(rng, n):
        return rng.uniform(-cap, cap, n) * 0.999

    A, lam, _ = random_symmetric(20, seed, spread)
    assert np.sort(np.abs(lam))[-2] <= cap
    basis = build_dw(A, M, eps)
    assert basis.L < M
    check_blocks(basis)


def test_dw_json_roundtrip():
    A = normalize(adjacency(erdos_renyi(25, 0.15, 2)))
    basis = build_dw(A, 8)
    back = DwBasis.from_json(basis.to_json())
    assert back.indices == basis.indices and back.depth == basis.depth and back.eps == basis.eps
    for a, b in zip(back.blocks, basis.blocks):
        assert_allclose(a, b, rtol=0, atol=0)
    doc = basis.to_dict()
    assert all(list(dw_eigen_range(basis.eps, lv["index"])) == lv["range"] for lv in doc["levels"])
