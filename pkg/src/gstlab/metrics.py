"""Comparison instruments: cross-subspace orthogonality, invariance and annihilation
residuals, and the dispersion of subspace dimensions."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dw import DwBasis
from .gst import AnnihilatorPolynomial, GstBasis

HIST_WIDTH = 0.02


def _blocks_of(basis) -> tuple:
    if isinstance(basis, (GstBasis, DwBasis)):
        return tuple(basis.blocks)
    return tuple(np.atleast_2d(np.asarray(b)) for b in basis)


def _column_eigenvalues(basis) -> Optional[np.ndarray]:
    if isinstance(basis, GstBasis):
        return np.concatenate([np.asarray(e, dtype=complex) for e in basis.eigenvalues])
    return None


@dataclass(frozen=True)
class OrthogonalityStats:
    """Statistics of ``|b_ij|`` over ordered column pairs from different blocks.

    ``pairs`` is a structured array with fields ``i``, ``j``, ``abs_inner``
    and ``eig_distance`` (``||lambda_i| - |lambda_j||``, NaN when the basis
    carries no eigenvalues).
    """

    mu: float
    m: float
    n: int
    pairs: np.ndarray
    argmax: Optional[tuple]

    def fraction_above(self, threshold: float) -> float:
        if self.n == 0:
            return 0.0
        return float(np.count_nonzero(self.pairs["abs_inner"] > threshold) / self.n)

    def histogram(self, width: float = HIST_WIDTH) -> tuple:
        """Counts of ``|b_ij|`` in bins ``[k w, (k+1) w)`` covering ``[0, 1]``."""
        nb = int(np.ceil(1.0 / width - 1e-9))
        edges = np.arange(nb + 1) * width
        v = np.clip(self.pairs["abs_inner"], 0.0, edges[-1] - 1e-15)
        counts = np.bincount(np.minimum((v / width).astype(int), nb - 1), minlength=nb)
        return edges, counts

    def pairs_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,j,abs_inner,eig_distance\n")
        for rec in self.pairs:
            buf.write(f"{rec['i']},{rec['j']},{rec['abs_inner']:.17g},{rec['eig_distance']:.17g}\n")
        buf.write(f"# summary mu={self.mu:.17g} m={self.m:.17g} n={self.n}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {"mu": self.mu, "m": self.m, "n": self.n, "argmax": list(self.argmax) if self.argmax else None}


PAIR_DTYPE = np.dtype([("i", np.int64), ("j", np.int64), ("abs_inner", float), ("eig_distance", float)])


def cross_orthogonality(basis, keep_pairs: bool = True) -> OrthogonalityStats:
    """Mean ``mu`` and maximum ``m`` of ``|b_ij|`` for ``B = U^H U`` across blocks.

    The pair count is ``n = N^2 - sum_k s_k^2``; entries inside a block are
    excluded from both statistics. A single block gives ``mu = m = 0``.
    """
    blocks = _blocks_of(basis)
    U = np.hstack(blocks)
    B = np.abs(U.conj().T @ U)
    labels = np.repeat(np.arange(len(blocks)), [b.shape[1] for b in blocks])
    cross = labels[:, None] != labels[None, :]
    n = int(cross.sum())
    if n == 0:
        return OrthogonalityStats(0.0, 0.0, 0, np.zeros(0, dtype=PAIR_DTYPE), None)
    ii, jj = np.nonzero(cross)
    vals = B[ii, jj]
    mu = float(vals.sum() / n)
    k = int(np.argmax(vals))
    eigs = _column_eigenvalues(basis)
    if eigs is not None:
        mag = np.abs(eigs)
        dists = np.abs(mag[ii] - mag[jj])
    else:
        dists = np.full(n, np.nan)
    if keep_pairs:
        pairs = np.empty(n, dtype=PAIR_DTYPE)
        pairs["i"], pairs["j"], pairs["abs_inner"], pairs["eig_distance"] = ii, jj, vals, dists
    else:
        pairs = np.zeros(0, dtype=PAIR_DTYPE)
    dist = float(dists[k])
    return OrthogonalityStats(mu, float(vals[k]), n, pairs, (int(ii[k]), int(jj[k]), float(vals[k]), dist))


def invariance_residual(basis, A) -> list:
    """``||(I - U_k U_k^H) A U_k||_F`` for every (orthonormal) block."""
    A = np.asarray(A)
    out = []
    for U in _blocks_of(basis):
        if U.shape[1] == 0:
            out.append(0.0)
            continue
        AU = A @ U
        out.append(float(np.linalg.norm(AU - U @ (U.conj().T @ AU))))
    return out


def annihilation_residual(basis: GstBasis, A) -> list:
    """``max_u ||P_k(A) u||_2`` over the columns of each block, factored evaluation."""
    A = np.asarray(A)
    out = []
    for U, eig in zip(basis.blocks, basis.eigenvalues):
        Y = AnnihilatorPolynomial(np.asarray(eig, dtype=complex)).apply(A, U)
        out.append(float(np.linalg.norm(Y, axis=0).max()))
    return out


def annihilation_bound(eigenvalues, tol: float = 1e-7) -> float:
    """``tol * prod (1 + |lambda|)`` over a group."""
    return float(tol * np.prod(1.0 + np.abs(np.asarray(eigenvalues))))


@dataclass(frozen=True)
class DimensionVariance:
    """Spread of subspace sizes around their reference means.

    ``variance`` is NaN and ``defined`` False when fewer than two subspaces
    exist.
    """

    method: str
    sizes: tuple
    means: tuple
    variance: float
    defined: bool


def dw_level_mean(N: int, eps: float, k: int) -> float:
    """Expected number of eigenvalues captured by level ``k``."""
    if k == 1:
        return float(N * eps)
    return float(N * (eps ** (1.0 / 2 ** (k - 1)) - eps ** (1.0 / 2 ** (k - 2))))


def subspace_dimension_variance(
    sizes: Sequence[int],
    method: str,
    N: int,
    M: Optional[int] = None,
    eps: Optional[float] = None,
    indices: Optional[Sequence[int]] = None,
) -> DimensionVariance:
    """Sample variance of subspace sizes against per-subspace expected sizes.

    GST: every subspace expects ``N / M`` eigenvalues and
    ``S^2 = sum (s_k - N/M)^2 / (M - 1)``.
    DW: level ``k`` expects ``mu_1 = N eps`` and
    ``mu_k = N (eps^(1/2^(k-1)) - eps^(1/2^(k-2)))``, and
    ``S^2 = sum (s_k - mu_k)^2 / (L - 1)``. ``indices`` gives the level number
    of each size (default ``1..L``).
    """
    sizes = tuple(int(s) for s in sizes)
    if any(s < 0 for s in sizes):
        raise ValueError("subspace sizes must be nonnegative")
    method = method.upper()
    if method == "GST":
        if M is None:
            M = len(sizes)
        if len(sizes) != M:
            raise ValueError(f"expected {M} sizes, got {len(sizes)}")
        if sum(sizes) != N:
            raise ValueError(f"sizes sum to {sum(sizes)}, expected N={N}")
        means = tuple(N / M for _ in sizes)
        count = M
    elif method == "DW":
        if eps is None:
            raise ValueError("DW variance needs eps")
        if indices is None:
            indices = range(1, len(sizes) + 1)
        indices = tuple(int(k) for k in indices)
        if len(indices) != len(sizes):
            raise ValueError("indices and sizes differ in length")
        means = tuple(dw_level_mean(N, eps, k) for k in indices)
        count = len(sizes)
    else:
        raise ValueError(f"method must be 'GST' or 'DW', got {method!r}")
    if count <= 1:
        return DimensionVariance(method, sizes, means, float("nan"), False)
    dev = np.asarray(sizes, dtype=float) - np.asarray(means)
    return DimensionVariance(method, sizes, means, float(np.sum(dev**2) / (count - 1)), True)
