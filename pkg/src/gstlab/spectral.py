"""Dense spectral kernels: eigenvalues, ordered complex Schur forms, rank and defectiveness.

The Schur machinery is LAPACK's (``zgees`` for the factorization, ``ztrexc``
and ``ztrsen`` for reordering, ``ztrsyl`` for block coupling). Everything is
kept in complex arithmetic so that any eigenvalue order can be realised on the
diagonal of ``T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.linalg import lapack
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError

CLUSTER_TOL = 1e-6
RANK_TOL = 1e-8
TIE_TOL = 1e-12


def _square(A, name="A") -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} has non-finite entries")
    return A


def sort_order(values, descending: bool = False, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Permutation sorting eigenvalues by magnitude.

    Magnitudes closer than ``tie_tol`` (relative to the largest) are ties and
    are ordered by real part, then imaginary part, both descending.
    """
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return np.zeros(0, dtype=int)
    mag = np.abs(values)
    order = np.argsort(-mag if descending else mag, kind="stable")
    tol = tie_tol * max(mag.max(), 1.0)
    out = []
    start = 0
    sm = mag[order]
    for i in range(1, len(order) + 1):
        if i == len(order) or abs(sm[i] - sm[i - 1]) > tol:
            chain = order[start:i]
            v = values[chain]
            out.extend(chain[np.lexsort((-v.imag, -v.real))])
            start = i
    return np.asarray(out, dtype=int)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicity."""

    values: np.ndarray

    def __len__(self):
        return len(self.values)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def sorted(self, descending: bool = False) -> "Spectrum":
        return Spectrum(self.values[sort_order(self.values, descending)])


def eigenvalues(A) -> Spectrum:
    """All eigenvalues of a square matrix (LAPACK ``geev`` with balancing)."""
    A = _square(A)
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    return Spectrum(np.asarray(w, dtype=complex))


def spectral_radius(A) -> float:
    A = _square(A)
    if A.shape[0] == 0:
        return 0.0
    return float(np.abs(eigenvalues(A).values).max())


@dataclass(frozen=True)
class SchurFactorization:
    """``A = U T U^H`` with ``U`` unitary and ``T`` upper triangular."""

    U: np.ndarray
    T: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def order(self) -> np.ndarray:
        """Eigenvalue sequence on the diagonal of ``T``."""
        return np.diag(self.T).copy()

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.T @ self.U.conj().T

    def residual(self, A) -> float:
        return float(np.linalg.norm(np.asarray(A) - self.reconstruct()))


OrderKey = Union[None, str, Callable]


def _ordering(values, order: OrderKey) -> Optional[np.ndarray]:
    if order is None:
        return None
    if order in ("ascending", "asc"):
        return sort_order(values)
    if order in ("descending", "desc"):
        return sort_order(values, descending=True)
    if callable(order):
        keys = [order(v) for v in values]
        return np.asarray(sorted(range(len(values)), key=lambda i: keys[i]), dtype=int)
    raise ValueError(f"unknown ordering {order!r}")


def schur(A, order: OrderKey = "ascending") -> SchurFactorization:
    """Complex Schur factorization with the diagonal of ``T`` sorted by ``order``.

    ``order`` is ``"ascending"`` / ``"descending"`` (by magnitude, with the
    tie rule of :func:`sort_order`), a per-eigenvalue key callable, or ``None``
    to keep LAPACK's order.
    """
    A = _square(A)
    try:
        T, U = scipy.linalg.schur(A.astype(complex), output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"Schur iteration failed: {exc}") from exc
    T = np.triu(T)
    F = SchurFactorization(U, T)
    perm = _ordering(np.diag(T), order)
    if perm is None:
        return F
    return reorder_schur(F, perm)


def reorder_schur(F: SchurFactorization, new_order: Sequence[int]) -> SchurFactorization:
    """Reorder the diagonal so that ``new T[j, j] == old T[new_order[j], new_order[j]]``.

    Realised by adjacent swaps (``ztrexc``); diagonal values move exactly.
    """
    n = F.n
    perm = np.asarray(new_order)
    if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
        raise ValueError("new_order must be a permutation of the diagonal positions")
    T = np.asfortranarray(F.T.astype(complex))
    U = np.asfortranarray(F.U.astype(complex))
    current = list(range(n))
    for j, p in enumerate(perm.tolist()):
        i = current.index(p)
        if i == j:
            continue
        T, U, info = lapack.ztrexc(T, U, i + 1, j + 1, overwrite_a=1, overwrite_q=1)
        if info != 0:
            raise ConvergenceError(f"ztrexc failed with info={info}")
        current.insert(j, current.pop(i))
    return SchurFactorization(np.ascontiguousarray(U), np.triu(np.ascontiguousarray(T)))


def move_to_front(F: SchurFactorization, select) -> SchurFactorization:
    """Move the selected diagonal entries to the leading positions (``ztrsen``).

    Relative order is preserved within the selected and within the unselected
    entries.
    """
    select = np.asarray(select, dtype=bool)
    if select.shape != (F.n,):
        raise ValueError("selection mask has the wrong length")
    ts, qs, _, _, _, _, info = lapack.ztrsen(select.astype(np.int32), F.T, F.U, job="N")
    if info != 0:
        raise ConvergenceError(f"ztrsen failed with info={info}")
    return SchurFactorization(qs, np.triu(ts))


def split_coupling(T, k: int) -> float:
    """Frobenius norm of ``X`` solving ``T11 X - X T22 = T12`` for the split after ``k``.

    Large values mean the leading ``k`` eigenvalues cannot be separated from
    the rest by a well-conditioned invariant subspace.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    if not 0 < k < n:
        raise ValueError(f"split position must be in 1..{n - 1}, got {k}")
    X, scale, info = lapack.ztrsyl(T[:k, :k], T[k:, k:], T[:k, k:], isgn=-1)
    if info != 0 or scale == 0:
        return np.inf
    return float(np.linalg.norm(X) / scale)


def numerical_rank(M, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int((s > tol * s[0]).sum())


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    algebraic: int
    geometric: int


@dataclass(frozen=True)
class DefectivenessReport:
    clusters: tuple

    @property
    def is_defective(self) -> bool:
        return any(c.geometric < c.algebraic for c in self.clusters)

    @property
    def deficiency(self) -> int:
        """Missing eigenvectors: ``sum(m_a - m_g)``."""
        return sum(c.algebraic - c.geometric for c in self.clusters)


def cluster_eigenvalues(values, cluster_tol: float = CLUSTER_TOL, scale: float = 1.0) -> list:
    """Single-linkage groups of eigenvalues closer than ``cluster_tol * scale``."""
    values = np.asarray(values, dtype=complex)
    close = np.abs(values[:, None] - values[None, :]) <= cluster_tol * scale
    _, labels = connected_components(close, directed=False)
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return [np.asarray(g) for g in sorted(groups.values(), key=lambda g: g[0])]


JORDAN_SPREAD = 10.0
MAX_RING = 1e-2


def _nullity(A, lam, rank_tol: float) -> int:
    n = A.shape[0]
    return n - numerical_rank(A - lam * np.eye(n), rank_tol)


def _merge_jordan_rings(A, w, groups, rank_tol: float, spread: float = JORDAN_SPREAD) -> list:
    """Merge fine clusters that are rounding images of one multiple eigenvalue.

    A Jordan block of size ``k`` is computed as a ring of ``k`` eigenvalues of
    radius about ``eps^(1/k) ||A||``, far outside any fixed clustering
    tolerance once ``k >= 3``. Around each fine cluster the ``k`` nearest
    eigenvalues form a candidate when the farthest lies within
    ``spread * eps^(1/k) ||A||_2``; the largest candidate whose mean makes ``A - lam I`` numerically singular
    replaces the fine clusters it covers (the mean of a genuine multiple
    eigenvalue is well conditioned, that of distinct eigenvalues is not).
    Rings wider than ``MAX_RING * ||A||_2`` (blocks of size above about 5)
    are indistinguishable from distinct eigenvalues and are left alone.
    """
    n = len(w)
    if n < 3:
        return groups
    eps = np.finfo(float).eps
    norm2 = float(np.linalg.norm(A, 2))
    label = np.empty(n, dtype=int)
    for g, idx in enumerate(groups):
        label[idx] = g
    taken = np.zeros(n, dtype=bool)
    out = []
    # visit larger fine clusters first: they anchor the rings
    for idx in sorted(groups, key=lambda g: (-len(g), g[0])):
        if taken[idx].any():
            continue
        center = w[idx].mean()
        order = np.argsort(np.abs(w - center), kind="stable")
        order = order[~taken[order]]
        dist = np.abs(w[order] - center)
        ks = np.arange(1, len(order) + 1)
        bound = spread * eps ** (1.0 / ks) * norm2
        fits = ks[(dist <= bound) & (ks > len(idx)) & (bound <= MAX_RING * norm2)]
        chosen = idx
        for kk in fits[::-1]:
            cand = order[:kk]
            lam = w[cand].mean()
            if np.abs(w[cand] - lam).max() > bound[kk - 1]:
                continue
            # only whole fine clusters may be merged
            if any(np.count_nonzero(label[cand] == g) != np.count_nonzero(label == g) for g in set(label[cand])):
                continue
            if _nullity(A, lam, rank_tol) >= 1:
                chosen = np.sort(cand)
                break
        taken[chosen] = True
        out.append(np.asarray(chosen))
    return sorted(out, key=lambda g: g[0])


def is_defective(A, cluster_tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL) -> DefectivenessReport:
    """Compare algebraic and geometric multiplicities cluster by cluster.

    Eigenvalues are clustered at distance ``cluster_tol`` relative to the
    spectral radius (or to ``||A||_inf`` when the radius is negligible), then
    clusters that form the rounding ring of a larger Jordan block are merged
    (see ``_merge_jordan_rings``). For a cluster of size ``m_a > 1`` with mean
    ``lam``, ``m_g = n - rank(A - lam I)`` clipped to ``[1, m_a]``;
    singletons have ``m_g = 1``.
    """
    A = _square(A)
    n = A.shape[0]
    w = eigenvalues(A).values
    rho = float(np.abs(w).max()) if n else 0.0
    scale = rho if rho > 1e-10 * n else float(np.abs(A).sum(axis=1).max(initial=0.0)) or 1.0
    groups = _merge_jordan_rings(A, w, cluster_eigenvalues(w, cluster_tol, scale), rank_tol)
    clusters = []
    for idx in groups:
        lam = w[idx].mean()
        ma = len(idx)
        if ma == 1:
            mg = 1
        else:
            mg = min(max(_nullity(A, lam, rank_tol), 1), ma)
        clusters.append(EigenCluster(complex(lam), ma, mg))
    return DefectivenessReport(tuple(clusters))


def eigenvector_rank(A, tol: float = RANK_TOL) -> int:
    """Numerical rank of the matrix of all computed eigenvectors of ``A``."""
    A = _square(A)
    try:
        _, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvector computation failed: {exc}") from exc
    return numerical_rank(V, tol)


def nilpotent_part(F) -> tuple:
    """Split ``T = D + N`` into its diagonal and strictly upper parts."""
    T = F.T if isinstance(F, SchurFactorization) else np.asarray(F)
    D = np.diag(np.diag(T))
    N = np.triu(T, 1)
    return D, N


def invariance_error(F: SchurFactorization, i: int) -> float:
    """Distance of ``A u_i`` from ``span(u_i)``: ``sqrt(sum_{j<i} |T_ji|^2)`` (1-based ``i``)."""
    if not 1 <= i <= F.n:
        raise ValueError(f"column index must be in 1..{F.n}, got {i}")
    return float(np.linalg.norm(F.T[: i - 1, i - 1]))


def taylor_terms(coeffs, D, N) -> list:
    """Graded pieces of ``P(D + N)`` by the number of ``N`` factors.

    ``coeffs`` are ascending monomial coefficients. Term ``k`` is the sum of
    all words in ``D`` and ``N`` containing ``N`` exactly ``k`` times, weighted
    by the coefficients of ``P``. Entry ``(i, j)`` of term ``k`` equals the sum
    over index chains ``i < s1 < ... < j`` of the ``N`` products times the
    ``k``-th divided difference of ``P`` on the visited diagonal entries, so
    when ``D`` commutes with ``N`` the term is ``P^(k)(D) N^k / k!``.
    Terms with ``k >= n`` vanish and are not returned.
    """
    c = np.atleast_1d(np.asarray(coeffs))
    D = np.asarray(D)
    N = np.asarray(N)
    n = D.shape[0]
    d = len(c) - 1
    kmax = min(d, n - 1)
    dtype = np.result_type(c, D, N, float)
    terms = [np.zeros((n, n), dtype=dtype) for _ in range(kmax + 1)]
    eye = np.eye(n, dtype=dtype)
    # graded Horner: S <- (D + N) S + c_m I, split by N-degree
    terms[0] = c[d] * eye
    for m in range(d - 1, -1, -1):
        new = [D @ terms[0] + c[m] * eye]
        for k in range(1, kmax + 1):
            new.append(D @ terms[k] + N @ terms[k - 1])
        terms = new
    return terms


def taylor_triangular_eval(coeffs, D, N) -> np.ndarray:
    """``P(D + N)`` assembled from :func:`taylor_terms`."""
    return sum(taylor_terms(coeffs, D, N))


def polyval_matrix(coeffs, A) -> np.ndarray:
    """Dense ``P(A)`` by Horner (test oracle; avoid for large degree)."""
    A = np.asarray(A)
    c = np.atleast_1d(np.asarray(coeffs))
    out = c[-1] * np.eye(A.shape[0], dtype=np.result_type(A, c, float))
    for cm in c[-2::-1]:
        out = A @ out + cm * np.eye(A.shape[0])
    return out
