"""Independent reference computations used by the test-suite.

Nothing here calls into gstlab; each oracle reaches its answer by a different
route (exact integer arithmetic, brute-force enumeration, explicit dense
products) from the code under test.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import sympy


def charpoly_laplace(A) -> np.ndarray:
    """Coefficients of det(xI - A), highest degree first, by cofactor expansion.

    Entries of ``xI - A`` are polynomials; the determinant is expanded along
    the first remaining row with memoization over the set of used columns.
    Exponential in ``n``: intended for ``n <= 9``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]

    def entry(i, j):
        c = np.array([-A[i, j]])
        if i == j:
            c = np.array([1.0 + 0j, -A[i, j]])
        return c

    @lru_cache(maxsize=None)
    def minor(row: int, cols: frozenset):
        if row == n:
            return (1.0 + 0j,)
        acc = np.zeros(1, dtype=complex)
        free = sorted(set(range(n)) - cols)
        for pos, j in enumerate(free):
            sub = np.array(minor(row + 1, cols | {j}))
            term = np.polymul(entry(row, j), sub)
            acc = np.polyadd(acc, term if pos % 2 == 0 else -term)
        return tuple(acc)

    return np.array(minor(0, frozenset()))


def charpoly_int(A) -> list:
    """Exact integer characteristic polynomial (highest first) by Faddeev-LeVerrier."""
    A = [[int(v) for v in row] for row in np.asarray(A)]
    n = len(A)

    def mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    coeffs = [1]
    Mk = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        Mk = mul(A, Mk)
        for i in range(n):
            Mk[i][i] += coeffs[-1]
        AM = mul(A, Mk)
        tr = sum(AM[i][i] for i in range(n))
        assert tr % k == 0
        coeffs.append(-tr // k)
    return coeffs


def _poly_at_matrix_int(coeffs, A) -> list:
    n = len(A)
    R = [[0] * n for _ in range(n)]
    for c in coeffs:
        R = [[sum(R[i][k] * A[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            R[i][i] += c
    return R


def diagonalizable_exact(A) -> bool:
    """Diagonalizability over C of an integer matrix, decided exactly.

    ``A`` is diagonalizable iff its minimal polynomial is squarefree, i.e.
    iff the squarefree part of the characteristic polynomial annihilates it.
    """
    x = sympy.Symbol("x")
    p = sympy.Poly(charpoly_int(A), x)
    q = sympy.quo(p, sympy.gcd(p, p.diff(x)))
    # q has rational coefficients with a common denominator; clear it
    coeffs = [sympy.Rational(c) for c in q.all_coeffs()]
    den = sympy.ilcm(*[c.q for c in coeffs])
    ints = [int(c * den) for c in coeffs]
    Ai = [[int(v) for v in row] for row in np.asarray(A)]
    R = _poly_at_matrix_int(ints, Ai)
    return all(v == 0 for row in R for v in row)


def jordan_multiplicities(A):
    """Exact {eigenvalue: (algebraic, geometric)} of a small integer matrix.

    Returns ``None`` unless the characteristic polynomial splits over the
    rationals; geometric multiplicities come from exact rational ranks.
    """
    x = sympy.Symbol("x")
    M = sympy.Matrix(np.asarray(A, dtype=int).tolist())
    n = M.shape[0]
    _, factors = sympy.factor_list(sympy.Poly(charpoly_int(A), x))
    out = {}
    for f, ma in factors:
        if f.degree() != 1:
            return None
        a, b = f.all_coeffs()
        lam = sympy.Rational(-b, a)
        out[complex(lam)] = (int(ma), n - (M - lam * sympy.eye(n)).rank())
    return out


def brute_force_cuts(mags, M: int) -> tuple:
    """Cut positions (0-based, boundary after position c) maximizing the sorted gap vector.

    Enumerates every (M-1)-subset of gap positions and keeps the subset whose
    gaps, sorted descending, are lexicographically largest; ties go to the
    lexicographically smallest position tuple.
    """
    mags = np.sort(np.asarray(mags, dtype=float))
    gaps = np.diff(mags)
    best, best_key = None, None
    for cuts in itertools.combinations(range(len(gaps)), M - 1):
        key = tuple(sorted((gaps[c] for c in cuts), reverse=True))
        if best_key is None or key > best_key:
            best, best_key = cuts, key
    return tuple(best)


def dense_polyval(coeffs_ascending, A) -> np.ndarray:
    """sum_k c_k A^k with explicit matrix powers."""
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(A)
    Pk = np.eye(A.shape[0], dtype=complex)
    for c in coeffs_ascending:
        out = out + c * Pk
        Pk = Pk @ A
    return out


def path_graph_eigvecs(n: int) -> tuple:
    """Eigenpairs of the undirected path on n nodes: 2cos(k pi/(n+1)), sin(jk pi/(n+1))."""
    k = np.arange(1, n + 1)
    vals = 2 * np.cos(k * np.pi / (n + 1))
    j = np.arange(1, n + 1)[:, None]
    V = np.sin(j * k[None, :] * np.pi / (n + 1))
    return vals, V / np.linalg.norm(V, axis=0)
