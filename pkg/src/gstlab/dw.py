"""Diffusion-wavelet baseline built from ε-span compression of dyadic operator powers.

Level ``j`` compresses the operator ``A^(2^(j-1))`` restricted to ``V_(j-1)``;
the retained directions form ``V_j`` and the discarded ones ``W_j``. The
blocks ``W_1, W_2, ...`` and the terminal ``V_L`` are mutually orthogonal and
together span the whole space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError

DEFAULT_EPSILON = 1e-3


def eps_span_basis(columns, eps: float) -> np.ndarray:
    """Orthonormal block whose span contains every input column to within ``eps``.

    Column-pivoted Gram-Schmidt: repeatedly take the column with the largest
    residual, normalize it, and deflate all residuals (two passes for
    orthogonality), until the largest residual norm is at most ``eps``.

    Parameters
    ----------
    columns : (n, m) array_like
    eps : float
        Projection tolerance, ``eps > 0``.

    Returns
    -------
    (n, r) ndarray
        ``r`` is the number of pivots taken.
    """
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    X = np.array(columns, dtype=np.result_type(columns, float), copy=True)
    if X.ndim == 1:
        X = X[:, None]
    n, m = X.shape
    Q = np.zeros((n, min(n, m)), dtype=X.dtype)
    r = 0
    while r < Q.shape[1]:
        res = np.linalg.norm(X, axis=0)
        i = int(np.argmax(res))
        if res[i] <= eps:
            break
        q = X[:, i] / res[i]
        # re-orthogonalize the pivot against the basis so far
        q = q - Q[:, :r] @ (Q[:, :r].conj().T @ q)
        nq = np.linalg.norm(q)
        if nq == 0:
            break
        q = q / nq
        Q[:, r] = q
        r += 1
        for _ in range(2):
            X -= np.outer(q, q.conj() @ X)
    return Q[:, :r]


def dw_eigen_range(eps: float, k: int) -> tuple:
    """Eigenvalue magnitudes that level ``k`` is expected to capture.

    ``(0, eps)`` for ``k = 1`` and ``(eps^(1/2^(k-2)), eps^(1/2^(k-1)))`` after.
    """
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    if int(k) != k or k < 1:
        raise ValueError(f"level must be a positive integer, got {k!r}")
    if k == 1:
        return (0.0, float(eps))
    return (float(eps ** (1.0 / 2 ** (k - 2))), float(eps ** (1.0 / 2 ** (k - 1))))


@dataclass(frozen=True)
class DwBasis:
    """Wavelet blocks ``W_k`` (with their level indices) and the terminal scaling block."""

    eps: float
    M: int
    levels: tuple
    indices: tuple
    terminal: np.ndarray
    depth: int

    @property
    def n(self) -> int:
        return self.terminal.shape[0]

    @property
    def L(self) -> int:
        """Number of non-empty wavelet levels."""
        return len(self.levels)

    @property
    def ranges(self) -> tuple:
        return tuple(dw_eigen_range(self.eps, k) for k in self.indices)

    @property
    def blocks(self) -> tuple:
        """``W`` blocks in level order followed by ``V_L`` when non-empty."""
        if self.terminal.shape[1]:
            return self.levels + (self.terminal,)
        return self.levels

    @property
    def sizes(self) -> tuple:
        return tuple(b.shape[1] for b in self.levels)

    @property
    def basis(self) -> np.ndarray:
        return np.hstack(self.blocks)

    def to_dict(self) -> dict:
        def enc(B):
            flat = np.asarray(B, dtype=complex).ravel(order="F")
            return [[float(v.real), float(v.imag)] for v in flat]

        return {
            "n": self.n,
            "M": self.M,
            "epsilon": self.eps,
            "L": self.L,
            "depth": self.depth,
            "levels": [
                {"index": k, "range": list(rg), "size": W.shape[1], "block": enc(W)}
                for k, rg, W in zip(self.indices, self.ranges, self.levels)
            ],
            "terminal": {"size": self.terminal.shape[1], "block": enc(self.terminal)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "DwBasis":
        n = int(doc["n"])

        def dec(cols, flat):
            v = np.array([complex(re, im) for re, im in flat])
            B = v.reshape((n, cols), order="F")
            return B.real.copy() if not np.any(B.imag) else B

        levels = tuple(dec(lv["size"], lv["block"]) for lv in doc["levels"])
        indices = tuple(int(lv["index"]) for lv in doc["levels"])
        term = dec(doc["terminal"]["size"], doc["terminal"]["block"])
        return cls(float(doc["epsilon"]), int(doc["M"]), levels, indices, term, int(doc["depth"]))

    @classmethod
    def from_json(cls, text: str) -> "DwBasis":
        return cls.from_dict(json.loads(text))


def build_dw(A_norm, M: int, eps: float = DEFAULT_EPSILON) -> DwBasis:
    """Diffusion-wavelet chain of at most ``M`` levels.

    Parameters
    ----------
    A_norm : (N, N) array_like
        Operator scaled by its spectral radius.
    M : int
        Maximum number of levels.
    eps : float
        ε-span precision.

    Notes
    -----
    The operator is kept compressed: with ``Q`` the ε-span basis at level
    ``j`` (columns of the current operator, ordered by singular value), the
    next operator is ``Q^H R^2 Q``, so level ``j`` acts as ``A^(2^(j-1))``.
    Levels whose complement is empty are skipped but still counted towards
    ``M``; the chain stops once ``V_j`` has dimension at most one.
    """
    A = np.asarray(A_norm)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    if int(M) != M or M < 1:
        raise ValueError(f"number of levels must be a positive integer, got {M!r}")
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    n = A.shape[0]
    dtype = np.result_type(A, float)
    Phi = np.eye(n, dtype=dtype)
    R = A.astype(dtype)
    levels, indices = [], []
    depth = 0
    for j in range(1, int(M) + 1):
        depth = j
        try:
            U, s, _ = np.linalg.svd(R)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"SVD failed at level {j}: {exc}") from exc
        Q = eps_span_basis(U * s, eps)
        r = Q.shape[1]
        if r < R.shape[0]:
            full, _ = np.linalg.qr(Q, mode="complete") if r else (np.eye(R.shape[0], dtype=dtype), None)
            comp = full[:, r:]
            levels.append(Phi @ comp)
            indices.append(j)
        Phi = Phi @ Q
        if r <= 1:
            break
        R = Q.conj().T @ (R @ (R @ Q))
    return DwBasis(float(eps), int(M), tuple(levels), tuple(indices), Phi, depth)
