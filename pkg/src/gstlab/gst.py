"""Graph Schur Transform.

The normalized operator is brought to complex Schur form with eigenvalues in
ascending magnitude, the spectrum is cut at its ``M - 1`` largest magnitude
gaps, and for every group the Schur form is reordered so that the group comes
first. The leading columns of each reordered factor span an exactly invariant
subspace; stacking them gives the (generally non-unitary) transform ``U_S``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import IllConditionedError, PartitionError
from .spectral import (
    SchurFactorization,
    Spectrum,
    move_to_front,
    schur,
    sort_order,
    spectral_radius,
    split_coupling,
)

GAP_TOL = 1e-10
MAX_COUPLING = 1e8
MAX_CONDITION = 1e12
NORMALIZED_TOL = 1e-4


@dataclass(frozen=True)
class SpectralPartition:
    """Eigenvalues sorted by ascending magnitude, split into contiguous groups.

    ``cuts`` holds the 0-based positions ``c`` such that a boundary lies
    between sorted entries ``c`` and ``c + 1``; ``gaps`` are the magnitude
    jumps at those positions.
    """

    values: np.ndarray
    cuts: tuple
    gaps: tuple

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def M(self) -> int:
        return len(self.cuts) + 1

    @property
    def bounds(self) -> list:
        """``(start, stop)`` slices of the sorted values, one per group."""
        edges = [0] + [c + 1 for c in self.cuts] + [self.n]
        return list(zip(edges[:-1], edges[1:]))

    @property
    def sizes(self) -> tuple:
        return tuple(b - a for a, b in self.bounds)

    @property
    def groups(self) -> list:
        return [self.values[a:b] for a, b in self.bounds]

    def group(self, k: int) -> np.ndarray:
        if not 0 <= k < self.M:
            raise ValueError(f"group index must be in 0..{self.M - 1}, got {k}")
        a, b = self.bounds[k]
        return self.values[a:b]

    def labels(self) -> np.ndarray:
        """Group index of every sorted position."""
        return np.repeat(np.arange(self.M), self.sizes)


Admissible = Union[None, Sequence[bool], Callable[[int], bool]]


def _cut_sorted(values, M: int, admissible: Admissible = None, gap_tol: float = GAP_TOL) -> SpectralPartition:
    n = len(values)
    if int(M) != M or M < 1:
        raise ValueError(f"number of subspaces must be a positive integer, got {M!r}")
    if M > n:
        raise ValueError(f"number of subspaces M={M} exceeds the dimension N={n}")
    if M == 1:
        return SpectralPartition(values, (), ())
    mag = np.abs(values)
    gaps = np.diff(mag)
    tol = gap_tol * max(1.0, float(mag.max()))
    # largest gaps first; stable sort keeps the earlier position on ties
    candidates = [int(c) for c in np.argsort(-gaps, kind="stable") if gaps[c] > tol]
    if callable(admissible):
        check = admissible
    elif admissible is not None:
        mask = np.asarray(admissible, dtype=bool)
        check = lambda c: bool(mask[c])  # noqa: E731
    else:
        check = None
    chosen = []
    for c in candidates:
        if check is None or check(c):
            chosen.append(c)
            if len(chosen) == M - 1:
                break
    if len(chosen) < M - 1:
        raise PartitionError(
            f"only {len(chosen)} admissible magnitude gaps for M={M}; "
            "the spectrum cannot be split into that many groups"
        )
    chosen.sort()
    return SpectralPartition(values, tuple(chosen), tuple(float(gaps[c]) for c in chosen))


def partition_eigenvalues(spectrum, M: int, admissible: Admissible = None, gap_tol: float = GAP_TOL) -> SpectralPartition:
    """Split eigenvalues into ``M`` magnitude groups at the largest consecutive gaps.

    Parameters
    ----------
    spectrum : Spectrum or array_like
        Eigenvalues of the normalized operator.
    M : int
        Number of groups.
    admissible : bool mask or callable, optional
        Restricts which sorted cut positions may be used. Candidates are
        scanned in decreasing gap order and inadmissible ones are skipped.
    gap_tol : float
        Gaps at or below ``gap_tol * max(1, max|lambda|)`` are never cut, so
        conjugate pairs and exact repeats stay together.

    Raises
    ------
    ValueError
        If ``M`` is not in ``1..N``.
    PartitionError
        If fewer than ``M - 1`` usable gaps exist.
    """
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=complex)
    values = np.asarray(values, dtype=complex)
    return _cut_sorted(values[sort_order(values)], M, admissible, gap_tol)


@dataclass(frozen=True)
class AnnihilatorPolynomial:
    """Monic polynomial ``prod (x - r)`` kept in factored form."""

    roots: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.roots)

    @property
    def coefficients(self) -> np.ndarray:
        """Expanded coefficients, ascending powers (may lose accuracy at high degree)."""
        return np.polynomial.polynomial.polyfromroots(self.roots)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for r in self.roots:
            out = out * (z - r)
        return out

    def apply(self, A, x) -> np.ndarray:
        """``P(A) x`` by sequential shifted products."""
        y = np.asarray(x, dtype=complex)
        for r in self.roots:
            y = A @ y - r * y
        return y


def annihilator(partition: SpectralPartition, k: int) -> AnnihilatorPolynomial:
    """Annihilator of group ``k`` (0-based): roots are the group's eigenvalues with multiplicity."""
    return AnnihilatorPolynomial(np.array(partition.group(k), dtype=complex))


@dataclass(frozen=True)
class GainFilter:
    """Polynomial taking the constant value ``gains[k]`` on invariant subspace ``k``.

    Stored in Newton form on ``nodes`` (the eigenvalues, group by group):
    ``P(x) = sum_j newton[j] prod_{i<j} (x - nodes[i])``.

    ``condition`` bounds the first divided differences across groups relative
    to the largest gain; ``horner_condition`` is the amplification of the
    Newton representation itself, which governs matrix-vector evaluation.
    When the filter was designed from a :class:`GstBasis` it also carries the
    ordered Schur factorization of the operator, and :meth:`apply` evaluates
    ``P(A)`` in Schur coordinates by the block Parlett recurrence.
    """

    gains: np.ndarray
    nodes: np.ndarray
    newton: np.ndarray
    condition: float
    horner_condition: float = np.nan
    schur: Optional[SchurFactorization] = field(default=None, repr=False)
    bounds: Optional[tuple] = None

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.newton)
        return int(nz[-1]) if nz.size else 0

    @property
    def coefficients(self) -> np.ndarray:
        """Monomial coefficients, ascending powers."""
        P = np.polynomial.polynomial
        out = np.zeros(1, dtype=complex)
        basis = np.ones(1, dtype=complex)
        for j in range(self.degree + 1):
            out = P.polyadd(out, self.newton[j] * basis)
            basis = P.polymul(basis, [-self.nodes[j], 1.0])
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        d = self.degree
        y = np.full_like(z, self.newton[d])
        for i in range(d - 1, -1, -1):
            y = (z - self.nodes[i]) * y + self.newton[i]
        return y

    @cached_property
    def schur_matrix(self) -> np.ndarray:
        """``P(T)`` for the attached triangular factor (block Parlett recurrence)."""
        if self.schur is None:
            raise ValueError("filter carries no Schur factorization")
        return _block_parlett(self.schur.T, self.bounds, self.gains)

    def horner(self, A, x) -> np.ndarray:
        """``P(A) x`` by Newton-Horner matrix-vector products."""
        x = np.asarray(x, dtype=complex)
        d = self.degree
        y = self.newton[d] * x
        for i in range(d - 1, -1, -1):
            y = A @ y - self.nodes[i] * y + self.newton[i] * x
        return y

    def apply(self, A, x, method: str = "auto") -> np.ndarray:
        """``P(A) x``.

        ``method="schur"`` uses ``U P(T) U^H`` and requires ``A`` to be the
        operator the filter was designed for; ``"horner"`` uses matrix-vector
        products only; ``"auto"`` picks Schur evaluation when possible.
        """
        if method not in ("auto", "schur", "horner"):
            raise ValueError(f"unknown evaluation method {method!r}")
        use_schur = self.schur is not None and method != "horner"
        if use_schur and method == "auto":
            use_schur = _same_operator(A, self.schur)
        if not use_schur:
            if method == "schur":
                raise ValueError("Schur evaluation needs the operator the filter was designed for")
            return self.horner(A, x)
        U = self.schur.U
        return U @ (self.schur_matrix @ (U.conj().T @ np.asarray(x, dtype=complex)))


def _same_operator(A, F: SchurFactorization) -> bool:
    A = np.asarray(A)
    if A.shape != F.T.shape:
        return False
    return np.linalg.norm(A - F.reconstruct()) <= 1e-10 * max(np.linalg.norm(A), 1.0)


def _block_parlett(T, bounds, gains) -> np.ndarray:
    """Block upper-triangular ``P(T)`` with diagonal blocks ``gains[k] I``.

    Diagonal blocks are exact because ``P - gains[k]`` is a multiple of the
    block's characteristic polynomial. Off-diagonal blocks follow from
    ``P(T) T = T P(T)`` one Sylvester solve at a time.
    """
    n = T.shape[0]
    F = np.zeros((n, n), dtype=complex)
    sl = [slice(a, b) for a, b in bounds]
    for k, s in enumerate(sl):
        F[s, s] = gains[k] * np.eye(s.stop - s.start)
    for j in range(1, len(sl)):
        cj = sl[j]
        for i in range(j - 1, -1, -1):
            ci = sl[i]
            C = (gains[i] - gains[j]) * T[ci, cj]
            for l in range(i + 1, j):
                cl = sl[l]
                C = C + F[ci, cl] @ T[cl, cj] - T[ci, cl] @ F[cl, cj]
            X, scale, info = lapack.ztrsyl(T[ci, ci], T[cj, cj], C, isgn=-1)
            if info != 0 or scale == 0:
                raise IllConditionedError("Sylvester solve failed in filter evaluation", np.inf)
            F[ci, cj] = X / scale
    return F


def _divided_differences(nodes, values) -> np.ndarray:
    """Newton coefficients; a window whose values are all equal contributes 0.

    Equal values on coincident nodes are read as vanishing derivatives, which
    is the confluent (Hermite) limit for a locally constant target.
    """
    n = len(nodes)
    table = np.array(values, dtype=complex)
    coef = np.empty(n, dtype=complex)
    coef[0] = table[0]
    for j in range(1, n):
        num = table[1 : n - j + 1] - table[: n - j]
        den = nodes[j:] - nodes[: n - j]
        nxt = np.zeros(n - j, dtype=complex)
        live = num != 0
        if np.any(den[live] == 0):
            raise IllConditionedError("interpolation nodes from different groups coincide", np.inf)
        nxt[live] = num[live] / den[live]
        table = nxt
        coef[j] = table[0]
    return coef


def design_gain_filter(partition, gains, max_condition: float = MAX_CONDITION) -> GainFilter:
    """Minimal-degree polynomial with ``P = gains[k]`` on group ``k``.

    Every eigenvalue of group ``k`` is an interpolation node with value
    ``gains[k]``; repeated eigenvalues get vanishing derivatives, so
    ``P - gains[k]`` is divisible by the group annihilator and
    ``P(A) u = gains[k] u`` on the whole invariant subspace.

    Parameters
    ----------
    partition : SpectralPartition or GstBasis
        Passing a basis attaches its Schur factorization so the filter can be
        applied stably (see :meth:`GainFilter.apply`).
    gains : array_like, shape (M,)

    Raises
    ------
    IllConditionedError
        If nodes of different groups nearly coincide, i.e. the largest
        cross-group divided difference exceeds ``max_condition`` times the
        largest gain.
    """
    F = None
    if isinstance(partition, GstBasis):
        F = partition.schur
        partition = partition.partition
        if partition is None or F is None:
            raise ValueError("basis has no partition or Schur data (was it loaded from JSON?)")
    gains = np.asarray(gains, dtype=complex).ravel()
    if gains.shape != (partition.M,):
        raise ValueError(f"expected {partition.M} gains, got {gains.size}")
    if not np.isfinite(gains).all():
        raise ValueError("gains must be finite")
    nodes = np.asarray(partition.values, dtype=complex)
    labels = partition.labels()
    scale = max(float(np.abs(gains).max()), 1e-300)
    cross = labels[:, None] != labels[None, :]
    if cross.any():
        dist = np.abs(nodes[:, None] - nodes[None, :])[cross]
        jump = np.abs(gains[labels][:, None] - gains[labels][None, :])[cross]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(jump == 0, 0.0, jump / dist)
        cond = float(ratio.max() / scale)
    else:
        cond = 0.0
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedError(f"gain interpolation condition estimate {cond:.3e} exceeds {max_condition:.1e}", cond)
    newton = _divided_differences(nodes, gains[labels])
    weights = np.concatenate([[1.0], np.cumprod(1.0 + np.abs(nodes[:-1]))])
    hcond = float(np.sum(np.abs(newton) * weights) / scale)
    return GainFilter(gains, nodes, newton, cond, hcond, F, tuple(partition.bounds) if F is not None else None)


def apply_filter(A, poly, x, method: str = "auto") -> np.ndarray:
    """``P(A) x`` without forming powers of ``A``.

    ``poly`` is a :class:`GainFilter`, an :class:`AnnihilatorPolynomial`, or
    ascending monomial coefficients. Coefficient arrays and annihilators use
    Horner-type matrix-vector recursions; gain filters choose their
    evaluation through ``method`` (see :meth:`GainFilter.apply`).
    """
    A = np.asarray(A)
    x = np.asarray(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"operator is {A.shape} but signal has length {x.shape[0]}")
    if isinstance(poly, GainFilter):
        return poly.apply(A, x, method)
    if isinstance(poly, AnnihilatorPolynomial):
        return poly.apply(A, x)
    c = np.atleast_1d(np.asarray(poly))
    y = c[-1] * x
    for cm in c[-2::-1]:
        y = A @ y + cm * x
    return y


@dataclass(frozen=True)
class GstBasis:
    """Blocks ``U_1 .. U_M`` of the Graph Schur Transform and their provenance."""

    blocks: tuple
    eigenvalues: tuple
    operator: Optional[np.ndarray] = None
    partition: Optional[SpectralPartition] = None
    schur: Optional[SchurFactorization] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def M(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple:
        return tuple(b.shape[1] for b in self.blocks)

    @cached_property
    def U_S(self) -> np.ndarray:
        return np.hstack(self.blocks)

    @cached_property
    def annihilators(self) -> tuple:
        return tuple(AnnihilatorPolynomial(np.asarray(e, dtype=complex)) for e in self.eigenvalues)

    @cached_property
    def condition_estimate(self) -> float:
        return float(np.linalg.cond(self.U_S))

    @cached_property
    def _lu(self):
        return scipy.linalg.lu_factor(self.U_S, check_finite=False)

    def to_dict(self) -> dict:
        groups = []
        for vals, blk in zip(self.eigenvalues, self.blocks):
            flat = np.asarray(blk).ravel(order="F")
            groups.append(
                {
                    "eigenvalues": [[float(v.real), float(v.imag)] for v in vals],
                    "block": [[float(v.real), float(v.imag)] for v in flat],
                }
            )
        return {"n": self.n, "M": self.M, "groups": groups, "condition_estimate": self.condition_estimate}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "GstBasis":
        n = int(doc["n"])
        blocks, eigs = [], []
        for g in doc["groups"]:
            vals = np.array([complex(re, im) for re, im in g["eigenvalues"]])
            flat = np.array([complex(re, im) for re, im in g["block"]])
            blocks.append(flat.reshape((n, len(vals)), order="F"))
            eigs.append(vals)
        if len(blocks) != int(doc["M"]):
            raise ValueError("group count does not match M")
        return cls(tuple(blocks), tuple(eigs))

    @classmethod
    def from_json(cls, text: str) -> "GstBasis":
        return cls.from_dict(json.loads(text))


def build_gst(A_norm, M: int, max_coupling: float = MAX_COUPLING, gap_tol: float = GAP_TOL) -> GstBasis:
    """Build the ``M``-block Graph Schur Transform of a normalized operator.

    Parameters
    ----------
    A_norm : (N, N) array_like
        Operator scaled so its spectral radius is 1 (see ``graph.normalize``).
    M : int
        Number of invariant subspaces.
    max_coupling : float
        A magnitude gap is only used as a boundary if the Sylvester coupling
        ``||X||_F`` of the corresponding Schur split is at most this value.
        This rejects cuts through a cluster of eigenvalues that rounding has
        spread apart (typically a defective zero eigenvalue), which would
        produce nearly parallel blocks.

    Returns
    -------
    GstBasis
        Exactly ``M`` blocks; block ``k`` spans the invariant subspace of the
        ``k``-th smallest-magnitude group.
    """
    A = np.asarray(A_norm)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    rho = spectral_radius(A)
    if abs(rho - 1.0) > NORMALIZED_TOL:
        raise ValueError(f"operator is not normalized: spectral radius {rho:.12g}")
    F = schur(A, "ascending")
    diag = F.order

    def admissible(c: int) -> bool:
        return split_coupling(F.T, c + 1) <= max_coupling

    part = _cut_sorted(diag, M, admissible, gap_tol)
    labels = part.labels()
    blocks, eigs = [], []
    for k, (a, b) in enumerate(part.bounds):
        if k == 0:
            G = F
        else:
            G = move_to_front(F, labels == k)
        blocks.append(G.U[:, : b - a].copy())
        eigs.append(np.diag(G.T)[: b - a].copy())
    return GstBasis(tuple(blocks), tuple(eigs), operator=A, partition=part, schur=F)


def gst_forward(basis: GstBasis, x, max_condition: float = MAX_CONDITION) -> np.ndarray:
    """Coefficients ``x~`` with ``U_S x~ = x`` (LU solve)."""
    x = np.asarray(x)
    if x.shape[0] != basis.n:
        raise ValueError(f"signal length {x.shape[0]} does not match N={basis.n}")
    cond = basis.condition_estimate
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedError(f"transform condition number {cond:.3e} exceeds {max_condition:.1e}", cond)
    return scipy.linalg.lu_solve(basis._lu, x.astype(complex), check_finite=False)


def gst_inverse(basis: GstBasis, coeffs) -> np.ndarray:
    """Synthesis ``x = U_S x~``."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != basis.n:
        raise ValueError(f"coefficient length {coeffs.shape[0]} does not match N={basis.n}")
    return basis.U_S @ coeffs
