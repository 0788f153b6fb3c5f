"""Directed graphs: data model, random generation, structure and operators."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ZeroSpectralRadius


@dataclass(frozen=True)
class DiGraph:
    """Weighted directed graph on nodes ``0 .. n-1``.

    ``edges`` holds ``(src, dst, weight)`` triples. ``seed`` and ``p`` record
    how the graph was generated, when it was.
    """

    n: int
    edges: tuple = ()
    seed: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        edges = tuple((int(s), int(d), float(w)) for s, d, w in self.edges)
        seen = set()
        for s, d, w in edges:
            if not (0 <= s < self.n and 0 <= d < self.n):
                raise ValueError(f"edge ({s}, {d}) out of range for n={self.n}")
            if not w > 0:
                raise ValueError(f"edge ({s}, {d}) has non-positive weight {w}")
            if (s, d) in seen:
                raise ValueError(f"duplicate edge ({s}, {d})")
            seen.add((s, d))
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def out_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for s, _, _ in self.edges:
            deg[s] += 1
        return deg

    def in_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for _, d, _ in self.edges:
            deg[d] += 1
        return deg

    @classmethod
    def from_adjacency(cls, A, seed=None, p=None) -> "DiGraph":
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {A.shape}")
        if (A < 0).any():
            raise ValueError("adjacency entries must be nonnegative")
        src, dst = np.nonzero(A)
        edges = tuple(zip(src.tolist(), dst.tolist(), A[src, dst].tolist()))
        return cls(A.shape[0], edges, seed=seed, p=p)


def erdos_renyi(n: int, p: float, seed: int) -> DiGraph:
    """Unweighted Erdős–Rényi digraph without self-loops.

    Stream contract: a PCG64 generator seeded with ``seed`` draws one uniform
    number per ordered pair ``(i, j)``, ``i != j``, in row-major order; the
    edge is present iff the draw is ``< p``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    n = int(n)
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    keep = rng.random(rows.size) < p
    edges = tuple((int(i), int(j), 1.0) for i, j in zip(rows[keep], cols[keep]))
    return DiGraph(n, edges, seed=seed, p=float(p))


def adjacency(g: DiGraph) -> np.ndarray:
    """Dense adjacency with ``A[i, j]`` the weight of edge ``i -> j``."""
    A = np.zeros((g.n, g.n))
    for s, d, w in g.edges:
        A[s, d] = w
    return A


def degree_matrix(A) -> np.ndarray:
    """``diag(A @ 1)``: out-degrees for a directed adjacency."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return np.diag(A.sum(axis=1))


class Connectivity(enum.Enum):
    STRONG = "strongly_connected"
    WEAK = "weakly_connected"
    DISCONNECTED = "disconnected"


@dataclass(frozen=True)
class ConnectivityClass:
    kind: Connectivity
    sinks: tuple = field(default=())
    sources: tuple = field(default=())


def _csgraph(g: DiGraph) -> csr_matrix:
    if not g.edges:
        return csr_matrix((g.n, g.n))
    s, d, w = zip(*g.edges)
    return csr_matrix((w, (s, d)), shape=(g.n, g.n))


def connectivity_class(g: DiGraph) -> ConnectivityClass:
    """Strong/weak connectivity plus sink (out-degree 0) and source (in-degree 0) lists.

    A single node is treated as trivially strongly connected and is neither
    sink nor source.
    """
    if g.n == 1:
        return ConnectivityClass(Connectivity.STRONG)
    C = _csgraph(g)
    n_strong, _ = connected_components(C, directed=True, connection="strong")
    n_weak, _ = connected_components(C, directed=True, connection="weak")
    if n_strong == 1:
        kind = Connectivity.STRONG
    elif n_weak == 1:
        kind = Connectivity.WEAK
    else:
        kind = Connectivity.DISCONNECTED
    sinks = tuple(np.flatnonzero(g.out_degrees() == 0).tolist())
    sources = tuple(np.flatnonzero(g.in_degrees() == 0).tolist())
    return ConnectivityClass(kind, sinks, sources)


def is_dag(g: DiGraph) -> bool:
    """True iff the graph has no directed cycle (self-loops count as cycles)."""
    if any(s == d for s, d, _ in g.edges):
        return False
    n_strong, _ = connected_components(_csgraph(g), directed=True, connection="strong")
    return n_strong == g.n


def zero_radius_tol(n: int) -> float:
    return 1e-10 * n


def normalize(A, tol: Optional[float] = None) -> np.ndarray:
    """Scale ``A`` by its spectral radius so all eigenvalue magnitudes lie in [0, 1].

    Raises ``ZeroSpectralRadius`` when ``rho(A) <= tol`` (default ``1e-10 * n``),
    which is the case for every DAG.
    """
    from .spectral import spectral_radius

    A = np.asarray(A)
    rho = spectral_radius(A)
    if tol is None:
        tol = zero_radius_tol(A.shape[0])
    if rho <= tol:
        raise ZeroSpectralRadius(f"spectral radius {rho:.3e} <= {tol:.3e}; operator is nilpotent")
    return A / rho


def random_dag(n: int, p: float, seed: int) -> DiGraph:
    """Random DAG: Erdős–Rényi edges kept only when they go forward in a random topological order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rank = rng.permutation(n)
    g = erdos_renyi(n, p, seed)
    edges = tuple(e for e in g.edges if rank[e[0]] < rank[e[1]])
    return DiGraph(n, edges, seed=seed, p=p)


def cycle_graph(n: int) -> DiGraph:
    return DiGraph(n, tuple((i, (i + 1) % n, 1.0) for i in range(n)))


def path_graph(n: int, directed: bool = True) -> DiGraph:
    edges = [(i, i + 1, 1.0) for i in range(n - 1)]
    if not directed:
        edges += [(i + 1, i, 1.0) for i in range(n - 1)]
    return DiGraph(n, tuple(edges))


def from_edges(n: int, pairs: Sequence) -> DiGraph:
    return DiGraph(n, tuple((s, d, 1.0) for s, d in pairs))
