"""Edge-list and Matrix Market import/export."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import scipy.io
from scipy.sparse import coo_matrix

from .graph import DiGraph, adjacency


def parse_edge_list(text: str) -> DiGraph:
    """Parse ``n <count>`` followed by ``src dst [weight]`` lines (0-indexed).

    Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty edge list")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ValueError(f"edge list must start with 'n <count>', got {lines[0]!r}")
    n = int(head[1])
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"line {lineno}: expected 'src dst [weight]', got {ln!r}")
        w = float(parts[2]) if len(parts) == 3 else 1.0
        edges.append((int(parts[0]), int(parts[1]), w))
    return DiGraph(n, tuple(edges))


def format_edge_list(g: DiGraph) -> str:
    out = [f"n {g.n}"]
    out += [f"{s} {d} {w:.17g}" for s, d, w in g.edges]
    return "\n".join(out) + "\n"


def read_edge_list(path) -> DiGraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: DiGraph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def read_matrix_market(path) -> np.ndarray:
    M = scipy.io.mmread(str(path))
    A = M.toarray() if hasattr(M, "toarray") else np.asarray(M)
    if np.iscomplexobj(A):
        raise ValueError("complex Matrix Market files are not supported")
    return np.asarray(A, dtype=float)


def format_matrix_market(A) -> str:
    """Coordinate / real / general Matrix Market text for a dense matrix."""
    A = np.asarray(A, dtype=float)
    rows, cols = np.nonzero(A)
    out = ["%%MatrixMarket matrix coordinate real general", f"{A.shape[0]} {A.shape[1]} {rows.size}"]
    out += [f"{i + 1} {j + 1} {A[i, j]:.17g}" for i, j in zip(rows, cols)]
    return "\n".join(out) + "\n"


def write_matrix_market(A, path) -> None:
    Path(path).write_text(format_matrix_market(A))


def load_graph(path) -> DiGraph:
    """Load a graph from ``.mtx`` (Matrix Market) or an edge-list file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".mtx" or text.lstrip().startswith("%%MatrixMarket"):
        M = scipy.io.mmread(io.StringIO(text))
        M = coo_matrix(M)
        return DiGraph.from_adjacency(M.toarray())
    return parse_edge_list(text)


def save_graph(g: DiGraph, path) -> None:
    path = Path(path)
    if path.suffix == ".mtx":
        write_matrix_market(adjacency(g), path)
    else:
        write_edge_list(g, path)
