"""Reproducible experiment runners: defectiveness surveys, rank histograms,
orthogonality statistics and subspace-dimension variances.

Every random quantity is derived from a master seed through
``SeedSequence(master, spawn_key=(cell, trial))``; work is spread over threads
but gathered by index, so results do not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .dw import DEFAULT_EPSILON, build_dw
from .errors import PartitionError, ZeroSpectralRadius
from .graph import Connectivity, DiGraph, adjacency, connectivity_class, erdos_renyi, normalize
from .gst import GAP_TOL, MAX_COUPLING, build_gst
from .metrics import HIST_WIDTH, cross_orthogonality, subspace_dimension_variance
from .spectral import CLUSTER_TOL, RANK_TOL, eigenvector_rank, is_defective, numerical_rank

log = logging.getLogger("gstlab")

SURVEY_SIZES = (100, 200)
SURVEY_FACTORS = (2, 4, 6, 8, 10)
FULL_SURVEY_SIZES = (100, 200, 300, 400)


# -- plumbing ---------------------------------------------------------------


def n_threads() -> int:
    """Worker cap from ``GSTLAB_THREADS`` (default: logical cores)."""
    raw = os.environ.get("GSTLAB_THREADS")
    if raw:
        try:
            k = int(raw)
        except ValueError:
            raise ValueError(f"GSTLAB_THREADS must be an integer, got {raw!r}") from None
        if k < 1:
            raise ValueError(f"GSTLAB_THREADS must be >= 1, got {k}")
        return k
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    """``[fn(x) for x in items]`` on a thread pool, results in input order."""
    items = list(items)
    threads = threads or n_threads()
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def trial_seed(master: int, cell: int, trial: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(int(cell), int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_graph(N: int, p_range: tuple, seed: int) -> DiGraph:
    """ER digraph with ``p ~ U[p_range]``; ``p`` and the graph seed both come from ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    lo, hi = p_range
    p = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    return erdos_renyi(N, p, int(rng.integers(0, 2**63)))


@dataclass(frozen=True)
class ToleranceBundle:
    cluster: float = CLUSTER_TOL
    rank: float = RANK_TOL
    gap: float = GAP_TOL
    coupling: float = MAX_COUPLING

    @classmethod
    def parse(cls, text: Optional[str]) -> "ToleranceBundle":
        """Parse ``"cluster=1e-6,rank=1e-8"``; unknown keys raise ``ValueError``."""
        if not text:
            return cls()
        vals = {}
        for item in text.split(","):
            if not item.strip():
                continue
            if "=" not in item:
                raise ValueError(f"tolerance entry {item!r} is not key=value")
            k, v = (s.strip() for s in item.split("=", 1))
            if k not in cls.__dataclass_fields__:
                raise ValueError(f"unknown tolerance {k!r} (known: {', '.join(cls.__dataclass_fields__)})")
            x = float(v)
            if not x > 0:
                raise ValueError(f"tolerance {k} must be positive, got {v}")
            vals[k] = x
        return cls(**vals)


@dataclass(frozen=True)
class SurveyConfig:
    """Grid of a defectiveness survey: ``p = factor / N`` for each size and factor."""

    sizes: tuple = SURVEY_SIZES
    factors: tuple = SURVEY_FACTORS
    trials: int = 200
    seed: int = 0
    tol: ToleranceBundle = field(default_factory=ToleranceBundle)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.sizes or any(int(n) < 1 for n in self.sizes):
            raise ValueError("sizes must be positive integers")
        if not self.factors or any(f < 0 for f in self.factors):
            raise ValueError("probability factors must be nonnegative")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "factors", tuple(self.factors))

    def to_dict(self) -> dict:
        return asdict(self)


def run_id(config: dict) -> str:
    """Content hash of a configuration, stable across runs."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else None
    return v


@dataclass
class ResultTable:
    """Rows of labelled values plus the metadata needed to regenerate them.

    ``wall_time`` is kept out of serialized output so that files are a pure
    function of configuration and seed.
    """

    title: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.title}\n")
        for k in sorted(self.metadata):
            buf.write(f"# {k}: {json.dumps(_jsonable(self.metadata[k]), sort_keys=True)}\n")
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "columns": list(self.columns),
            "rows": _jsonable(self.rows),
            "metadata": _jsonable(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w") as fh:
            fh.write(text)


def _meta(name: str, config: dict) -> dict:
    return {"experiment": name, "config": config, "run_id": run_id({"experiment": name, **config})}


# -- surveys ----------------------------------------------------------------


def defective_survey(config: SurveyConfig, threads: Optional[int] = None) -> ResultTable:
    """Percentage of defective ER adjacency matrices for each ``(N, p = k/N)`` cell."""
    t0 = time.perf_counter()
    cells = [(i, j, N, f) for i, N in enumerate(config.sizes) for j, f in enumerate(config.factors)]
    ncol = len(config.factors)
    jobs = [(c, t) for c in cells for t in range(config.trials)]
    tol = config.tol

    def run(job):
        (i, j, N, f), t = job
        g = erdos_renyi(N, min(1.0, f / N), trial_seed(config.seed, i * ncol + j, t))
        return is_defective(adjacency(g), tol.cluster, tol.rank).is_defective

    flags = parallel_map(run, jobs, threads)
    counts = np.zeros((len(config.sizes), ncol), dtype=int)
    for ((i, j, _, _), _), d in zip(jobs, flags):
        counts[i, j] += int(d)
    pct = 100.0 * counts / config.trials
    rows = [[N] + [float(v) for v in pct[i]] for i, N in enumerate(config.sizes)]
    columns = ["N"] + [f"{_fmt(f)}/N" for f in config.factors]
    meta = _meta("defective_survey", config.to_dict())
    meta["defective_counts"] = counts.tolist()
    table = ResultTable("Percentage of defective adjacency matrices", columns, rows, meta)
    table.wall_time = time.perf_counter() - t0
    log.info("defective survey: %d graphs in %.1fs", len(jobs), table.wall_time)
    return table


@dataclass(frozen=True)
class ConnectivityRates:
    counts: dict
    defective: dict

    def rate(self, kind: Connectivity) -> float:
        n = self.counts.get(kind.value, 0)
        return 100.0 * self.defective.get(kind.value, 0) / n if n else float("nan")

    @property
    def wcg_pct(self) -> float:
        return self.rate(Connectivity.WEAK)

    @property
    def scg_pct(self) -> float:
        return self.rate(Connectivity.STRONG)


def classify_corpus(graphs: Iterable[DiGraph], tol: ToleranceBundle = ToleranceBundle(), threads=None) -> ConnectivityRates:
    """Connectivity class and defectiveness tallies for a list of graphs.

    Weakly connected means weakly but not strongly connected.
    """
    graphs = list(graphs)

    def run(g):
        kind = connectivity_class(g).kind.value
        return kind, is_defective(adjacency(g), tol.cluster, tol.rank).is_defective

    counts = {k.value: 0 for k in Connectivity}
    defective = {k.value: 0 for k in Connectivity}
    for kind, d in parallel_map(run, graphs, threads):
        counts[kind] += 1
        defective[kind] += int(d)
    return ConnectivityRates(counts, defective)


def connectivity_survey(
    n_graphs: int = 300,
    size_range: tuple = (10, 200),
    p_range: tuple = (0.001, 0.2),
    seed: int = 0,
    tol: ToleranceBundle = ToleranceBundle(),
    threads: Optional[int] = None,
) -> tuple:
    """Defective percentages among weakly and strongly connected random graphs.

    Returns ``(wcg_pct, scg_pct, table)``.
    """
    if n_graphs < 1:
        raise ValueError("n_graphs must be >= 1")
    lo, hi = int(size_range[0]), int(size_range[1])
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid size range {size_range}")
    if not 0 <= p_range[0] <= p_range[1] <= 1:
        raise ValueError(f"invalid probability range {p_range}")

    def make(t):
        s = trial_seed(seed, 0, t)
        N = int(np.random.Generator(np.random.PCG64(s)).integers(lo, hi + 1))
        return sample_graph(N, p_range, trial_seed(seed, 1, t))

    graphs = parallel_map(make, range(n_graphs), threads)
    rates = classify_corpus(graphs, tol, threads)
    config = {"n_graphs": n_graphs, "size_range": [lo, hi], "p_range": list(p_range), "seed": seed, "tol": asdict(tol)}
    rows = [
        [k.value, rates.counts[k.value], rates.defective[k.value], rates.rate(k)]
        for k in Connectivity
    ]
    table = ResultTable(
        "Defective percentage by connectivity class",
        ["class", "graphs", "defective", "defective_pct"],
        rows,
        _meta("connectivity_survey", config),
    )
    return rates.wcg_pct, rates.scg_pct, table


# -- GST experiments --------------------------------------------------------


def _gst_corpus(
    N: int,
    Ms: Sequence[int],
    n_graphs: int,
    seed: int,
    cell: int,
    p_range: tuple,
    tol: ToleranceBundle,
    threads: Optional[int],
    work: Callable,
    max_attempts: Optional[int] = None,
) -> tuple:
    """Draw graphs in seed order until ``n_graphs`` admit a GST for every ``M``.

    ``work(trial, graph, A_norm, {M: basis})`` produces the per-graph record.
    Returns ``(records, skipped)`` with skip reasons counted.
    """
    max_attempts = max_attempts or 50 * n_graphs
    records, skipped = [], {"zero_spectral_radius": 0, "partition_infeasible": 0}
    t = 0
    while len(records) < n_graphs and t < max_attempts:
        batch = range(t, min(t + max(n_graphs - len(records), 1) * 2, max_attempts))

        def run(trial):
            g = sample_graph(N, p_range, trial_seed(seed, cell, trial))
            try:
                An = normalize(adjacency(g))
            except ZeroSpectralRadius:
                return "zero_spectral_radius"
            try:
                bases = {M: build_gst(An, M, tol.coupling, tol.gap) for M in Ms}
            except PartitionError:
                return "partition_infeasible"
            return work(trial, g, An, bases)

        for out in parallel_map(run, batch, threads):
            if isinstance(out, str):
                skipped[out] += 1
            elif len(records) < n_graphs:
                records.append(out)
        t = batch.stop
    if len(records) < n_graphs:
        log.warning("only %d of %d graphs usable at N=%d after %d draws", len(records), n_graphs, N, t)
    return records, skipped


@dataclass
class RankHistogram:
    """Per-graph ranks of the eigenvector matrix and of ``U_S``."""

    N: int
    M: int
    records: list
    skipped: dict
    table: ResultTable

    @property
    def ranks_eig(self) -> np.ndarray:
        return np.array([r["rank_eig"] for r in self.records])

    @property
    def ranks_gst(self) -> np.ndarray:
        return np.array([r["rank_gst"] for r in self.records])

    @property
    def defective(self) -> np.ndarray:
        return np.array([r["defective"] for r in self.records])

    def histograms(self) -> dict:
        """Counts per rank value ``0..N`` for both matrices."""
        return {
            "eig": np.bincount(self.ranks_eig, minlength=self.N + 1),
            "gst": np.bincount(self.ranks_gst, minlength=self.N + 1),
        }


def rank_histogram(
    n_graphs: int = 100,
    N: int = 100,
    M: int = 10,
    seed: int = 0,
    p_range: Optional[tuple] = None,
    tol: ToleranceBundle = ToleranceBundle(),
    threads: Optional[int] = None,
) -> RankHistogram:
    """Numerical rank of all-eigenvector matrices versus GST matrices.

    Graphs use ``p ~ U[1/N, 5/N]`` by default; zero-spectral-radius and
    partition-infeasible draws are replaced and counted.
    """
    p_range = p_range or (1.0 / N, 5.0 / N)

    def work(trial, g, An, bases):
        A = adjacency(g)
        return {
            "trial": trial,
            "p": g.p,
            "edges": g.num_edges,
            "defective": bool(is_defective(A, tol.cluster, tol.rank).is_defective),
            "rank_eig": eigenvector_rank(A, tol.rank),
            "rank_gst": numerical_rank(bases[M].U_S, tol.rank),
        }

    records, skipped = _gst_corpus(N, [M], n_graphs, seed, 0, p_range, tol, threads, work)
    config = {"n_graphs": n_graphs, "N": N, "M": M, "seed": seed, "p_range": list(p_range), "tol": asdict(tol)}
    meta = _meta("rank_histogram", config)
    meta["skipped"] = skipped
    cols = ["trial", "p", "edges", "defective", "rank_eig", "rank_gst"]
    table = ResultTable("Rank of eigenvector and GST matrices", cols, [[r[c] for c in cols] for r in records], meta)
    return RankHistogram(N, M, records, skipped, table)


def _divisor_M(N: int, d: int) -> int:
    return max(1, int(round(N / d)))


@dataclass
class OrthogonalityResult:
    summary: ResultTable
    histogram: ResultTable
    pairs: dict

    def cell(self, N: int, M: int) -> list:
        cols = self.summary.columns
        return [dict(zip(cols, r)) for r in self.summary.rows if r[0] == N and r[1] == M]

    def mean_mu(self, N: int, M: int) -> float:
        return float(np.mean([r["mu"] for r in self.cell(N, M)]))

    def fraction_above_02(self, N: int, M: int) -> float:
        """Pooled fraction of cross pairs with ``|b_ij| > 0.2`` in one cell."""
        rows = self.cell(N, M)
        n = sum(r["n"] for r in rows)
        return float(sum(r["n"] * r["frac_above_0.2"] for r in rows) / n)


def orthogonality_experiment(
    sizes: Sequence[int] = (50, 200, 500),
    divisors: Sequence[int] = (25, 10, 5),
    n_graphs: int = 15,
    seed: int = 0,
    p_range_factors: tuple = (1.0, 5.0),
    tol: ToleranceBundle = ToleranceBundle(),
    keep_pairs: bool = False,
    threads: Optional[int] = None,
) -> OrthogonalityResult:
    """Cross-subspace inner products of GST bases for ``M = N / d``.

    For each ``N`` the same graphs serve every ``M`` (graphs infeasible for
    any ``M`` are replaced). ``p ~ U[a/N, b/N]`` with ``(a, b) =
    p_range_factors``.
    """
    rows, hist_rows, pairs = [], [], {}
    skipped_all = {}
    nb = int(np.ceil(1.0 / HIST_WIDTH - 1e-9))
    for ci, N in enumerate(sizes):
        Ms = sorted({_divisor_M(N, d) for d in divisors})
        p_range = (p_range_factors[0] / N, p_range_factors[1] / N)

        def work(trial, g, An, bases):
            out = {}
            for M, B in bases.items():
                st = cross_orthogonality(B, keep_pairs=True)
                _, counts = st.histogram()
                out[M] = (st, counts)
            return trial, out

        records, skipped = _gst_corpus(N, Ms, n_graphs, seed, ci, p_range, tol, threads, work)
        skipped_all[str(N)] = skipped
        for M in Ms:
            pooled = np.zeros(nb, dtype=np.int64)
            for trial, out in records:
                st, counts = out[M]
                pooled += counts
                rows.append([N, M, trial, st.mu, st.m, st.n, st.fraction_above(0.2), st.argmax[0], st.argmax[1], st.argmax[3]])
                if keep_pairs:
                    pairs[(N, M, trial)] = st.pairs
            for b in range(nb):
                hist_rows.append([N, M, b * HIST_WIDTH, (b + 1) * HIST_WIDTH, int(pooled[b])])
    config = {
        "sizes": list(sizes),
        "divisors": list(divisors),
        "n_graphs": n_graphs,
        "seed": seed,
        "p_range_factors": list(p_range_factors),
        "tol": asdict(tol),
    }
    meta = _meta("orthogonality_experiment", config)
    meta["skipped"] = skipped_all
    summary = ResultTable(
        "Cross-subspace orthogonality of GST bases",
        ["N", "M", "trial", "mu", "m", "n", "frac_above_0.2", "argmax_i", "argmax_j", "argmax_eig_distance"],
        rows,
        meta,
    )
    hist = ResultTable("Histogram of |b_ij| over cross pairs", ["N", "M", "bin_lo", "bin_hi", "count"], hist_rows, dict(meta))
    return OrthogonalityResult(summary, hist, pairs)


def variance_experiment(
    sizes: Sequence[int] = (100,),
    divisors: Sequence[int] = (25, 10, 5),
    eps: float = DEFAULT_EPSILON,
    trials: int = 50,
    seed: int = 0,
    p_range_factors: tuple = (1.0, 5.0),
    tol: ToleranceBundle = ToleranceBundle(),
    threads: Optional[int] = None,
) -> ResultTable:
    """Mean subspace-dimension variances of GST and DW on shared graphs.

    One row per ``(N, method, M)``. GST rows report the variance around
    ``N/M``; DW rows use the non-empty levels and their level indices, and
    a DW run whose level count is at most one has undefined variance. The
    ``variance`` column is the mean over defined runs (NaN if none).
    """
    rows = []
    skipped_all = {}
    for ci, N in enumerate(sizes):
        Ms = sorted({_divisor_M(N, d) for d in divisors})
        p_range = (p_range_factors[0] / N, p_range_factors[1] / N)

        def work(trial, g, An, bases):
            out = {}
            for M, B in bases.items():
                gv = subspace_dimension_variance(B.sizes, "GST", N, M=M)
                D = build_dw(An, M, eps)
                dv = subspace_dimension_variance(D.sizes, "DW", N, eps=eps, indices=D.indices)
                out[M] = (B.M, gv, D.L, dv)
            return out

        records, skipped = _gst_corpus(N, Ms, trials, seed, ci, p_range, tol, threads, work)
        skipped_all[str(N)] = skipped
        for M in Ms:
            cell = [r[M] for r in records]
            g_var = [c[1].variance for c in cell if c[1].defined]
            rows.append([
                N, "GST", M, float(np.mean([c[0] for c in cell])),
                float(np.mean(g_var)) if g_var else float("nan"),
                len(g_var), len(cell), sum(c[0] == M for c in cell), "exact",
            ])
            d_var = [c[3].variance for c in cell if c[3].defined]
            Ls = [c[2] for c in cell]
            status = "collapsed" if all(L < M for L in Ls) else ("partial" if any(L < M for L in Ls) else "full")
            rows.append([
                N, "DW", M, float(np.mean(Ls)),
                float(np.mean(d_var)) if d_var else float("nan"),
                len(d_var), len(cell), sum(L == M for L in Ls), status,
            ])
    config = {
        "sizes": list(sizes),
        "divisors": list(divisors),
        "epsilon": eps,
        "trials": trials,
        "seed": seed,
        "p_range_factors": list(p_range_factors),
        "tol": asdict(tol),
    }
    meta = _meta("variance_experiment", config)
    meta["skipped"] = skipped_all
    return ResultTable(
        "Subspace-dimension variances",
        ["N", "method", "M_requested", "L_achieved", "variance", "defined_runs", "runs", "runs_reaching_M", "status"],
        rows,
        meta,
    )
