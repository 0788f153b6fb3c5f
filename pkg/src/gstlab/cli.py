"""Command-line entry point: ``gstlab <command> [options]``.

Exit status is 0 on success, 2 on invalid input (the offending option is
named) and 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import experiments as ex
from .dw import DEFAULT_EPSILON, build_dw
from .errors import NumericalError
from .graph import adjacency, connectivity_class, erdos_renyi, is_dag, normalize, random_dag
from .graphio import format_edge_list, format_matrix_market, load_graph
from .gst import build_gst, design_gain_filter
from .metrics import annihilation_residual, cross_orthogonality, invariance_residual
from .spectral import eigenvector_rank, is_defective, spectral_radius

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


def _int_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pair(kind):
    def parse(text: str):
        vals = (_int_list if kind is int else _float_list)(text)
        if len(vals) != 2:
            raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
        return tuple(vals)

    return parse


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _tol(text: str) -> ex.ToleranceBundle:
    try:
        return ex.ToleranceBundle.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


GLOBAL_DEFAULTS = {"seed": 0, "out": None, "format": "json", "tol": ex.ToleranceBundle(), "full": False, "verbose": False}


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, help="master random seed (default 0)")
    p.add_argument("--out", type=Path, help="directory for result files (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="result format (default json)")
    p.add_argument("--tol", type=_tol, help="tolerances, e.g. cluster=1e-6,rank=1e-8,gap=1e-10,coupling=1e8")
    p.add_argument("--full", action="store_true", help="use full-scale settings (1000 trials, larger graphs)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="gstlab", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common], description=help)

    p = add("gen", "generate a random digraph as an edge list or Matrix Market file")
    p.add_argument("--nodes", type=_positive_int, required=True)
    p.add_argument("--p", type=float, help="edge probability")
    p.add_argument("--factor", type=float, help="edge probability as factor/N")
    p.add_argument("--dag", action="store_true", help="keep only edges along a random topological order")
    p.add_argument("--mtx", action="store_true", help="write Matrix Market instead of an edge list")

    p = add("analyze", "structural and spectral summary of a graph")
    p.add_argument("--graph", type=Path, required=True)

    p = add("gst", "Graph Schur Transform basis of a graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--subspaces", type=_positive_int, required=True, metavar="M")

    p = add("dw", "diffusion-wavelet basis of a graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--subspaces", type=_positive_int, default=20, metavar="M", help="maximum number of levels")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)

    p = add("filter", "constant-gain filter on the GST subspaces of a graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--subspaces", type=_positive_int, required=True, metavar="M")
    p.add_argument("--gains", type=_float_list, required=True, help="M comma-separated gains")
    p.add_argument("--signal", type=Path, help="text file with N values (default: random from --seed)")

    p = add("survey-defective", "percentage of defective ER digraphs per (N, p=k/N)")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--factors", type=_float_list)
    p.add_argument("--trials", type=_positive_int)

    p = add("survey-connectivity", "defective rates of weakly versus strongly connected digraphs")
    p.add_argument("--graphs", type=_positive_int)
    p.add_argument("--size-range", type=_pair(int))
    p.add_argument("--p-range", type=_pair(float))

    p = add("rank-hist", "rank of eigenvector matrices versus GST matrices")
    p.add_argument("--graphs", type=_positive_int)
    p.add_argument("--nodes", type=_positive_int, default=100)
    p.add_argument("--subspaces", type=_positive_int, default=10, metavar="M")

    p = add("orthogonality", "cross-subspace inner products of GST bases")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--divisors", type=_int_list, default=[25, 10, 5], help="M = N / divisor")
    p.add_argument("--graphs", type=_positive_int)
    p.add_argument("--pairs", action="store_true", help="also write every pair record")

    p = add("variance", "subspace-dimension variances of GST and DW")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--divisors", type=_int_list, default=[25, 10, 5], help="M = N / divisor")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    return parser


# -- output -----------------------------------------------------------------


def _emit(args, name: str, payload) -> None:
    """Write ``payload`` (ResultTable, dict or str) to ``--out/name.ext`` or stdout."""
    if isinstance(payload, ex.ResultTable):
        text = payload.to_csv() if args.format == "csv" else payload.to_json()
        ext = args.format
    elif isinstance(payload, dict):
        text = json.dumps(ex._jsonable(payload), sort_keys=True, indent=1) + "\n"
        ext = "json"
    else:
        text, ext = str(payload), name.rsplit(".", 1)[-1] if "." in name else "txt"
        name = name.rsplit(".", 1)[0] if "." in name else name
    if args.out is None:
        sys.stdout.write(text)
        return
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{name}.{ext}").write_text(text)
    except OSError as exc:
        raise InputError("--out", str(exc)) from exc


def _load(args):
    try:
        return load_graph(args.graph)
    except (OSError, ValueError) as exc:
        raise InputError("--graph", str(exc)) from exc


def _normalized(g):
    return normalize(adjacency(g))


def _config(args, **extra) -> dict:
    return {"seed": args.seed, "tol": vars(args.tol), **extra}


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> None:
    if (args.p is None) == (args.factor is None):
        raise InputError("--p", "give exactly one of --p or --factor")
    p = args.p if args.p is not None else args.factor / args.nodes
    if not 0 <= p <= 1:
        raise InputError("--p" if args.p is not None else "--factor", f"edge probability {p} outside [0, 1]")
    g = random_dag(args.nodes, p, args.seed) if args.dag else erdos_renyi(args.nodes, p, args.seed)
    if args.mtx:
        _emit(args, "graph.mtx", format_matrix_market(adjacency(g)))
    else:
        _emit(args, "graph.txt", f"# erdos_renyi n={g.n} p={p:.17g} seed={args.seed}\n" + format_edge_list(g))


def cmd_analyze(args) -> None:
    g = _load(args)
    A = adjacency(g)
    cc = connectivity_class(g)
    rep = is_defective(A, args.tol.cluster, args.tol.rank)
    doc = {
        "n": g.n,
        "edges": g.num_edges,
        "connectivity": cc.kind.value,
        "sinks": list(cc.sinks),
        "sources": list(cc.sources),
        "dag": is_dag(g),
        "spectral_radius": spectral_radius(A),
        "defective": rep.is_defective,
        "deficiency": rep.deficiency,
        "eigenvector_rank": eigenvector_rank(A, args.tol.rank),
        "clusters": [
            {"value": [c.value.real, c.value.imag], "algebraic": c.algebraic, "geometric": c.geometric}
            for c in rep.clusters
            if c.algebraic > 1
        ],
        "config": _config(args, graph=str(args.graph)),
    }
    _emit(args, "analyze", doc)


def _gst_table(B, An, args) -> ex.ResultTable:
    inv = invariance_residual(B, An)
    ann = annihilation_residual(B, An)
    rows = []
    for k, (eig, r1, r2) in enumerate(zip(B.eigenvalues, inv, ann)):
        mag = np.abs(eig)
        rows.append([k, len(eig), float(mag.min()), float(mag.max()), r1, r2])
    return ex.ResultTable(
        "GST blocks",
        ["group", "size", "min_abs_eig", "max_abs_eig", "invariance_residual", "annihilation_residual"],
        rows,
        {"config": _config(args, graph=str(args.graph), M=args.subspaces), "condition_estimate": B.condition_estimate},
    )


def cmd_gst(args) -> None:
    g = _load(args)
    An = _normalized(g)
    try:
        B = build_gst(An, args.subspaces, args.tol.coupling, args.tol.gap)
    except ValueError as exc:
        raise InputError("--subspaces", str(exc)) from exc
    if args.format == "csv":
        _emit(args, "gst", _gst_table(B, An, args))
    else:
        _emit(args, "gst", B.to_dict())


def cmd_dw(args) -> None:
    g = _load(args)
    if not 0 < args.epsilon < 1:
        raise InputError("--epsilon", f"must lie in (0, 1), got {args.epsilon}")
    D = build_dw(_normalized(g), args.subspaces, args.epsilon)
    if args.format == "csv":
        rows = [[k, W.shape[1], lo, hi] for k, W, (lo, hi) in zip(D.indices, D.levels, D.ranges)]
        rows.append(["V", D.terminal.shape[1], float("nan"), float("nan")])
        meta = {"config": _config(args, graph=str(args.graph), M=args.subspaces, epsilon=args.epsilon), "L": D.L}
        _emit(args, "dw", ex.ResultTable("Diffusion-wavelet levels", ["level", "size", "range_lo", "range_hi"], rows, meta))
    else:
        _emit(args, "dw", D.to_dict())


def cmd_filter(args) -> None:
    g = _load(args)
    An = _normalized(g)
    if len(args.gains) != args.subspaces:
        raise InputError("--gains", f"expected {args.subspaces} values, got {len(args.gains)}")
    try:
        B = build_gst(An, args.subspaces, args.tol.coupling, args.tol.gap)
    except ValueError as exc:
        raise InputError("--subspaces", str(exc)) from exc
    f = design_gain_filter(B, args.gains)
    if args.signal is not None:
        try:
            x = np.loadtxt(args.signal, ndmin=1)
        except (OSError, ValueError) as exc:
            raise InputError("--signal", str(exc)) from exc
        if x.shape != (g.n,):
            raise InputError("--signal", f"expected {g.n} values, got {x.size}")
    else:
        x = np.random.Generator(np.random.PCG64(args.seed)).standard_normal(g.n)
    y = f.apply(An, x)
    action = [
        float(np.linalg.norm(f.apply(An, U) - gk * U, axis=0).max() / (1 + abs(gk)))
        for gk, U in zip(args.gains, B.blocks)
    ]
    doc = {
        "gains": args.gains,
        "degree": f.degree,
        "condition": f.condition,
        "horner_condition": f.horner_condition,
        "nodes": [[z.real, z.imag] for z in f.nodes],
        "newton": [[c.real, c.imag] for c in f.newton],
        "block_action_error": action,
        "input": [float(v) for v in x],
        "output": [[v.real, v.imag] for v in y],
        "config": _config(args, graph=str(args.graph), M=args.subspaces),
    }
    _emit(args, "filter", doc)


def cmd_survey_defective(args) -> None:
    sizes = args.sizes or (list(ex.FULL_SURVEY_SIZES) if args.full else list(ex.SURVEY_SIZES))
    factors = args.factors or list(ex.SURVEY_FACTORS)
    trials = args.trials or (1000 if args.full else 200)
    try:
        cfg = ex.SurveyConfig(tuple(sizes), tuple(factors), trials, args.seed, args.tol)
    except ValueError as exc:
        raise InputError("--sizes", str(exc)) from exc
    _emit(args, "survey_defective", ex.defective_survey(cfg))


def cmd_survey_connectivity(args) -> None:
    n = args.graphs or (1000 if args.full else 300)
    sizes = args.size_range or ((10, 550) if args.full else (10, 200))
    prange = args.p_range or (0.001, 0.2)
    try:
        _, _, table = ex.connectivity_survey(n, sizes, prange, args.seed, args.tol)
    except ValueError as exc:
        raise InputError("--size-range" if args.size_range else "--p-range", str(exc)) from exc
    _emit(args, "survey_connectivity", table)


def cmd_rank_hist(args) -> None:
    n = args.graphs or (500 if args.full else 100)
    if args.subspaces > args.nodes:
        raise InputError("--subspaces", f"M={args.subspaces} exceeds N={args.nodes}")
    res = ex.rank_histogram(n, args.nodes, args.subspaces, args.seed, tol=args.tol)
    _emit(args, "rank_hist", res.table)
    h = res.histograms()
    rows = [[r, int(h["eig"][r]), int(h["gst"][r])] for r in range(args.nodes + 1) if h["eig"][r] or h["gst"][r]]
    counts = ex.ResultTable("Rank histogram", ["rank", "eigenvector_matrix", "gst_matrix"], rows, dict(res.table.metadata))
    if args.out is not None:
        _emit(args, "rank_hist_counts", counts)


def cmd_orthogonality(args) -> None:
    sizes = args.sizes or ([50, 100, 150, 200, 300, 500] if args.full else [50, 200, 500])
    n = args.graphs or (100 if args.full else 15)
    res = ex.orthogonality_experiment(sizes, args.divisors, n, args.seed, tol=args.tol, keep_pairs=args.pairs)
    _emit(args, "orthogonality", res.summary)
    if args.out is not None:
        _emit(args, "orthogonality_hist", res.histogram)
        if args.pairs:
            for (N, M, trial), pairs in sorted(res.pairs.items()):
                lines = ["i,j,abs_inner,eig_distance"]
                lines += [f"{r['i']},{r['j']},{r['abs_inner']:.17g},{r['eig_distance']:.17g}" for r in pairs]
                _emit(args, f"pairs_N{N}_M{M}_t{trial}.csv", "\n".join(lines) + "\n")


def cmd_variance(args) -> None:
    sizes = args.sizes or ([50, 100, 150, 200, 300, 500] if args.full else [100])
    trials = args.trials or (100 if args.full else 50)
    if not 0 < args.epsilon < 1:
        raise InputError("--epsilon", f"must lie in (0, 1), got {args.epsilon}")
    _emit(args, "variance", ex.variance_experiment(sizes, args.divisors, args.epsilon, trials, args.seed, tol=args.tol))


COMMANDS = {
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "gst": cmd_gst,
    "dw": cmd_dw,
    "filter": cmd_filter,
    "survey-defective": cmd_survey_defective,
    "survey-connectivity": cmd_survey_connectivity,
    "rank-hist": cmd_rank_hist,
    "orthogonality": cmd_orthogonality,
    "variance": cmd_variance,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except InputError as exc:
        print(f"gstlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"gstlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"gstlab {args.command}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
