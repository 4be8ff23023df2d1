"""Command-line entry points: sampling, exact sums, saddlepoint checks, validation.

Subcommands
-----------
generate      draw graphs and write nodes.csv / edges.tsv / meta.json
exact         partition constants, exact edge moments, leading-edge joints, oracle
asymptotics   critical points, asymptotic edge means, Laplace vs exact comparison
configs       predicted small-configuration probabilities and empirical counts
validate      simulation suites with JSON and plot-ready TSV reports

Every run writes a meta.json echoing its effective configuration so the
run can be reproduced from the output directory alone.  All files are
written atomically (temp file, then rename) and contain no timestamps,
so repeated runs with the same seed are byte-identical.  Seeds resolve
in order: --seed flag, ACG_SEED environment variable, fresh random draw
(logged to stderr and recorded in meta.json).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from . import config_probability as cfg
from . import exact_kernel as kernel
from . import stats_validation as sv
from .degree_model import load_params, params_dict, require_consistent
from .errors import AcgError
from .sampler import DEFAULT_DELTA, generate_graph, write_sample

SUITES = ("node-lln", "edge-lln", "first-edges", "self-loops", "assortativity")


def _int_list(text: str) -> list:
    try:
        values = [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _halves(text: str, caster, what: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected '<minus>:<plus>' halves, got {text!r}")
    try:
        minus = [caster(tok) for tok in parts[0].split(",") if tok]
        plus = [caster(tok) for tok in parts[1].split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated {what}, got {text!r}")
    if not minus or len(minus) != len(plus):
        raise argparse.ArgumentTypeError("minus and plus halves must be equal nonempty lists")
    return minus, plus


def _margins_arg(text: str):
    """'1,2:1,2' -> in/out edge counts for degrees 1..K."""
    minus, plus = _halves(text, int, "integers")
    if min(minus) < 0 or min(plus) < 0:
        raise argparse.ArgumentTypeError("margin counts must be nonnegative")
    return minus, plus


def _point_arg(text: str):
    """'0.25,0.25:0.25,0.25' -> normalized margin point for degrees 1..K."""
    return _halves(text, float, "numbers")


def _type_arg(text: str):
    try:
        k, j = (int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'k,j' like 2,2, got {text!r}")
    return k, j


def _pairs_arg(text: str):
    """'1,2;2,1' -> list of integer pairs."""
    out = []
    for chunk in text.split(";"):
        if not chunk:
            continue
        try:
            a, b = (int(tok) for tok in chunk.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected 'a,b;a,b;...', got {text!r}")
        out.append((a, b))
    if not out:
        raise argparse.ArgumentTypeError("expected at least one pair")
    return out


def _resolve_seed(flag_value):
    if flag_value is not None:
        return int(flag_value), "flag"
    env = os.environ.get("ACG_SEED")
    if env is not None:
        try:
            return int(env), "env"
        except ValueError:
            raise AcgError(f"ACG_SEED must be an integer, got {env!r}")
    seed = secrets.randbits(32)
    print(f"no seed given; drew seed={seed}", file=sys.stderr)
    return seed, "generated"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(sv.to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _print_json(obj) -> None:
    print(json.dumps(sv.to_jsonable(obj), indent=2, sort_keys=True))


def _write_tsv(path: Path, header, rows) -> None:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_cell(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _cell(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _zero_slot(counts) -> np.ndarray:
    return np.concatenate([[0], np.asarray(counts, dtype=int)])


def _cmd_generate(args) -> int:
    p, q = load_params(args.params)
    require_consistent(p, q)
    seed, seed_source = _resolve_seed(args.seed)
    out = _out_dir(args)
    run_echo = {
        "command": "generate",
        "delta": args.delta,
        "max_redraws": args.max_redraws,
        "max_restarts": args.max_restarts,
        "n": args.n,
        "params_file": str(args.params),
        "samples": args.samples,
        "seed": seed,
        "seed_source": seed_source,
        "threads": args.threads,
    }
    _write_json(out / "params.json", params_dict(p, q))
    if args.samples > 1:
        _write_json(out / "meta.json", {**run_echo, "params": params_dict(p, q)})
    for i in range(args.samples):
        sample_seed = seed if args.samples == 1 else [seed, i]
        g = generate_graph(
            p,
            q,
            args.n,
            delta=args.delta,
            seed=sample_seed,
            max_redraws=args.max_redraws,
            max_restarts=args.max_restarts,
        )
        g.meta.update({"run": run_echo, "sample_index": i})
        target = out if args.samples == 1 else out / f"sample_{i:03d}"
        target.mkdir(parents=True, exist_ok=True)
        write_sample(g, target)
        print(f"wrote {target} ({g.n_nodes} nodes, {g.n_edges} edges)")
    return 0


def _cmd_exact(args) -> int:
    p, q = load_params(args.params)
    out = _out_dir(args)
    echo = {"cap": args.cap, "command": f"exact {args.action}", "params_file": str(args.params)}
    if args.action == "partition":
        em, ep = (_zero_slot(half) for half in args.margins)
        result = {
            "C": float(kernel.partition_C(em, ep, q, cap=args.cap)),
            "e_minus": em.tolist(),
            "e_plus": ep.tolist(),
            "log_partition": kernel.log_partition(em, ep, q, cap=args.cap),
        }
        _print_json(result)
        _write_json(out / "exact_partition.json", {**result, "run": echo})
    elif args.action in ("mean", "var"):
        em, ep = (_zero_slot(half) for half in args.margins)
        k, j = args.type
        fn = kernel.exact_edge_mean if args.action == "mean" else kernel.exact_edge_variance
        value = float(fn(em, ep, q, k, j, cap=args.cap))
        print(f"{value:.10f}")
        result = {
            "e_minus": em.tolist(),
            "e_plus": ep.tolist(),
            "run": echo,
            "type": [k, j],
            "value": value,
        }
        _write_json(out / f"exact_{args.action}.json", result)
    elif args.action == "joint":
        value = float(kernel.joint_first_M_prob(args.sequence, q, args.types, cap=args.cap))
        print(f"{value:.10f}")
        result = {
            "run": echo,
            "sequence": [list(t) for t in args.sequence],
            "types": [list(t) for t in args.types],
            "value": value,
        }
        _write_json(out / "exact_joint.json", result)
    else:
        dist = kernel.enumerate_wirings_oracle(args.sequence, q, cap=args.cap)
        tables = [
            {
                "probability": float(prob),
                "table": [list(map(int, row)) for row in key],
                "wirings": int(dist.wiring_counts[key]),
            }
            for key, prob in sorted(dist.tables.items())
        ]
        result = {
            "n_edges": dist.n_edges,
            "run": echo,
            "sequence": [list(t) for t in args.sequence],
            "tables": tables,
            "total_weight": float(dist.total_weight),
        }
        _print_json(result)
        _write_json(out / "exact_oracle.json", result)
    return 0


def _cmd_asymptotics(args) -> int:
    p, q = load_params(args.params)
    out = _out_dir(args)
    echo = {"command": f"asymptotics {args.action}", "params_file": str(args.params)}
    if args.action == "critical-point":
        x = asym.double_vector(np.asarray(args.x[0], float), np.asarray(args.x[1], float))
        res = asym.solve_critical_point(x, q, tol=args.tol, max_iter=args.max_iter)
        minus, plus = asym.split_parts(res.alpha)
        result = {
            "alpha_minus": minus.tolist(),
            "alpha_plus": plus.tolist(),
            "gradient_norm": res.gradient_norm,
            "h_at_min": res.h_at_min,
            "hessian_projected_det": res.hessian_projected_det,
            "iterations": res.iterations,
            "run": {**echo, "tol": args.tol, "x": [list(args.x[0]), list(args.x[1])]},
        }
        _print_json(result)
        _write_json(out / "asymptotics_critical_point.json", result)
    elif args.action == "edge-mean":
        x = asym.double_vector(np.asarray(args.x[0], float), np.asarray(args.x[1], float))
        k, j = args.type
        value = asym.asymptotic_edge_mean(x, q, k, j, tol=args.tol)
        print(f"{value:.10f}")
        result = {
            "run": {**echo, "tol": args.tol, "x": [list(args.x[0]), list(args.x[1])]},
            "type": [k, j],
            "value": value,
        }
        _write_json(out / "asymptotics_edge_mean.json", result)
    else:
        e = asym.double_vector(np.asarray(args.margins[0], float), np.asarray(args.margins[1], float))
        edge_total = int(round(float(np.sum(args.margins[0]))))
        log_lap = asym.log_laplace_I_approx(e, q, tol=args.tol)
        log_ex = None
        ratio = None
        if edge_total <= args.cap:
            log_ex = asym.log_exact_I(e, q, cap=args.cap)
            ratio = math.exp(log_ex - log_lap)
        result = {
            "edge_total": edge_total,
            "exact_over_laplace": ratio,
            "log_exact": log_ex,
            "log_laplace": log_lap,
            "run": {**echo, "cap": args.cap, "margins": [list(args.margins[0]), list(args.margins[1])]},
        }
        _print_json(result)
        _write_json(out / "asymptotics_laplace_check.json", result)
    return 0


def _load_config(path) -> cfg.ConfigurationTree:
    with open(path) as fh:
        return cfg.config_from_dict(json.load(fh))


def _cmd_configs(args) -> int:
    p, q = load_params(args.params)
    h = _load_config(args.config)
    out = _out_dir(args)
    if args.action == "predict":
        value = cfg.tree_config_prob(h, p, q)
        print(f"{value:.10f}")
        result = {
            "configuration": cfg.config_to_dict(h),
            "run": {"command": "configs predict", "config_file": str(args.config), "params_file": str(args.params)},
            "value": value,
        }
        _write_json(out / "configs_predict.json", result)
        return 0
    require_consistent(p, q)
    seed, seed_source = _resolve_seed(args.seed)
    graphs = [
        generate_graph(p, q, args.n, delta=args.delta, seed=[seed, i])
        for i in range(args.samples)
    ]
    report = cfg.count_in_graphs(graphs, h, p, q)
    result = {
        "configuration": cfg.config_to_dict(h),
        "count": report.count,
        "frequency": report.frequency,
        "graphs_scanned": report.graphs_scanned,
        "predicted": report.predicted,
        "run": {
            "command": "configs count",
            "config_file": str(args.config),
            "delta": args.delta,
            "n": args.n,
            "params_file": str(args.params),
            "samples": args.samples,
            "seed": seed,
            "seed_source": seed_source,
        },
    }
    _print_json(result)
    _write_json(out / "configs_count.json", result)
    return 0


def _suite_reps(args, default: int) -> int:
    return default if args.reps is None else args.reps


def _suite_n(args, default: int) -> int:
    return default if args.n is None else args.n


def _run_suite(suite, p, q, args, seed):
    if suite == "node-lln":
        rep = sv.node_lln(p, q, args.sizes, reps=_suite_reps(args, 5), seed=seed, delta=args.delta)
        rows = list(zip(rep.sizes, rep.max_deviations, rep.tv_distances))
        return rep, ("size", "max_deviation", "tv_distance"), rows, f"slope={rep.slope:.3f}"
    if suite == "edge-lln":
        rep = sv.edge_lln(p, q, args.sizes, reps=_suite_reps(args, 5), seed=seed, delta=args.delta)
        rows = list(zip(rep.sizes, rep.max_deviations, rep.tv_distances))
        return rep, ("size", "max_deviation", "tv_distance"), rows, f"slope={rep.slope:.3f}"
    if suite == "first-edges":
        rep = sv.first_edges_distribution(
            p, q, n=_suite_n(args, 10000), length=args.length, reps=_suite_reps(args, 2000), seed=seed, delta=args.delta
        )
        rows = [(rep.n, rep.chi_square, rep.p_value, rep.mutual_information)]
        return rep, ("n", "chi_square", "p_value", "mutual_information"), rows, f"p={rep.p_value:.4f}"
    if suite == "self-loops":
        rep = sv.self_loop_poisson(p, q, n=_suite_n(args, 2000), reps=_suite_reps(args, 200), seed=seed, delta=args.delta)
        rows = [(rep.n, rep.mean, rep.predicted, rep.var_mean_ratio, rep.z_score)]
        return rep, ("n", "mean", "predicted", "var_mean_ratio", "z_score"), rows, f"mean={rep.mean:.4f}"
    n = _suite_n(args, 10000)
    reps = _suite_reps(args, 20)
    coeffs = []
    for i in range(reps):
        g = generate_graph(p, q, n, delta=args.delta, seed=[seed, i])
        try:
            coeffs.append(sv.assortativity_coefficient(g))
        except AcgError:
            coeffs.append(None)
    usable = [c for c in coeffs if c is not None]
    rep = {
        "coefficients": coeffs,
        "mean_coefficient": float(np.mean(usable)) if usable else None,
        "n": n,
        "reps": reps,
        "seed": seed,
    }
    rows = [(i, c if c is not None else float("nan")) for i, c in enumerate(coeffs)]
    mean_txt = "nan" if rep["mean_coefficient"] is None else f"{rep['mean_coefficient']:.4f}"
    return rep, ("rep", "coefficient"), rows, f"mean={mean_txt}"


def _cmd_validate(args) -> int:
    p, q = load_params(args.params)
    require_consistent(p, q)
    seed, seed_source = _resolve_seed(args.seed)
    out = _out_dir(args)
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    _write_json(
        out / "meta.json",
        {
            "command": "validate",
            "delta": args.delta,
            "length": args.length,
            "n": args.n,
            "params": params_dict(p, q),
            "params_file": str(args.params),
            "reps": args.reps,
            "seed": seed,
            "seed_source": seed_source,
            "sizes": list(args.sizes),
            "suites": suites,
            "threads": args.threads,
        },
    )
    for suite in suites:
        rep, header, rows, summary = _run_suite(suite, p, q, args, seed)
        stem = "validate_" + suite.replace("-", "_")
        _write_json(out / f"{stem}.json", {"report": rep, "suite": suite})
        _write_tsv(out / f"{stem}.tsv", header, rows)
        print(f"{suite}: {summary} -> {out / (stem + '.json')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acg",
        description="Assortative configuration graphs: sampling, exact kernels, asymptotics, validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample graphs and write nodes.csv / edges.tsv / meta.json")
    gen.add_argument("--params", required=True, help="JSON parameter file with K, P, Q")
    gen.add_argument("--n", type=int, required=True, help="number of nodes")
    gen.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="clip exponent offset (default %(default)s)")
    gen.add_argument("--seed", type=int, default=None, help="RNG seed (default: ACG_SEED, else random, logged)")
    gen.add_argument("--samples", type=int, default=1, help="independent graphs to draw (default %(default)s)")
    gen.add_argument("--out-dir", default=".", help="output directory (default current)")
    gen.add_argument("--max-redraws", type=int, default=1000, help="node sequence redraw budget")
    gen.add_argument("--max-restarts", type=int, default=10, help="wiring restart budget per graph")
    gen.add_argument("--threads", type=int, default=1, help="accepted for compatibility; sampling is serial")
    gen.set_defaults(func=_cmd_generate)

    exact = sub.add_parser("exact", help="finite-size exact quantities from the wiring distribution")
    exact_sub = exact.add_subparsers(dest="action", required=True)
    for name, help_text in (
        ("partition", "partition constant for fixed margins"),
        ("mean", "exact mean of one edge-type count"),
        ("var", "exact variance of one edge-type count"),
        ("joint", "joint law of the first edge types for a node sequence"),
        ("oracle", "brute-force wiring enumeration for a node sequence"),
    ):
        sp = exact_sub.add_parser(name, help=help_text)
        sp.add_argument("--params", required=True)
        sp.add_argument("--out-dir", default=".")
        sp.add_argument(
            "--cap",
            type=int,
            default=kernel.ORACLE_CAP if name == "oracle" else kernel.DEFAULT_TABLE_CAP,
            help="edge-count cap for enumeration (default %(default)s)",
        )
        if name in ("partition", "mean", "var"):
            sp.add_argument("--margins", type=_margins_arg, required=True, help="counts for degrees 1..K, '1,2:1,2'")
        if name in ("mean", "var"):
            sp.add_argument("--type", type=_type_arg, required=True, help="edge type 'k,j'")
        if name in ("joint", "oracle"):
            sp.add_argument("--sequence", type=_pairs_arg, required=True, help="node types 'j,k;j,k;...'")
        if name == "joint":
            sp.add_argument("--types", type=_pairs_arg, required=True, help="leading edge types 'k,j;k,j;...'")
        sp.set_defaults(func=_cmd_exact, action=name)

    asy = sub.add_parser("asymptotics", help="saddlepoint quantities for large margins")
    asy_sub = asy.add_subparsers(dest="action", required=True)
    for name, help_text in (
        ("critical-point", "minimize the wiring exponent over the gauge-fixed slice"),
        ("edge-mean", "asymptotic per-edge fraction of one edge type"),
        ("laplace-check", "compare the Laplace approximation against exact enumeration"),
    ):
        sp = asy_sub.add_parser(name, help=help_text)
        sp.add_argument("--params", required=True)
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--tol", type=float, default=asym.DEFAULT_TOL, help="gradient tolerance (default %(default)s)")
        if name == "laplace-check":
            sp.add_argument("--margins", type=_margins_arg, required=True, help="counts for degrees 1..K, '1,2:1,2'")
            sp.add_argument("--cap", type=int, default=kernel.DEFAULT_TABLE_CAP, help="exact-side edge cap")
        else:
            sp.add_argument("--x", type=_point_arg, required=True, help="margin point 'a,b:c,d' for degrees 1..K")
        if name == "critical-point":
            sp.add_argument("--max-iter", type=int, default=asym.DEFAULT_MAX_ITER)
        if name == "edge-mean":
            sp.add_argument("--type", type=_type_arg, required=True, help="edge type 'k,j'")
        sp.set_defaults(func=_cmd_asymptotics, action=name)

    cfgp = sub.add_parser("configs", help="small-configuration probabilities and counts")
    cfg_sub = cfgp.add_subparsers(dest="action", required=True)
    pred = cfg_sub.add_parser("predict", help="limiting probability of a tree configuration")
    pred.add_argument("--params", required=True)
    pred.add_argument("--config", required=True, help="configuration JSON file")
    pred.add_argument("--out-dir", default=".")
    pred.set_defaults(func=_cmd_configs, action="predict")
    cnt = cfg_sub.add_parser("count", help="occurrence counts of a configuration in sampled graphs")
    cnt.add_argument("--params", required=True)
    cnt.add_argument("--config", required=True, help="configuration JSON file")
    cnt.add_argument("--n", type=int, required=True, help="nodes per sampled graph")
    cnt.add_argument("--samples", type=int, default=50, help="graphs to sample (default %(default)s)")
    cnt.add_argument("--seed", type=int, default=None)
    cnt.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    cnt.add_argument("--out-dir", default=".")
    cnt.set_defaults(func=_cmd_configs, action="count")

    val = sub.add_parser("validate", help="simulation test suites with JSON + TSV reports")
    val.add_argument("--params", required=True)
    val.add_argument("--suite", choices=SUITES + ("all",), required=True)
    val.add_argument("--sizes", type=_int_list, default=[1000, 10000], help="graph sizes for LLN suites")
    val.add_argument("--reps", type=int, default=None, help="repetitions (default depends on suite)")
    val.add_argument("--seed", type=int, default=None)
    val.add_argument("--n", type=int, default=None, help="graph size for non-LLN suites")
    val.add_argument("--length", type=int, default=1, help="leading edge count for first-edges")
    val.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    val.add_argument("--out-dir", default=".")
    val.add_argument("--threads", type=int, default=1, help="accepted for compatibility; suites run serially")
    val.set_defaults(func=_cmd_validate)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except (AcgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
