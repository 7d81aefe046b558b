"""Command-line front end.

Subcommands: theory, connect, sweep-c, sweep-r, clique-scan, regularity,
protocol. Every run is deterministic in its flags; result documents go to
stdout and, with --out, to a file (CSV or JSON via --format). Timing goes
to stderr only, so emitted bytes are reproducible. Exit code 2 flags bad
arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import harness, theory
from .constructive import run_protocol
from .geometry import sample_points
from .graph_analysis import is_connected
from .irrigation import sample_irrigation
from .rgg import build_index
from .theory import TheoryParams

__all__ = ["main"]


def _add_radius_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=float, default=None, help="explicit visibility radius")
    p.add_argument("--delta", type=float, default=None, help="radius exponent: r = gamma * n^(-(1-delta)/d)")
    p.add_argument("--gamma", type=float, default=1.0, help="radius prefactor (with --delta)")
    p.add_argument("--penrose-mult", type=float, default=None,
                   help="radius as a multiple of the connectivity threshold radius")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--out", type=str, default=None, help="write the result document here")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irrigraph",
                                     description="irrigation-graph simulation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="print the model constants as JSON")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=None, help="enables the n-dependent outputs")
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("connect", help="single trial: sample one graph and test connectivity")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _add_radius_flags(p)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--protocol", action="store_true",
                   help="run the four-phase protocol and print its full report")
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("sweep-c", help="connectivity probability per budget c")
    _add_common_flags(p)
    _add_radius_flags(p)
    p.add_argument("--c-list", type=_int_list, required=True)

    p = sub.add_parser("sweep-r", help="connectivity probability per radius r")
    _add_common_flags(p)
    p.add_argument("--r-list", type=_float_list, required=True)
    p.add_argument("--c", type=int, default=None,
                   help="budget per vertex (omit for the unsparsified graph)")

    p = sub.add_parser("clique-scan", help="isolated (c+1)-clique frequencies")
    _add_common_flags(p)
    _add_radius_flags(p)
    p.add_argument("--c-list", type=_int_list, required=True)

    p = sub.add_parser("regularity", help="audit the point-regularity event")
    _add_common_flags(p)
    _add_radius_flags(p)

    p = sub.add_parser("protocol", help="batch four-phase protocol runs")
    _add_common_flags(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=1.0)

    return parser


def _emit(doc_text: str, out: str | None) -> None:
    sys.stdout.write(doc_text)
    if out:
        with open(out, "w") as fh:
            fh.write(doc_text)


def _emit_record(record: harness.ExperimentRecord, args) -> None:
    text = harness.record_to_csv(record) if args.format == "csv" else harness.record_to_json(record)
    _emit(text, args.out)
    if record.wall_time is not None:
        print(f"[{record.config.mode}] wall time {record.wall_time:.2f}s", file=sys.stderr)


def _radius_kwargs(args) -> dict:
    return {"r": args.r, "delta": args.delta, "gamma": args.gamma,
            "penrose_mult": args.penrose_mult}


def _cmd_theory(args) -> int:
    params = TheoryParams(delta=args.delta, eps=args.eps, d=args.d, gamma=args.gamma)
    plan = theory.budget_plan(params)
    doc = {
        "delta": args.delta,
        "eps": args.eps,
        "d": args.d,
        "k1": plan.k1,
        "k2": plan.k2,
        "k3": plan.k3,
        "c_total": plan.c_total,
        "alpha_d": plan.alpha_d,
        "p_d": plan.p_d,
        "cstar": None,
        "penrose_radius": None,
        "lower_bound_c": None,
    }
    if args.n is not None:
        doc["cstar"] = theory.cstar(args.n)
        doc["penrose_radius"] = theory.penrose_radius(args.n, args.d)
        r = theory.radius_from_delta(args.n, args.d, args.delta, args.gamma)
        if args.n * r**args.d > 1.0:
            lb = theory.lower_bound_c(args.n, r, args.d, args.eps)
            doc["lower_bound_c"] = None if math.isnan(lb) else lb
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _cmd_connect(args) -> int:
    start = time.perf_counter()
    if args.protocol:
        if args.delta is None:
            raise ValueError("--protocol needs --delta")
        points = sample_points(args.n, args.d, args.seed)
        params = TheoryParams(delta=args.delta, eps=args.eps, d=args.d,
                              gamma=args.gamma, n=args.n)
        report = run_protocol(points, params, args.seed)
        _emit(report.to_json() + "\n", args.out)
    else:
        cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="connectivity",
                                       c_values=(args.c,), trials=1, seed=args.seed,
                                       eps=args.eps, **_radius_kwargs(args))
        r = harness.resolve_radius(cfg)
        points = sample_points(args.n, args.d, args.seed)
        index = build_index(points, r)
        graph = sample_irrigation(index, [args.c], args.seed)
        doc = {"n": args.n, "d": args.d, "r": r, "c": args.c, "seed": args.seed,
               "connected": is_connected(graph.full_view())}
        _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)
    print(f"[connect] wall time {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0


def _cmd_sweep_c(args) -> int:
    cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="connectivity",
                                   c_values=args.c_list, trials=args.trials,
                                   seed=args.seed, eps=args.eps, **_radius_kwargs(args))
    _emit_record(harness.sweep_c(cfg), args)
    return 0


def _cmd_sweep_r(args) -> int:
    cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="sweep_r",
                                   c_values=(args.c,) if args.c is not None else (),
                                   trials=args.trials, seed=args.seed, eps=args.eps,
                                   r_values=args.r_list)
    _emit_record(harness.sweep_r(cfg), args)
    return 0


def _cmd_clique_scan(args) -> int:
    cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="clique_scan",
                                   c_values=args.c_list, trials=args.trials,
                                   seed=args.seed, eps=args.eps, **_radius_kwargs(args))
    _emit_record(harness.clique_scan(cfg), args)
    return 0


def _cmd_regularity(args) -> int:
    cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="regularity",
                                   trials=args.trials, seed=args.seed, eps=args.eps,
                                   **_radius_kwargs(args))
    _emit_record(harness.regularity_audit(cfg), args)
    return 0


def _cmd_protocol(args) -> int:
    cfg = harness.ExperimentConfig(n=args.n, d=args.d, mode="protocol",
                                   trials=args.trials, seed=args.seed, eps=args.eps,
                                   delta=args.delta, gamma=args.gamma)
    _emit_record(harness.protocol_batch(cfg), args)
    return 0


_COMMANDS = {
    "theory": _cmd_theory,
    "connect": _cmd_connect,
    "sweep-c": _cmd_sweep_c,
    "sweep-r": _cmd_sweep_r,
    "clique-scan": _cmd_clique_scan,
    "regularity": _cmd_regularity,
    "protocol": _cmd_protocol,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
