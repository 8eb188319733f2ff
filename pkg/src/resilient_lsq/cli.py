"""
Command-line front end.

Exit codes: 0 success / certified true, 1 certified false or not converged,
2 usage, parse or internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from . import analysis, scenarios
from .errors import ResilientLSQError
from .graph import (
    count_reduced_graphs,
    degree_witness,
    format_graph_text,
    is_resilient,
    kappa_min,
    min_in_degree_ok,
    parse_graph_text,
)
from .redundancy import global_solution_set, is_k_redundant, load_network, max_redundancy
from .sim import (
    ByzantineStrategy,
    load_scenario,
    run,
    save_scenario,
    validate,
    write_metrics_csv,
    write_trace_csv,
)

EXIT_OK, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


def _yn(flag):
    return "yes" if flag else "no"


def cmd_check_graph(args, out):
    with open(args.path) as fh:
        g = parse_graph_text(fh.read())
    r, s = args.r, args.s
    total = count_reduced_graphs(g, r, s)
    print(f"vertices: {g.n}, arcs: {len(g.arcs)}", file=out)
    print(f"reduced graphs: {total}", file=out)
    print(f"min in-degree >= r+s+1: {_yn(min_in_degree_ok(g, r, s))}", file=out)
    if degree_witness(g, r, s) is not None:
        print("resilient: no (degree)", file=out)
        return EXIT_FALSE
    if not is_resilient(g, r, s, cap=args.cap, prefilter=False):
        print("resilient: no", file=out)
        return EXIT_FALSE
    print("resilient: yes", file=out)
    print(f"kappa_{{{r},{s}}}: {kappa_min(g, r, s, cap=args.cap)}", file=out)
    return EXIT_OK


def cmd_check_redundancy(args, out):
    net = load_network(args.path)
    print(f"agents: {net.n}, d: {net.d}", file=out)
    status = EXIT_OK
    if args.k is not None:
        ok = is_k_redundant(net, args.k)
        print(f"{args.k}-redundant: {_yn(ok)}", file=out)
        status = EXIT_OK if ok else EXIT_FALSE
    print(f"max redundancy: {max_redundancy(net)}", file=out)
    return status


def _apply_overrides(config, args):
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "strategy", None) is not None:
        changes["strategy"] = ByzantineStrategy(**{**config.strategy.to_dict(), "kind": args.strategy})
    if getattr(args, "check_invariants", False):
        changes["check_invariants"] = True
    return replace(config, **changes) if changes else config


def cmd_validate(args, out):
    config = _apply_overrides(load_scenario(args.path), args)
    report = validate(config)
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK if report.theorem_covered else EXIT_FALSE


def cmd_run(args, out):
    config = _apply_overrides(load_scenario(args.path), args)
    report = validate(config)
    if not report.runnable and not args.force:
        print("scenario failed validation (use --force to run anyway):", file=out)
        for line in report.lines():
            print("  " + line, file=out)
        return EXIT_FALSE

    trace = run(config, force=args.force)
    xstar = global_solution_set(config.network)
    A, b = config.network.stacked()
    conv = analysis.report(trace, xstar, A, b, tol=config.tolerances["converge"])

    stem = os.path.splitext(os.path.basename(args.path))[0]
    run_dir = os.path.join(args.out, f"{stem}_seed{config.seed}")
    os.makedirs(run_dir, exist_ok=True)
    write_trace_csv(trace, os.path.join(run_dir, "trace.csv"))
    write_metrics_csv(trace, os.path.join(run_dir, "metrics.csv"))

    lines = report.lines() + conv.lines()
    if trace.hull_ok is not None:
        lines.append(f"hull-membership violations: {trace.hull_violations}")
    summary = {
        "scenario": args.path,
        "seed": config.seed,
        "horizon": config.horizon,
        "forced": bool(args.force),
        "validation": report.to_dict(),
        "convergence": conv.to_dict(),
        "lambda_hat": conv.lambda_hat,
        "final_states": {str(i): x.tolist() for i, x in zip(trace.honest, trace.final_states)},
        "xstar_point": xstar.point.tolist(),
        "hull_violations": None if trace.hull_ok is None else trace.hull_violations,
        "report_lines": lines,
    }
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    for line in lines:
        print(line, file=out)
    print(f"outputs: {run_dir}", file=out)
    return EXIT_OK if conv.converged else EXIT_FALSE


def write_demo(out_dir):
    """Write the reference scenarios and their graph/agent files; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    good = scenarios.complete_scenario(check_invariants=True)
    bad = scenarios.cycle_scenario()
    paths = {
        "complete5_d2_beta1.json": good,
        "cycle5_d2_beta1.json": bad,
    }
    written = []
    for name, cfg in paths.items():
        p = os.path.join(out_dir, name)
        save_scenario(cfg, p)
        written.append(p)
    for name, g in (("complete5.txt", good.graph), ("cycle5.txt", bad.graph)):
        p = os.path.join(out_dir, name)
        with open(p, "w") as fh:
            fh.write(format_graph_text(g))
        written.append(p)
    p = os.path.join(out_dir, "generic5_agents.json")
    with open(p, "w") as fh:
        json.dump(good.network.to_dict(), fh, indent=2)
        fh.write("\n")
    written.append(p)
    return written


def cmd_demo(args, out):
    for p in write_demo(args.out):
        print(f"wrote {p}", file=out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="resilient-lsq",
        description="Byzantine-resilient distributed least squares: certifiers and simulator.")
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("check-graph", help="decide (r, s)-resilience of a graph file")
    g.add_argument("path")
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--cap", type=int, default=10**7)
    g.set_defaults(func=cmd_check_graph)

    r = sub.add_parser("check-redundancy", help="decide k-redundancy of an agent data file")
    r.add_argument("path")
    r.add_argument("--k", type=int)
    r.set_defaults(func=cmd_check_redundancy)

    for name, func, helptext in (("validate", cmd_validate, "check convergence hypotheses"),
                                 ("run", cmd_run, "simulate a scenario")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("path")
        s.add_argument("--seed", type=int)
        s.add_argument("--horizon", type=int)
        s.add_argument("--strategy", choices=[
            "constant", "uniform-random", "gaussian-drift", "conflicting-per-recipient", "mimic-offset"])
        s.add_argument("--check-invariants", action="store_true",
                       help="test every filter output against the hull of honest inputs")
        s.set_defaults(func=func)
        if name == "run":
            s.add_argument("--force", action="store_true", help="run even if validation fails")
            s.add_argument("--out", default="runs", help="output root directory")

    d = sub.add_parser("demo", help="write the reference scenario files")
    d.add_argument("--out", default="demo")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except (OSError, ResilientLSQError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
