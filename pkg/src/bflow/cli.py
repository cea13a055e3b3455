"""Command-line entry point: ``bflow run | convergence | verify | plot``.

Exit codes: 0 success, 1 failed verification, 2 invalid input (config or CSV
schema), 3 wave breaking detected, 4 blow-up.
"""
import argparse
import os
import sys

from . import harness, verify
from .config import SolverConfig
from .errors import BlowUpError, InvalidConfigError, MonotonicityLostError, SchemaMismatchError
from .output import write_json
from .svg import KINDS, plot_csv

EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_BREAKING = 3
EXIT_BLOWUP = 4


def _out_dir(args, default_name):
    if args.out:
        return args.out
    return os.path.join(os.environ.get("BFLOW_OUT_DIR", "bflow-out"), default_name)


def _load_config(path):
    if path is None:
        return SolverConfig()
    return SolverConfig.from_file(path)


def cmd_run(args):
    cfg = _load_config(args.config)
    out = _out_dir(args, f"run-{cfg.content_hash()[:12]}")
    manifest = harness.run_scenario(cfg, args.mode, out)
    print(f"status: {manifest.status}  ({manifest.wall_time:.1f} s)")
    if manifest.message:
        print(manifest.message)
    for key, path in sorted(manifest.files.items()):
        print(f"  {key}: {path}")
    return manifest.exit_code


def cmd_convergence(args):
    cfg = _load_config(args.config)
    out = _out_dir(args, f"convergence-{args.axis}-{cfg.content_hash()[:12]}")
    table = harness.convergence_study(cfg, args.axis, args.levels, args.mode)
    csv_path = harness.write_convergence(table, out)
    svg_path = plot_csv(csv_path, "loglog")
    print(f"{'level':>5} {args.axis:>12} {'error':>12} {'order':>8}")
    for row in table.rows():
        value = row[2] if args.axis == "dt" else row[3]
        order = "" if row[6] != row[6] else f"{row[6]:.3f}"
        print(f"{row[0]:>5} {value:>12.6g} {row[4]:>12.4e} {order:>8}")
    print("order: exact (all differences vanish)" if table.exact else f"fitted order: {table.fitted_order:.3f}")
    print(f"  table: {csv_path}\n  chart: {svg_path}")
    return 0


def cmd_verify(args):
    cfg = _load_config(args.config) if args.config else None
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    out = _out_dir(args, "verify")
    failed = 0
    for suite in suites:
        report = verify.run_suite(suite, cfg)
        write_json(os.path.join(out, f"report_{suite}.json"), report)
        print(verify.summary(report))
        failed += report["failures"]
    return EXIT_FAILED if failed else 0


def cmd_plot(args):
    path = plot_csv(args.csv, args.kind, args.out)
    print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="bflow", description="b-equation solvers on the circle")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write CSV outputs")
    p.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    p.add_argument("--mode", choices=harness.MODES, default="both")
    p.add_argument("--out", help="output directory (default under $BFLOW_OUT_DIR)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convergence", help="self-convergence study in dt or N")
    p.add_argument("--config")
    p.add_argument("--axis", choices=harness.AXES, default="dt")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--mode", choices=("eulerian", "lagrangian"), default="eulerian")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("verify", help="run a check battery")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.add_argument("--config", help="scenario for the invariants suite")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render a CSV as an SVG chart")
    p.add_argument("csv")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--out", help="SVG path (default: next to the CSV)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, SchemaMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MonotonicityLostError as exc:
        print(f"breaking detected: {exc}", file=sys.stderr)
        return EXIT_BREAKING
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
