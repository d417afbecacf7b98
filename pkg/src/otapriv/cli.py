"""Command-line entry point.

Subcommands:
  validate  check a config file; print violations
  run       single-configuration report (JSON)
  sweep     epsilon sweep to CSV, optionally comparing customization modes
  accept    run the acceptance suite; one pass/fail line per criterion

Exit codes: 0 success, 1 validation error, 2 acceptance failure,
3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config, paper_default_config, validate_config
from .harness import (DEFAULT_EPS_GRID, MODES, SweepSpec, run_mode_comparison,
                      run_single, run_sweep, report_to_json, sweep_header,
                      write_csv)
from .analysis import SWEEP_CSV_COLUMNS
from .acceptance import CRITERIA_NAMES, run_acceptance

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ACCEPTANCE = 2
EXIT_RUNTIME = 3


def _load(args) -> "SystemConfig":
    cfg = load_config(args.config) if args.config else paper_default_config()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otapriv",
        description="Private over-the-air collaborative inference simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="validate a configuration file")
    p_val.add_argument("--config", required=True, help="path to a config JSON file")

    p_run = sub.add_parser("run", help="single-configuration report")
    p_run.add_argument("--config", help="config JSON (defaults built in)")
    p_run.add_argument("--seed", type=int, help="override the master seed")
    p_run.add_argument("--trials", type=int, default=2000)
    p_run.add_argument("--out", help="write the JSON report here (default stdout)")

    p_sweep = sub.add_parser("sweep", help="epsilon sweep to CSV")
    p_sweep.add_argument("--config", help="config JSON (defaults built in)")
    p_sweep.add_argument("--seed", type=int, help="override the master seed")
    p_sweep.add_argument("--trials", type=int, default=2000,
                         help="accuracy trials per sweep point")
    p_sweep.add_argument("--mode", default="uniform",
                         choices=list(MODES) + ["all"],
                         help="privacy customization mode; 'all' compares modes")
    p_sweep.add_argument("--out", required=True, help="output CSV path")

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--config", help="config JSON (defaults built in)")
    p_acc.add_argument("--seed", type=int, help="override the master seed")
    p_acc.add_argument("--out", help="directory for sweep/report artifacts")
    p_acc.add_argument("--list", action="store_true",
                       help="list criteria without running them")
    return parser


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate_config(cfg)
    if violations:
        for v in violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    print("config ok")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    report = report_to_json(run_single(cfg, args.trials))
    if args.out:
        Path(args.out).write_text(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    spec = SweepSpec(trials_per_point=args.trials)
    if args.mode == "all":
        rows = run_mode_comparison(cfg, spec)
        cols = ["mode"] + SWEEP_CSV_COLUMNS
        header = sweep_header(cfg, replace(spec, mode="all"))
    else:
        spec = replace(spec, mode=args.mode)
        rows = run_sweep(cfg, spec)
        cols = SWEEP_CSV_COLUMNS
        header = sweep_header(cfg, spec)
    write_csv(args.out, rows, cols, header_comment=header)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_accept(args) -> int:
    if args.list:
        for cid, name in sorted(CRITERIA_NAMES.items()):
            print(f"{cid}: {name}")
        return EXIT_OK
    cfg = _load(args)
    run = run_acceptance(cfg, out_dir=args.out)
    passed = sum(r.passed for r in run.results)
    print(f"{passed}/{len(run.results)} criteria passed")
    return EXIT_OK if run.all_passed else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "accept": cmd_accept,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
