"""Command-line experiment runner.

    mabmc <experiment> [config.ini] [overrides...]

Experiments: toy1, toy2, gaussian-sweep, ising-sweep, oracle-check.  The
config file is optional; every knob has a default and can be overridden on
the command line.  Exit codes: 0 success, 1 configuration error, 2 runtime
error, 3 oracle mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .config import ALL_SAMPLERS, EXPERIMENTS, ConfigError, load_config
from .runner import OracleMismatchError, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_ORACLE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mabmc",
        description="Run sampling experiments for doubly intractable posteriors.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("config", nargs="?", default=None, help="INI config file (optional)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", help="comma-separated seed list, e.g. 1,2,3")
        p.add_argument("--iterations", type=int, help="iterations per chain")
        p.add_argument("--grid", help="comma-separated grid values (sweeps only)")
        p.add_argument(
            "--samplers", help=f"comma-separated subset of {','.join(ALL_SAMPLERS)}"
        )
        p.add_argument("--workers", type=int, help="process-pool size (0 = one per CPU)")
        p.add_argument(
            "--oracle-check", action="store_true", default=None,
            help="verify enumerated probabilities against stored references",
        )
        p.add_argument(
            "--no-traces", action="store_true",
            help="skip per-chain trace CSVs (summary and plots only)",
        )
        p.add_argument("--verbose", action="store_true", help="print per-row summaries")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out: dict = {}
    if args.out is not None:
        out["output_dir"] = args.out
    if args.seed is not None:
        try:
            out["seeds"] = tuple(int(s) for s in args.seed.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError(f"seeds: {exc}") from exc
    if args.iterations is not None:
        out["iterations"] = args.iterations
    if args.grid is not None:
        try:
            out["grid"] = tuple(float(g) for g in args.grid.split(",") if g.strip())
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc
    if args.samplers is not None:
        out["samplers"] = tuple(s.strip() for s in args.samplers.split(",") if s.strip())
    if args.workers is not None:
        out["workers"] = args.workers
    if args.oracle_check:
        out["oracle_check"] = True
    if args.no_traces:
        out["write_traces"] = False
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.experiment, _overrides(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run_experiment(config, quiet=not args.verbose)
    except OracleMismatchError as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures map to a dedicated exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
