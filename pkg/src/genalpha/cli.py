"""Command-line entry point: `genalpha run <config>` and `genalpha validate <config>`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigurationError
from .experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genalpha",
        description="Generalized-alpha balance-law experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help="output directory (overrides [output] directory)")
    run.add_argument("--quiet", action="store_true",
                     help="suppress the summary on stdout")

    validate = sub.add_parser("validate", help="check a config file and exit")
    validate.add_argument("config", type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config.read_text())
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(f"{args.config}: valid ({config.experiment})")
        return 0

    try:
        return run_experiment(config, out_dir=args.out, quiet=args.quiet)
    except Exception as exc:  # runtime failure -> exit 1 with diagnostics
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
