"""Command-line entry point: `lowrank-vlasov run <config-file>`."""

import argparse
import sys

from .config import ConfigError, parse_config
from .runner import run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lowrank-vlasov",
        description="Dynamical low-rank Vlasov-Poisson solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a configured experiment")
    runp.add_argument("config", help="path to the key = value configuration file")
    runp.add_argument("--output", help="override the configured CSV output path")
    runp.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config file: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if args.output is not None:
        from dataclasses import replace

        cfg = replace(cfg, output=args.output)
    return run(cfg, quiet=args.quiet)


if __name__ == "__main__":
    raise SystemExit(main())
