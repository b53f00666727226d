"""Command-line entry point: ``floquet-lockin <kind> --config PATH``."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import JOB_KINDS, WORKERS_ENV, load_config
from .errors import ConfigError, NumericError, ParameterError
from .jobs import run_job

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numeric failures here
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="floquet-lockin",
        description="Floquet stability and lock-in analyses driven by a job config file.",
        epilog=f"Worker count defaults to ${WORKERS_ENV}, then 1. Exit codes: "
        "0 success, 1 usage or config error, 2 numeric failure, 3 I/O failure.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", metavar="KIND", required=True)
    for kind in JOB_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} job")
        p.add_argument("--config", required=True, metavar="PATH", help="job configuration file")
        p.add_argument("--workers", type=int, metavar="N", help="parallel worker processes")
        p.add_argument("--hill-M", type=int, dest="hill_M", metavar="N", help="Hill truncation order M")
        p.add_argument("--out", metavar="DIR", help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE

    try:
        cfg = load_config(args.config)
        if cfg.kind != args.kind:
            raise ConfigError(f"config declares kind '{cfg.kind}' but subcommand is '{args.kind}'", key="kind")
        if args.workers is not None and args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        cfg = cfg.with_overrides(workers=args.workers, M=args.hill_M, output_dir=args.out)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        manifest = run_job(cfg)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO

    cells = manifest.cells
    print(
        json.dumps(
            {
                "kind": manifest.kind,
                "output_dir": cfg.output_dir,
                "cells_ok": cells.get("ok"),
                "cells_failed": cells.get("failed"),
                "outputs": sorted(manifest.outputs),
            }
        )
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
