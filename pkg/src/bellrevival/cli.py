"""Command-line entry point: ``bellrevival {revival,map,lifetime,crb} --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from typing import Optional, Sequence

from . import __version__
from .config import COMMANDS, RunConfig, load_config
from .errors import ConfigError, NumericalError
from .pipelines import render_csv, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_HELP = {
    "revival": "discrete-bath revival series: populations, D, I_AB, B",
    "map": "BLP and Bell backflow over the (d, lambda) grid",
    "lifetime": "exact vs analytic dark-state lifetime near the node",
    "crb": "Fisher information and Cramer-Rao displacement resolution",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellrevival", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--out", help="CSV output path (default: [output] path, else stdout)")
        p.add_argument("--check", action="store_true", help="validate the config and print the effective version")
        p.add_argument("--threads", type=int, default=None, help="cap on worker processes (default: all cores)")
    return parser


def _load(path: str, command: str) -> RunConfig:
    cfg = load_config(path)
    cfg.validate(command)
    return cfg.with_defaults(command).validate(command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _load(args.config, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.check:
        sys.stdout.write(cfg.to_ini())
        return EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            table = run(args.command, cfg, args.threads)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render_csv(table, cfg, args.command)
    out = args.out or cfg.output
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
