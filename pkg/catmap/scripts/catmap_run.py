# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
catmap

run the cat map experiments and report on their results
"""
import argparse
import logging
import sys

from reportengine.compat import yaml
from reportengine.configparser import ConfigError

from catmap import cli
from catmap.experiments import EXPERIMENTS
from catmap.utils import InputError

log = logging.getLogger(__name__)

PROVIDERS = [
    "catmap.experiments",
    "catmap.table",
    "reportengine.report",
]


def parse_assignment(text: str) -> tuple:
    """``key=value`` with the value read as YAML."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, yaml.safe_load(value)


def _n_values(text: str):
    return int(text) if text.isdigit() else text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catmap", description=__doc__)
    verbosity = argparse.ArgumentParser(add_help=False)
    level = verbosity.add_mutually_exclusive_group()
    level.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    level.add_argument("-d", "--debug", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, parents=[verbosity], help=f"run the {name} experiment")
        p.add_argument("runcard", nargs="?", help="YAML, JSON or TOML runcard")
        p.add_argument("-o", "--output", default=None, help="output folder")
        p.add_argument("--map", dest="cat_map", help="DE, DE_T or a JSON 2x2 matrix")
        p.add_argument("--n", dest="n_values", type=_n_values, help="N or start:stop:step")
        p.add_argument("--window", help="alpha1,alpha2")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--mode-max", dest="mode_max", type=int)
        p.add_argument(
            "--set",
            dest="assignments",
            type=parse_assignment,
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any runcard key",
        )

    p = sub.add_parser("report", parents=[verbosity], help="summarise finished runs")
    p.add_argument("results_dir")
    return parser


def overrides_from_args(args) -> dict:
    keys = ("cat_map", "n_values", "window", "seed", "threads", "mode_max")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    overrides.update(dict(args.assignments))
    return overrides


def main(cmdline=None) -> int:
    args = build_parser().parse_args(cmdline)
    level = logging.WARNING if args.quiet else logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(level=level, format="[%(levelname)s]: %(message)s")

    if args.command == "report":
        try:
            cli.report(args.results_dir)
        except InputError as e:
            log.error(str(e))
            return cli.EXIT_INPUT
        return cli.EXIT_OK

    output = args.output or f"{args.command}_output"
    try:
        config = cli.resolve_config(args.command, args.runcard, overrides_from_args(args))
    except ConfigError as e:
        log.error(str(e))
        return cli.EXIT_INPUT
    return cli.run(args.command, config, output)


if __name__ == "__main__":
    sys.exit(main())
