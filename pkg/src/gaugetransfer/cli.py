"""Command-line entry point: one subcommand per experiment.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import GaugeTransferError
from .experiments import (
    EXPERIMENTS,
    FORMATS,
    ConfigError,
    ExperimentConfig,
    Issue,
    config_from_metadata,
    read_config_file,
    read_table,
    run_experiment,
    validate_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("gaugetransfer")


def _key_value(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: ./results)")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for ensembles")
    p.add_argument("--format", dest="fmt", choices=FORMATS, default="both")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaugetransfer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="flat key = value parameter file")
        p.add_argument("--set", dest="overrides", action="append", type=_key_value, default=[],
                       metavar="KEY=VALUE", help="parameter override (repeatable, wins over --config)")
        _add_common(p)
    p = sub.add_parser("rerun", help="regenerate an experiment from the metadata of one of its tables")
    p.add_argument("table", type=Path)
    _add_common(p)
    return parser


def _fail_config(issues: list[Issue]) -> int:
    print("config-error: " + "; ".join(str(i) for i in issues), file=sys.stderr)
    return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        if args.command == "rerun":
            config = config_from_metadata(read_table(args.table).metadata)
        else:
            params = read_config_file(args.config) if args.config else {}
            params.update(dict(args.overrides))
            config = ExperimentConfig(args.command, params)
    except (OSError, ValueError, KeyError) as exc:
        return _fail_config([Issue("config", str(exc).replace("\n", " "))])
    if args.seed is not None:
        config.parameters["seed"] = args.seed
    config.output = args.out
    config.fmt = args.fmt
    config.threads = args.threads

    for w in (i for i in validate_config(config) if i.severity == "warning"):
        print(f"warning: {w}", file=sys.stderr)
    try:
        result = run_experiment(config)
    except ConfigError as exc:
        return _fail_config(exc.issues)
    except (GaugeTransferError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical-error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("%s done: %s", config.experiment, json.dumps(result.summary, sort_keys=True))
    print(json.dumps({"experiment": config.experiment, "results": result.summary}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
