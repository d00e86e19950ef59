"""``historiclab`` command line.

    historiclab list
    historiclab validate --preset psi-bound
    historiclab run --preset shift-blocks-geometric --seed 1 --out runs/geo

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, LabError
from .config import parse_json, validate_dict
from .presets import list_presets
from .runner import run_scenario
from .serialize import dumps

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("historiclab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="historiclab", description="Run averaging experiments on dynamical systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list preset scenarios")

    for name, text in (("run", "run a scenario and write artifacts"), ("validate", "check a config and print it with defaults")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="JSON scenario file")
        p.add_argument("--preset", help="preset scenario name")
        p.add_argument("--seed", type=int, action="append", help="seed (repeatable, replaces the config seeds)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--horizon", type=int, help="override the horizon")
        p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return parser


def load_config(args: argparse.Namespace):
    """Config from ``--config``/``--preset`` with command-line overrides applied."""
    if args.config is None and args.preset is None:
        raise ConfigError("CONFIG_INVALID", [("", "give --config PATH or --preset NAME")])
    raw = {}
    if args.config is not None:
        try:
            raw = parse_json(args.config.read_bytes())
        except OSError as exc:
            raise ConfigError("CONFIG_INVALID", [("--config", str(exc))]) from None
        if not isinstance(raw, dict):
            raise ConfigError("CONFIG_INVALID", [("", "configuration must be a JSON object")])
    if args.preset is not None:
        raw["scenario"] = args.preset
    if args.seed:
        raw["seeds"] = list(args.seed)
    if args.out is not None:
        raw["output_dir"] = args.out
    if args.horizon is not None:
        raw["horizon"] = args.horizon
    return validate_dict(raw)


def _report_config_error(exc: ConfigError) -> None:
    for path, msg in exc.errors:
        print(f"{exc.code}: {path or '<root>'}: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO, format="%(message)s")

    if args.command == "list":
        names = list_presets()
        width = max(len(n) for n, _ in names)
        for name, desc in names:
            print(f"{name:<{width}}  {desc}")
        return EXIT_OK

    try:
        cfg = load_config(args)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_CONFIG

    if args.command == "validate":
        if not args.quiet:
            sys.stdout.write(dumps(cfg.to_dict()))
        return EXIT_OK

    try:
        manifest = run_scenario(cfg)
    except ConfigError as exc:
        _report_config_error(exc)
        return EXIT_CONFIG
    except LabError as exc:
        if exc.code == "CONFIG_INVALID":
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    for line in manifest.summary:
        log.info(line)
    log.info("wrote %s (%.2f s)", ", ".join(a["path"] for a in manifest.artifacts) + ", manifest.json", manifest.wall_clock_seconds)
    log.info("output: %s", manifest.output_dir)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
