"""Command-line driver.

Exit codes: 0 when every in-run check passes, 1 when a check fails (the
failing check is named on stderr), 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from thermaltime.cli.commands import COMMANDS, ConfigError, acceptance
from thermaltime.cli.config import RunConfig, set_path
from thermaltime.cli.cosmo import cosmo_bound
from thermaltime.cli.io import write_csv, write_json, write_manifest
from thermaltime.errors import ThermalTimeError

__all__ = ["main", "cosmo_bound", "build_parser"]


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument("--out", help="output directory (default: config value or ./out)")
    common.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                        help="override a config field, e.g. shell.delta=0.2 (VALUE parsed as JSON)")

    p = argparse.ArgumentParser(prog="thermaltime", description="Clock-conditioned universe experiments")
    sub = p.add_subparsers(dest="command", required=True)
    ic = sub.add_parser("identity-check", parents=[common], help="frame identity residual")
    ic.add_argument("--r", type=int, nargs="+", help="explicit integer clock grid")
    ic.add_argument("--T", type=float, help="clock period for --r")
    ic.add_argument("--s", type=int, help="grid size minus one")
    ty = sub.add_parser("typicality", parents=[common], help="census of random universes")
    ty.add_argument("--n", type=int, help="number of samples")
    sub.add_parser("dynamics", parents=[common], help="norm and fidelity sweeps")
    sub.add_parser("toy", parents=[common], help="oscillator position curves")
    sub.add_parser("gppt", parents=[common], help="conditional probability tables")
    co = sub.add_parser("cosmo", parents=[common], help="minimum energy step for a recurrence time")
    co.add_argument("--T", type=float, help="recurrence time in seconds")
    ac = sub.add_parser("acceptance", parents=[common], help="run the acceptance criteria")
    ac.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    return p


def _load_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        data = json.loads(Path(args.config).read_text())
    for item in args.set:
        if "=" not in item:
            raise ConfigError("--set", f"expected PATH=VALUE, got {item!r}")
        path, value = item.split("=", 1)
        set_path(data, path.strip(), _parse_value(value))
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["out"] = args.out
    if args.command == "identity-check":
        if args.r is not None:
            clock = {"kind": "explicit", "r": args.r}
            if args.T is not None:
                clock["T"] = args.T
            data["clock"] = clock
        if args.s is not None:
            set_path(data, "grid.s", args.s)
    if args.command == "typicality" and args.n is not None:
        set_path(data, "typicality.n", args.n)
    if args.command == "cosmo" and args.T is not None:
        set_path(data, "cosmo.T", args.T)
    return RunConfig.model_validate(data)


def _report_invalid(exc: Exception) -> int:
    print("invalid configuration:", file=sys.stderr)
    if isinstance(exc, ValidationError):
        for err in exc.errors():
            loc = ".".join(str(x) for x in err["loc"]) or "<root>"
            print(f"  {loc}: {err['msg']}", file=sys.stderr)
    elif isinstance(exc, ConfigError):
        print(f"  {exc}", file=sys.stderr)
    else:
        print(f"  {type(exc).__name__}: {exc}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ValidationError, ConfigError, json.JSONDecodeError, OSError) as exc:
        return _report_invalid(exc)

    try:
        if args.command == "acceptance":
            result = acceptance(cfg, args.only)
        else:
            result = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        return _report_invalid(exc)
    except (ThermalTimeError, ValueError) as exc:
        return _report_invalid(exc)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in result.tables.items():
        write_csv(out / name, header, rows)
    write_json(out / "summary.json", result.summary)
    files = list(result.tables) + ["summary.json"]
    write_manifest(out, args.command, cfg, result.clock_digest, files, result.checks)

    if result.message:
        print(result.message)
    failed = [c for c in result.checks if not c.passed]
    for c in result.checks:
        print(f"check {c.name}: {'ok' if c.passed else 'FAILED'} ({c.detail})")
    if failed:
        print("failed invariant checks: " + ", ".join(c.name for c in failed), file=sys.stderr)
        return 1
    return 0
