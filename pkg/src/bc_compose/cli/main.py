"""Command-line entry point ``bc-compose``."""

from __future__ import annotations

import argparse
import importlib.resources as impres
import json
import logging
import os
import sys
from collections.abc import Sequence

from ..boundary_algebra import classify
from ..boundary_algebra import compose
from ..config import settings
from ..exceptions import BoundaryCompositionError
from ..exceptions import ConfigError
from ..halfplane import gaussian
from ..halfplane import halfplane_boundary_demo
from ..interval_cavity import build_cavity
from ..interval_cavity import spectrum
from ..logger import logger
from .runner import DEFAULT_Y_VALUES
from .runner import EXIT_CONFIG
from .runner import EXIT_NUMERICAL
from .runner import EXIT_OK
from .runner import interval_reference
from .runner import json_safe
from .runner import run
from .scenario import parse_config_bytes
from .scenario import resolve_boundary

DEFAULT_SUITE = "default_suite.json"


def _default_jobs() -> int:
    raw = os.environ.get(settings.cli.jobs_env, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", settings.cli.jobs_env, raw)
        return 1


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the ``run``, ``compose``, ``spectrum`` and ``demo-halfplane`` commands."""
    parser = argparse.ArgumentParser(
        prog="bc-compose",
        description="Compose boundary conditions of a quantum cavity and verify the composition law.",
    )
    parser.add_argument("--settings-dir", help="directory of TOML files overriding the settings")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level (default: WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run a scenario file")
    run_parser.add_argument(
        "config", nargs="?", help="scenario JSON file (default: the packaged default suite)"
    )
    run_parser.add_argument("--out", required=True, help="output directory")
    run_parser.add_argument("--verify", action="store_true", help="exit 4 on failed assertions")
    run_parser.add_argument(
        "--jobs",
        type=int,
        default=None,
        help=f"worker threads (default: ${settings.cli.jobs_env} or 1)",
    )

    compose_parser = commands.add_parser("compose", help="compose two boundary presets")
    compose_parser.add_argument("--u1", required=True)
    compose_parser.add_argument("--u2", required=True)
    compose_parser.add_argument("--seed", type=int, default=0)

    spectrum_parser = commands.add_parser("spectrum", help="lowest interval eigenvalues")
    spectrum_parser.add_argument("--u", required=True)
    spectrum_parser.add_argument("--grid", type=int, default=None)
    spectrum_parser.add_argument("--count", type=int, default=3)
    spectrum_parser.add_argument("--mass", type=float, default=None)
    spectrum_parser.add_argument("--seed", type=int, default=0)

    demo_parser = commands.add_parser("demo-halfplane", help="boundary value of 1/(x + iy)")
    demo_parser.add_argument("--y", type=float, nargs="+", default=DEFAULT_Y_VALUES)
    return parser


def _command_run(args: argparse.Namespace) -> int:
    if args.config is None:
        raw = (impres.files("bc_compose") / "scenarios" / DEFAULT_SUITE).read_bytes()
        source = DEFAULT_SUITE
    else:
        try:
            with open(args.config, "rb") as fh:
                raw = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read {args.config}: {err}") from None
        source = args.config
    scenarios = parse_config_bytes(raw, source)
    jobs = _default_jobs() if args.jobs is None else args.jobs
    manifest = run(scenarios, args.out, verify=args.verify, jobs=jobs, config_bytes=raw)
    print(json.dumps({"exit_code": manifest.exit_code, "files": manifest.files}, indent=2))
    return manifest.exit_code


def _command_compose(args: argparse.Namespace) -> int:
    u1 = resolve_boundary(args.u1, "u1", args.seed)
    u2 = resolve_boundary(args.u2, "u2", args.seed + 1)
    w = compose(u1, u2)
    payload = {
        "W": [[[float(x.real), float(x.imag)] for x in row] for row in w.matrix],
        "label": classify(w),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _command_spectrum(args: argparse.Namespace) -> int:
    u = resolve_boundary(args.u, "u", args.seed)
    cavity = build_cavity(u, args.grid, args.mass)
    values = spectrum(cavity, args.count)
    reference = interval_reference(u, args.count, cavity.mass)
    payload = {
        "label": classify(u),
        "cells": cavity.cells,
        "eigenvalues": values.tolist(),
        "reference": None if reference is None else reference.tolist(),
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _command_demo(args: argparse.Namespace) -> int:
    report = halfplane_boundary_demo(gaussian, sorted(args.y, reverse=True))
    payload = {
        "y": report.y_values,
        "integrals": [[z.real, z.imag] for z in report.integrals],
        "reference": [report.reference.real, report.reference.imag],
        "extrapolated": [report.extrapolated_limit.real, report.extrapolated_limit.imag],
        "error_slope": report.error_slope,
    }
    print(json.dumps(json_safe(payload), indent=2))
    return EXIT_OK


COMMANDS = {
    "run": _command_run,
    "compose": _command_compose,
    "spectrum": _command_spectrum,
    "demo-halfplane": _command_demo,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch the command and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.settings_dir:
            settings.merge_tomls(args.settings_dir)
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"bc-compose: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundaryCompositionError, ArithmeticError) as err:
        print(f"bc-compose: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileNotFoundError, ValueError) as err:
        print(f"bc-compose: configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
