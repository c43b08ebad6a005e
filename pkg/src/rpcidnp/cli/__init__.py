"""
Command-line front end.

    rpcidnp simulate fig4
    rpcidnp mc fig4 --workers 4
    rpcidnp scan fig4 --param system.k --values 2 4 8
    rpcidnp estimate --Omega 0.01ns^-1 --A 0.1ns^-1 --k 1ns^-1
    rpcidnp pendulum pendulum
    rpcidnp render results.csv

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error,
3 I/O error.
"""

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional

from ..config import RuntimeConfig
from ..errors import (
    ConfigurationError,
    NumericalIntegrityError,
    ObservableRangeError,
    ScenarioParseError,
    UsageError,
)
from .render import render_csv
from .runner import estimate, parse_scan_values, run_mc, run_pendulum, run_scenario, scan, write_csv
from .scenario import (
    CONCENTRATION_UNITS,
    FIELD_UNITS,
    FREQUENCY_UNITS,
    NO_UNITS,
    RATE_UNITS,
    TEMPERATURE_UNITS,
    list_presets,
    load_scenario,
    parse_quantity,
    parse_scenario,
    render_scenario,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3

# flag -> (accepted units, default unit name)
ESTIMATE_FLAGS = {
    "omega": (FREQUENCY_UNITS, "rad/ns"),
    "Omega": (FREQUENCY_UNITS, "rad/ns"),
    "A": (FREQUENCY_UNITS, "rad/ns"),
    "k": (RATE_UNITS, "1/ns"),
    "B": (FIELD_UNITS, "G"),
    "T": (TEMPERATURE_UNITS, "K"),
    "P": (NO_UNITS, ""),
    "conc": (CONCENTRATION_UNITS, "mol/L"),
}

_bare_number_notice_shown = False


def _notice_bare_number(flag: str, unit: str) -> None:
    global _bare_number_notice_shown
    if not _bare_number_notice_shown:
        logger.warning(
            f"--{flag} has no unit suffix; assuming {unit}. "
            "Bare numbers use the default units rad/ns, 1/ns, G, K, mol/L"
        )
        _bare_number_notice_shown = True


def _estimate_quantities(args: argparse.Namespace) -> Dict[str, Optional[float]]:
    quantities = {}
    for flag, (units, default_unit) in ESTIMATE_FLAGS.items():
        text = getattr(args, flag)
        if text is None:
            quantities[flag] = None
            continue
        try:
            value, had_unit = parse_quantity(text, units)
        except ValueError as e:
            raise UsageError(f"--{flag}: {e}")
        if not had_unit and default_unit:
            _notice_bare_number(flag, default_unit)
        quantities[flag] = value
    return quantities


def _scenario_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help=f"Scenario file or preset ({', '.join(list_presets())})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpcidnp",
        description="Radical-pair spin dynamics and quantum-measurement CIDNP simulator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--workers", type=int, default=None,
                        help="Worker threads (default: RPCIDNP_WORKERS or 1)")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("simulate", help="Integrate the master equation of a scenario")
    _scenario_argument(p)
    p.add_argument("--csv", help="Output CSV (default: outputs.csv_path)")

    p = commands.add_parser("mc", help="Deterministic run plus the quantum-trajectory ensemble")
    _scenario_argument(p)
    p.add_argument("--csv", help="Time-series CSV (default: outputs.csv_path)")
    p.add_argument("--mc-csv", help="Monte-Carlo CSV (default: outputs.mc_csv_path)")

    p = commands.add_parser("scan", help="Vary one numeric scenario key")
    _scenario_argument(p)
    p.add_argument("--param", required=True, help="Dotted key, e.g. system.k")
    p.add_argument("--values", required=True, nargs="+",
                   help="Values, space- or comma-separated, with optional unit suffixes")
    p.add_argument("--out", help="Scan CSV (default: <csv stem>_scan.csv)")

    p = commands.add_parser("estimate", help="Closed-form estimates")
    for flag, (_, unit) in ESTIMATE_FLAGS.items():
        p.add_argument(f"--{flag}", default=None, help=f"default unit: {unit or 'dimensionless'}")
    p.add_argument("--only", nargs="+", default=None, help="Compute only these estimates")

    p = commands.add_parser("pendulum", help="Coupled-pendulum dephasing analog")
    _scenario_argument(p)
    p.add_argument("--csv", help="Output CSV (default: outputs.csv_path)")

    p = commands.add_parser("render", help="Chart a result CSV, or print a scenario canonically")
    p.add_argument("source", help="Result CSV, or a scenario file/preset with --scenario")
    p.add_argument("--out", help="Output image path (default: next to the CSV, .svg)")
    p.add_argument("--scenario", action="store_true",
                   help="Print the canonical form of a scenario instead of drawing a chart")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    workers = RuntimeConfig(args.workers).workers

    if args.command == "simulate":
        summary = run_scenario(load_scenario(args.scenario), args.csv)
        print(summary.describe())
    elif args.command == "mc":
        summary = run_mc(load_scenario(args.scenario), workers, args.csv, args.mc_csv)
        print(summary.describe())
        print(f"mc_csv = {summary.mc_csv_path}")
    elif args.command == "scan":
        scenario = load_scenario(args.scenario)
        raw = [v for item in args.values for v in item.split(",") if v.strip()]
        values = parse_scan_values(args.param, raw)
        table = scan(scenario, args.param, values, workers)
        out = args.out
        if out is None:
            csv = Path(scenario.outputs.csv_path)
            out = csv.with_name(f"{csv.stem}_scan.csv")
        write_csv(table, out)
        print(table.to_string(index=False))
    elif args.command == "estimate":
        for row in estimate(_estimate_quantities(args), args.only):
            print(row.describe())
    elif args.command == "pendulum":
        summary = run_pendulum(load_scenario(args.scenario), workers, args.csv)
        print(summary.describe())
    elif args.command == "render":
        if args.scenario:
            print(render_scenario(load_scenario(args.source)), end="")
        else:
            print(render_csv(args.source, args.out))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except NumericalIntegrityError as e:
        at = f" (t = {e.time:.6g} ns)" if e.time is not None else ""
        logger.error(f"Numerical failure{at}: {e}")
        return EXIT_NUMERICAL
    except ScenarioParseError as e:
        logger.error(f"Invalid scenario: {e}")
        return EXIT_USAGE
    except (ConfigurationError, UsageError, ObservableRangeError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


__all__ = ["main", "build_parser", "parse_scenario", "render_scenario", "load_scenario"]
