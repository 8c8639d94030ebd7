"""
Command-line front end.

    python -m app.cli fig2 --config runs/fig2.json --lambda 0.02 --output fig2.csv
    python -m app.cli check --quick

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 acceptance
or oracle comparison failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from app import __version__
from app.core.exceptions import AcceptanceFailure, SimulationError
from app.core.logging import setup_simulation_logger
from app.schemas.model import NumericsConfig
from app.schemas.scenario import ScenarioConfig, ScenarioKind
from app.services.acceptance import AcceptanceSuite
from app.services.result_export import result_exporter
from app.services.scenario_runner import DEFAULT_SWEEPS, scenario_runner

logger = logging.getLogger("casimir_sim")

SUBCOMMANDS = {
    "fig1": ScenarioKind.FIG1_SUDDEN_GRID,
    "fig2": ScenarioKind.FIG2_TRANSIENT_SWEEP,
    "fig3": ScenarioKind.FIG3_BETA_TRACE,
    "fig4": ScenarioKind.FIG4_ETA_SWEEP,
    "shake": ScenarioKind.SHAKING_REPORT,
    "oracle": ScenarioKind.ORACLE_CHECK,
    "sweep": ScenarioKind.CUSTOM,
}

# flag dest -> (section, field)
PARAM_FLAGS = {
    "E0": ("params", "E0"),
    "omega1": ("params", "omega1"),
    "omega2": ("params", "omega2"),
    "lam": ("params", "lambda"),
    "tau": ("params", "tau"),
    "detuning_reference": ("params", "detuning_reference"),
    "t_min": ("numerics", "t_min"),
    "t_max": ("numerics", "t_max"),
    "ode_rel_tol": ("numerics", "ode_rel_tol"),
    "ode_abs_tol": ("numerics", "ode_abs_tol"),
    "series_tol": ("numerics", "series_tol"),
    "fock_max": ("numerics", "fock_max"),
    "sample_count": ("numerics", "sample_count"),
    "rotating_wave": ("numerics", "rotating_wave"),
}

SWEEP_FLAGS = ("parameter", "min", "max", "count", "spacing")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON scenario configuration file")
    parser.add_argument("--output", help="CSV file to write (relative names go to OUTPUT_DIR)")
    parser.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                        help="Override any config field, e.g. numerics.norm_tol=1e-9 (repeatable)")
    physics = parser.add_argument_group("model parameters")
    physics.add_argument("--E0", type=float)
    physics.add_argument("--omega1", type=float)
    physics.add_argument("--omega2", type=float)
    physics.add_argument("--lambda", dest="lam", type=float)
    physics.add_argument("--tau", type=float)
    physics.add_argument("--detuning-reference", choices=["final", "initial"])
    numerics = parser.add_argument_group("numerical controls")
    numerics.add_argument("--t-min", type=float)
    numerics.add_argument("--t-max", type=float)
    numerics.add_argument("--ode-rel-tol", type=float)
    numerics.add_argument("--ode-abs-tol", type=float)
    numerics.add_argument("--series-tol", type=float)
    numerics.add_argument("--fock-max", type=int)
    numerics.add_argument("--sample-count", type=int)
    numerics.add_argument("--rotating-wave", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-sim",
        description="Two-level atom in a cavity mode with time-dependent frequency.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level (default from LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "fig1": "sudden-limit excitation grid (rho, xi, w_up)",
        "fig2": "transient efficiency sweep over tau (tau, F, w_up, N_dce)",
        "fig3": "instantaneous photon number |beta(t)|^2",
        "fig4": "back-reaction coefficient sweep over tau (tau, eta)",
        "shake": "Lamb-shift shaking report",
        "oracle": "exact evolution compared with the analytic engines",
        "sweep": "sweep any model parameter",
    }
    for name, text in helps.items():
        command = sub.add_parser(name, help=text)
        _add_common(command)
        if name in ("fig2", "fig4", "sweep"):
            command.add_argument("--parameter", help="ModelParams field to sweep")
            command.add_argument("--min", type=float)
            command.add_argument("--max", type=float)
            command.add_argument("--count", type=int)
            command.add_argument("--spacing", choices=["lin", "log"])
        if name == "sweep":
            command.add_argument("--quantities", nargs="+",
                                 help="n_dce F w_up eta w_shake w_sudden")

    check = sub.add_parser("check", help="run the acceptance suite")
    _add_common(check)
    check.add_argument("--quick", action="store_true", help="skip the slow oracle items")
    check.add_argument("--only", type=int, nargs="+", help="run only these item numbers")
    return parser


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _set_path(data: Dict[str, Any], path: str, value: Any) -> None:
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ValueError(f"cannot set {path}: {key} is not a section")
    node[keys[-1]] = value


def load_config(args: argparse.Namespace, scenario: ScenarioKind) -> ScenarioConfig:
    """
    Merge the config file, convenience flags and ``--set`` overrides, then validate.

    Raises:
        ValidationError: unknown keys or invalid values
        ValueError: unreadable config file or malformed override
    """
    data: Dict[str, Any] = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
    data["scenario"] = scenario.value

    for dest, (section, name) in PARAM_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data.setdefault(section, {})[name] = value

    sweep_overrides = {name: getattr(args, name) for name in SWEEP_FLAGS if getattr(args, name, None) is not None}
    if sweep_overrides:
        data.setdefault("sweep", {}).update(sweep_overrides)
    if scenario in DEFAULT_SWEEPS and "sweep" in data:
        # partial tau sweeps are completed from the default grid
        data["sweep"] = {**DEFAULT_SWEEPS[scenario].model_dump(mode="json"), **data["sweep"]}
    if getattr(args, "quantities", None):
        data["quantities"] = args.quantities
    if args.output:
        data["output_path"] = args.output

    for item in args.set:
        path, sep, raw = item.partition("=")
        if not sep or not path:
            raise ValueError(f"override must look like PATH=VALUE, got {item!r}")
        _set_path(data, path.strip(), _parse_value(raw.strip()))

    return ScenarioConfig.model_validate(data)


def _format_validation(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in exc.errors()]


def _run_check(args: argparse.Namespace) -> int:
    numerics = NumericsConfig()
    if args.config is not None or args.set or any(
        getattr(args, dest, None) is not None for dest, (section, _) in PARAM_FLAGS.items() if section == "numerics"
    ):
        numerics = load_config(args, ScenarioKind.FIG1_SUDDEN_GRID).numerics

    report = AcceptanceSuite(numerics, quick=args.quick).run(args.only)
    for item in report.items:
        status = "SKIP" if item.passed is None else ("PASS" if item.passed else "FAIL")
        print(f"[{item.number:2d}] {status} {item.title} ({item.seconds:.1f}s): {item.detail}")

    target = result_exporter.resolve_path(args.output, "acceptance.csv")
    metadata = {
        "artifact": f"casimir-sim {__version__}",
        "scenario": "acceptance",
        "quick": str(report.quick).lower(),
        "numerics": json.dumps(numerics.model_dump(mode="json"), sort_keys=True),
    }
    records = [
        [item.number, item.title, "skipped" if item.passed is None else item.passed, item.seconds, item.detail]
        for item in report.items
    ]
    result_exporter.write_records(target, ["item", "title", "passed", "seconds", "detail"], records, metadata)

    if not report.all_passed:
        failed = [item.number for item in report.failures]
        raise AcceptanceFailure(
            f"acceptance failed: items {', '.join(str(n) for n in failed)}",
            {"failed": failed, "output": str(target)},
        )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_simulation_logger(args.log_level)

    try:
        if args.command == "check":
            return _run_check(args)
        config = load_config(args, SUBCOMMANDS[args.command])
        result = scenario_runner.run(config)
    except ValidationError as exc:
        for line in _format_validation(exc):
            print(f"invalid configuration: {line}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1

    print(f"wrote {result.output_path}")
    for path in result.extra_files:
        print(f"wrote {path}")
    for note in result.notes:
        print(f"note: {note}")
    if result.passed is not None:
        for row in result.as_dicts():
            status = "PASS" if row["passed"] else "FAIL"
            print(f"{status} {row['name']}: {row['value_a']:.6e} vs {row['value_b']:.6e} "
                  f"(|diff| {row['abs_diff']:.2e} <= {row['tolerance']:.2e}?)")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
