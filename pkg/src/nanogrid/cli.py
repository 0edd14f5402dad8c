"""Command-line front end: ingest, check, solve, simulate, compare.

Exit codes: 0 success, 1 usage/parse error, 2 infeasible configuration,
3 runtime invariant violation.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import (
    ConfigurationError,
    ConstraintViolation,
    EmptyDatasetError,
    InfeasibleConfigurationError,
    InfeasibleTransitionError,
)
from .policies import Policy1, Policy2
from .scenario import file_hash, load_scenario, read_config
from .simulator import Comparison, compare_policies, monte_carlo, rollout
from .solver import OptimalPolicy, ValueTable, build_state_grid, solve_backward
from .stochastic import (
    FitReport,
    PvPlant,
    build_pv_model,
    fit_load_model,
    read_load_csv,
    read_weather_csv,
    reference_forecast_by_hour,
    save_model,
)

log = logging.getLogger("nanogrid")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_RUNTIME = 0, 1, 2, 3
POLICY_NAMES = ("policy1", "policy2", "optimal")


class UsageError(Exception):
    pass


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, args, inputs: dict, started: str) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "tool_version": __version__,
        "subcommand": args.command,
        "flags": {k: str(v) if isinstance(v, Path) else v for k, v in flags.items()},
        "config_hash": file_hash(args.config) if args.config else None,
        "input_hashes": {k: file_hash(p) for k, p in sorted(inputs.items())},
        "seed": args.seed,
        "started_utc": started,
        "finished_utc": _now(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_config(args):
    if not args.config:
        raise UsageError(f"{args.command} needs --config")
    return load_scenario(args.config)


def cmd_ingest(args) -> int:
    started = _now()
    cfg = read_config(args.config) if args.config else {}
    plant_cfg = cfg.get("pv_plant", {})
    plant = PvPlant(
        args.pv_capacity_kw if args.pv_capacity_kw is not None else float(plant_cfg.get("capacity_kw", 2.5)),
        args.derate if args.derate is not None else float(plant_cfg.get("derate", 1.0)))
    n_pv = args.n_pv_states or int(cfg.get("n_pv_states", 5))
    n_load = args.n_load_states or int(cfg.get("n_load_states", 5))
    offset = float(cfg.get("horizon", {}).get("utc_offset_h", 0.0))

    weather = read_weather_csv(args.weather)
    loads = read_load_csv(args.load)
    report = FitReport()
    ref = reference_forecast_by_hour(weather, offset)
    pv = build_pv_model(weather, plant, n_pv, ref, offset, report)
    load = fit_load_model(loads, n_load, offset)

    out = _out_dir(args)
    save_model(pv, out / "pv_model.json", "pv")
    save_model(load, out / "load_model.json", "load")
    summary = {
        "weather": report.to_dict(),
        "reference_forecast_by_hour": ref,
        "n_load_records": len(loads),
        "pv_states_per_hour": [len(d.support) for d in pv.by_hour],
        "load_states_per_hour": [len(d.support) for d in load.by_hour],
    }
    (out / "ingest_report.json").write_text(json.dumps(summary, indent=1) + "\n")
    write_manifest(out, args, {"weather": args.weather, "load": args.load}, started)
    print(f"wrote {out / 'pv_model.json'} and {out / 'load_model.json'}")
    return EXIT_OK


def cmd_check(args) -> int:
    started = _now()
    scenario = _require_config(args)
    report = scenario.feasibility()
    print(report.summary())
    out = _out_dir(args)
    (out / "feasibility.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    write_manifest(out, args, {}, started)
    return EXIT_OK if report.guaranteed else EXIT_INFEASIBLE


def cmd_solve(args) -> int:
    started = _now()
    scenario = _require_config(args)
    grid = build_state_grid(scenario.battery, args.n_states)
    table = solve_backward(scenario, grid, args.n_decisions, span=args.solve_span,
                           force=args.force_infeasible)
    out = _out_dir(args)
    table.save(out / "value_table.json")
    write_manifest(out, args, {}, started)
    k0 = table.value(0, scenario.s0)
    print(f"V_0(s0={scenario.s0}) = {k0:.6f} $; table written to {out / 'value_table.json'}")
    return EXIT_OK


def _load_table(args, scenario) -> ValueTable:
    path = Path(args.table) if args.table else Path(args.out) / "value_table.json"
    if not path.exists():
        raise UsageError(f"value table {path} not found; run `nanogrid solve` first")
    table = ValueTable.load(path)
    expected = scenario.N if table.span == "full" else scenario.grid.steps_per_day
    if table.n_stages != expected:
        raise UsageError(f"value table has {table.n_stages} stages, scenario needs {expected}; "
                         "re-run `nanogrid solve` for this config")
    return table


def _make_policies(names, args, scenario) -> list:
    out = []
    for name in names:
        if name == "policy1":
            out.append(Policy1())
        elif name == "policy2":
            out.append(Policy2(args.lookahead_h))
        elif name == "optimal":
            out.append(OptimalPolicy(_load_table(args, scenario)))
        else:
            raise UsageError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
    return out


def cmd_simulate(args) -> int:
    started = _now()
    scenario = _require_config(args)
    (policy,) = _make_policies([args.policy], args, scenario)
    traj = rollout(policy, scenario, args.seed, 0)
    report = monte_carlo(policy, scenario, args.n, args.seed, args.threads)
    out = _out_dir(args)
    traj.write_csv(out / "trajectory.csv")
    comp = Comparison(args.seed, args.n, {policy.name: report})
    comp.write(out)
    inputs = {"value_table": args.table or out / "value_table.json"} if args.policy == "optimal" else {}
    write_manifest(out, args, inputs, started)
    print(json.dumps(report.summary()))
    return EXIT_OK


def cmd_compare(args) -> int:
    started = _now()
    scenario = _require_config(args)
    names = [p.strip() for p in args.policies.split(",") if p.strip()]
    policies = _make_policies(names, args, scenario)
    comp = compare_policies(policies, scenario, args.n, args.seed, args.threads)
    out = _out_dir(args)
    comp.write(out)
    inputs = {"value_table": args.table or out / "value_table.json"} if "optimal" in names else {}
    write_manifest(out, args, inputs, started)
    for name, r in comp.reports.items():
        print(f"{name:>10}: mean J1 {r.mean_j1:+.4f} $ +/- {r.ci95:.4f}  "
              f"terminal SOC {r.mean_terminal_soc:.3f} kWh")
    return EXIT_OK


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="scenario config (JSON or YAML)")
    p.add_argument("--out", default=d("out"), help="output directory")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--threads", type=int, default=d(1), help="max worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanogrid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="fit PV and load models from CSV data")
    _add_globals(p, suppress=True)
    p.add_argument("--weather", required=True)
    p.add_argument("--load", required=True)
    p.add_argument("--pv-capacity-kw", type=float)
    p.add_argument("--derate", type=float)
    p.add_argument("--n-pv-states", type=int)
    p.add_argument("--n-load-states", type=int)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("check", help="evaluate the feasibility tiers")
    _add_globals(p, suppress=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="compute the value table by backward induction")
    _add_globals(p, suppress=True)
    p.add_argument("--n-states", type=int, default=101)
    p.add_argument("--n-decisions", type=int, default=101)
    p.add_argument("--force-infeasible", action="store_true")
    p.add_argument("--solve-span", choices=("full", "day"), default="full")
    p.set_defaults(func=cmd_solve)

    for name, func in (("simulate", cmd_simulate), ("compare", cmd_compare)):
        p = sub.add_parser(name, help=f"{name} policies by Monte Carlo rollouts")
        _add_globals(p, suppress=True)
        if name == "simulate":
            p.add_argument("--policy", choices=POLICY_NAMES, default="policy1")
            p.add_argument("--n", type=int, default=1)
        else:
            p.add_argument("--policies", default="policy1,policy2,optimal")
            p.add_argument("--n", type=int, default=1000)
        p.add_argument("--lookahead-h", type=float, default=3)
        p.add_argument("--table", help="value table (default: <out>/value_table.json)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, EmptyDatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleConfigurationError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConstraintViolation, InfeasibleTransitionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
