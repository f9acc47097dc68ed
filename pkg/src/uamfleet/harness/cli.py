"""Command-line entry point.  Each stage reads and writes CSV so stages compose via files.

Exit codes: 0 success, 2 configuration or input error, 3 solver error,
4 the run finished but some rows failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from uamfleet.demand import DemandParams, generate_profiles, parse_profiles, serialize_profiles
from uamfleet.dispatch import dispatch, parse_series, serialize_series
from uamfleet.harness.config import ExperimentConfig
from uamfleet.harness.pipeline import check_solver, run_pipeline
from uamfleet.harness.plots import emit_plots
from uamfleet.harness.report import AggregateReport
from uamfleet.heuristics import serialize_spill, simulate_lower_bound, simulate_upper_bound
from uamfleet.milp import (
    SolverError,
    SolverLimits,
    build_spill,
    fleet_size_of,
    get_adapter,
    solve_fleet_sizing,
    spill_by_step,
)
from uamfleet.network import ConfigError, NetworkConfig
from uamfleet.schedule import ScheduleParseError, generate_synthetic_schedule, parse_schedule, serialize_schedule

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PARTIAL = 0, 2, 3, 4


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}") from None


def _network(args) -> NetworkConfig:
    base = NetworkConfig.from_dict(json.loads(_read(args.network))) if args.network else NetworkConfig()
    changes = {k: getattr(args, k) for k in ("steps_per_day", "step_minutes", "levels", "soc_increment", "tau",
                                             "kappa", "seat_capacity") if getattr(args, k, None) is not None}
    return base.with_overrides(**changes) if changes else base


def _series(args, net: NetworkConfig):
    return parse_series(_read(args.series), net.vertiports, net.step_minutes, net.seat_capacity, net.steps_per_day)


def _limits(args) -> SolverLimits:
    defaults = SolverLimits()
    return SolverLimits(time_limit=args.time_limit or defaults.time_limit,
                        rel_gap=defaults.rel_gap if args.gap is None else args.gap)


def _add_network_flags(p) -> None:
    g = p.add_argument_group("network")
    g.add_argument("--network", help="network config JSON (flags below override it)")
    g.add_argument("--steps-per-day", type=int)
    g.add_argument("--step-minutes", type=int)
    g.add_argument("--levels", type=int, help="SoC levels above reserve (K)")
    g.add_argument("--soc-increment", type=float)
    g.add_argument("--tau", type=int, help="flight time in steps")
    g.add_argument("--kappa", type=int, help="SoC levels used per flight")
    g.add_argument("--seat-capacity", type=int)


def _add_solver_flags(p) -> None:
    p.add_argument("--solver", default="highs", choices=("highs", "scipy"))
    p.add_argument("--time-limit", type=float)
    p.add_argument("--gap", type=float, help="relative MIP gap")


def cmd_gen_schedule(args) -> int:
    sched = generate_synthetic_schedule(days=args.days, daily_flights_mean=args.flights, seed=args.seed)
    _write(serialize_schedule(sched), args.output)
    return EXIT_OK


def cmd_gen_demand(args) -> int:
    if args.schedule:
        sched = parse_schedule(_read(args.schedule))
    else:
        sched = generate_synthetic_schedule(days=args.days or 365, seed=args.seed)
    days = sched.days if args.days is None else sched.days[: args.days]
    params = DemandParams(add=args.add, ar_coeff=args.ar_coeff)
    _write(serialize_profiles(generate_profiles(sched, params, args.seed, days)), args.output)
    return EXIT_OK


def cmd_dispatch(args) -> int:
    net = _network(args)
    profiles = parse_profiles(_read(args.profiles))
    if not profiles:
        raise ConfigError("profile file holds no passengers")
    chosen = [p for p in profiles if args.day is None or p.day.isoformat() == args.day]
    if not chosen:
        raise ConfigError(f"day {args.day} not found in {args.profiles}")
    series = dispatch(chosen[0], seat_capacity=net.seat_capacity, max_wait_minutes=args.max_wait,
                      step_minutes=net.step_minutes, vertiports=net.vertiports, steps_per_day=net.steps_per_day)
    _write(serialize_series(series), args.output)
    return EXIT_OK


def cmd_size_fleet(args) -> int:
    net = _network(args)
    series = _series(args, net)
    sol = solve_fleet_sizing(net, series, get_adapter(args.solver), _limits(args))
    if not sol.status.has_solution:
        print(f"no solution: {sol.status.value}", file=sys.stderr)
        return EXIT_SOLVER
    fleet = fleet_size_of(sol, net)
    _write(f"fleet_size,status,gap,objective\n{fleet},{sol.status.value},{sol.gap:.6g},"
           f"{sol.objective_value:.6f}\n", args.output)
    return EXIT_OK


def cmd_spill(args) -> int:
    net = _network(args)
    series = _series(args, net)
    sol = get_adapter(args.solver).solve(build_spill(net, series, args.fleet_size), _limits(args))
    if not sol.status.has_solution:
        print(f"no solution: {sol.status.value}", file=sys.stderr)
        return EXIT_SOLVER
    spill = spill_by_step(sol, net)
    print(f"daily spill {int(spill.sum())} ({sol.status.value}, gap {sol.gap:.3g})", file=sys.stderr)
    _write(serialize_spill(spill, net.vertiports), args.output)
    return EXIT_OK


def cmd_simulate_bounds(args) -> int:
    net = _network(args)
    series = _series(args, net)
    lines = ["bound,daily_spill,flights_flown,repositioning_flights"]
    for name, sim, path in (("lower", simulate_lower_bound, args.lower_out),
                            ("upper", simulate_upper_bound, args.upper_out)):
        res = sim(net, series, args.fleet_size)
        lines.append(f"{name},{res.daily_spill},{res.flights_flown},{res.repositioning_flights}")
        if path:
            Path(path).write_text(serialize_spill(res.spill, net.vertiports))
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config, base_seed=args.seed, jobs=args.jobs, solver=args.solver,
                                   time_limit=args.time_limit, rel_gap=args.gap, output_dir=args.output)
    report = run_pipeline(config)
    emit_plots(report, Path(config.output_dir) / "plots")
    failed = report.failures
    print(f"{len(report.rows)} profiles, {len(failed)} with failures; results in {config.output_dir}",
          file=sys.stderr)
    for row in failed:
        print(f"  {row.day} add={row.add:g} ar={row.ar_coeff:g}: {row.error or 'incomplete sweep'}", file=sys.stderr)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_plot(args) -> int:
    report = AggregateReport.from_csv(_read(args.report))
    for path in emit_plots(report, args.out):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uamfleet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-schedule", help="write a synthetic airline schedule CSV")
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--flights", type=float, default=600.0, help="mean airline flights per day")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_schedule)

    p = sub.add_parser("gen-demand", help="sample passenger arrival profiles")
    p.add_argument("--schedule", help="schedule CSV (default: synthetic)")
    p.add_argument("--add", type=float, required=True, help="average daily directional demand")
    p.add_argument("--ar-coeff", type=float, default=0.7)
    p.add_argument("--days", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_demand)

    p = sub.add_parser("dispatch", help="turn one day's arrivals into a flight demand series")
    p.add_argument("--profiles", required=True)
    p.add_argument("--day", help="ISO date (default: first day in the file)")
    p.add_argument("--max-wait", type=float, default=5.0)
    _add_network_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dispatch)

    for name, func, text in (("size-fleet", cmd_size_fleet, "solve the zero-spill fleet-sizing model"),
                             ("spill", cmd_spill, "solve the spill model at a fixed fleet size")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--series", required=True)
        if name == "spill":
            p.add_argument("--fleet-size", type=int, required=True)
        _add_network_flags(p)
        _add_solver_flags(p)
        p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate-bounds", help="run the lower- and upper-bound policies")
    p.add_argument("--series", required=True)
    p.add_argument("--fleet-size", type=int, required=True)
    p.add_argument("--lower-out")
    p.add_argument("--upper-out")
    _add_network_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate_bounds)

    p = sub.add_parser("experiment", help="run the full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--solver", choices=("highs", "scipy"))
    p.add_argument("--time-limit", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--output", help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("plot", help="render SVG charts from a report.csv")
    p.add_argument("--report", required=True)
    p.add_argument("--out", default="plots")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "solver", None) and args.command in ("size-fleet", "spill"):
            check_solver(args.solver)
        return args.func(args)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ScheduleParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
