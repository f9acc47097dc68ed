"""End-to-end runs: demand profile -> dispatch -> fleet sizing -> spill sweep -> bounds.

Work is split in two phases so an absolute sweep can be centred on each
scenario's median zero-spill fleet size: phase one generates every profile and
solves its fleet-sizing model, phase two solves the spill model at the sweep
sizes and runs the bound simulations.  Both phases map a pure worker over
independent tasks, optionally in a process pool.
"""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from uamfleet.demand import DemandParams, day_rng, flight_rates, generate_day, serialize_profiles
from uamfleet.dispatch import DemandTimeSeries, dispatch, serialize_series
from uamfleet.harness.config import ExperimentConfig, Scenario
from uamfleet.harness.report import AggregateReport, ProfileRow, SweepPoint
from uamfleet.heuristics import simulate_lower_bound, simulate_upper_bound
from uamfleet.milp import (
    FLEET_SIZING,
    SPILL,
    MilpModel,
    SolverError,
    Status,
    build_spill,
    fleet_size_of,
    get_adapter,
    solve_fleet_sizing,
    spill_by_step,
    spill_start,
)
from uamfleet.milp.validate import validate_solution
from uamfleet.schedule import AirlineSchedule, parse_schedule, serialize_schedule, synthesize

log = logging.getLogger(__name__)


def load_schedule(config: ExperimentConfig) -> AirlineSchedule:
    if config.schedule_csv:
        return parse_schedule(Path(config.schedule_csv).read_text())
    return synthesize(config.synthetic)


def check_solver(name: str) -> None:
    """Solve a one-variable model so a missing or broken solver fails up front."""
    model = MilpModel(name="preflight")
    col = model.add_variable("x")
    model.add_constraint("lower", (), {col: 1.0}, ">=", 1)
    model.objective = {col: 1.0}
    try:
        sol = get_adapter(name).solve(model)
    except (SolverError, ImportError, OSError) as exc:
        raise SolverError(f"solver {name!r} is not usable ({exc}); install highspy or pass --solver scipy") from None
    if sol.status is not Status.OPTIMAL or sol["x"] != 1:
        raise SolverError(f"solver {name!r} failed a trivial model (status {sol.status.value})")


@dataclass
class _SizedProfile:
    scenario_idx: int
    day: object
    series: DemandTimeSeries | None = None
    row: ProfileRow | None = None
    start: dict = field(default_factory=dict)


# worker globals, set once per process
_SCHEDULE: AirlineSchedule | None = None
_CONFIG: ExperimentConfig | None = None
_RATES: dict = {}


def _init_worker(schedule: AirlineSchedule, config: ExperimentConfig) -> None:
    global _SCHEDULE, _CONFIG
    _SCHEDULE, _CONFIG = schedule, config
    _RATES.clear()


def _size_task(task) -> tuple[_SizedProfile, str]:
    scenario_idx, day = task
    cfg, sched = _CONFIG, _SCHEDULE
    scen = cfg.scenarios[scenario_idx]
    out = _SizedProfile(scenario_idx, day)
    row = ProfileRow(day=day.isoformat(), add=scen.add, ar_coeff=scen.ar_coeff)
    out.row = row
    params = DemandParams(add=scen.add, ar_coeff=scen.ar_coeff)
    # every scenario reuses the same per-day stream (common random numbers)
    profile = generate_day(sched, day, params, day_rng(cfg.base_seed, day), _rates(scen))
    profile_csv = serialize_profiles([profile])
    row.realized_passengers = len(profile.minutes)
    try:
        net = cfg.network
        series = dispatch(profile, seat_capacity=net.seat_capacity, max_wait_minutes=cfg.max_wait_minutes,
                          step_minutes=net.step_minutes, vertiports=net.vertiports, steps_per_day=net.steps_per_day)
        out.series = series
        row.realized_flights = series.total_flights
        sol = solve_fleet_sizing(net, series, get_adapter(cfg.solver), cfg.limits)
        row.fleet_status, row.fleet_gap, row.fleet_runtime = sol.status.value, sol.absolute_gap, sol.runtime
        if not sol.status.has_solution:
            row.error = f"fleet sizing: {sol.status.value}"
            return out, profile_csv
        row.zero_spill_fleet_size = fleet_size_of(sol, net)
        row.violations += len(validate_solution(net, FLEET_SIZING, {"series": series}, sol))
        out.start = spill_start(sol, net, series)
    except Exception as exc:  # recorded per row; the run carries on
        row.error = f"{type(exc).__name__}: {exc}"
    return out, profile_csv


def _rates(scen: Scenario):
    if scen.add not in _RATES:
        _RATES[scen.add] = flight_rates(_SCHEDULE, scen.add)
    return _RATES[scen.add]


def _spill_task(task) -> ProfileRow:
    sized, sizes = task
    cfg = _CONFIG
    net = cfg.network
    row, series = sized.row, sized.series
    fstar = row.zero_spill_fleet_size
    adapter = get_adapter(cfg.solver)
    for f in sizes:
        point = SweepPoint(f)
        row.sweep[f] = point
        try:
            if f > fstar:
                # the zero-spill fleet plus idle aircraft is feasible
                point.spill, point.status, point.gap = 0.0, "implied", 0.0
            else:
                start = sized.start if f == fstar else None
                sol = adapter.solve(build_spill(net, series, f), cfg.limits, start=start)
                point.status, point.gap, point.runtime = sol.status.value, sol.absolute_gap, sol.runtime
                if sol.status.has_solution:
                    point.spill = float(spill_by_step(sol, net).sum())
                    row.violations += len(validate_solution(net, SPILL, {"series": series, "fleet_size": f}, sol))
            if cfg.bounds:
                point.lower = simulate_lower_bound(net, series, f).daily_spill
                point.upper = simulate_upper_bound(net, series, f).daily_spill
        except Exception as exc:
            point.status = "error"
            row.error = f"spill F={f}: {type(exc).__name__}: {exc}"
    return row


def _map(fn, tasks, schedule, config):
    if config.jobs == 1 or len(tasks) <= 1:
        _init_worker(schedule, config)
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=config.jobs, initializer=_init_worker,
                             initargs=(schedule, config)) as pool:
        return list(pool.map(fn, tasks))


def sweep_sizes(config: ExperimentConfig, rows: list[ProfileRow], fstar: int | None) -> list[int]:
    """Fleet sizes for one profile; ``rows`` are the profile's scenario group."""
    sweep = config.sweep
    if sweep.mode == "relative":
        return [] if fstar is None else list(range(max(fstar - sweep.depth, 0), fstar + 1))
    if sweep.sizes:
        return sorted(set(sweep.sizes))
    sized = [r.zero_spill_fleet_size for r in rows if r.zero_spill_fleet_size is not None]
    if not sized:
        return []
    centre = int(round(statistics.median(sized)))
    return list(range(max(centre - sweep.depth, 0), centre + 1))


def run_pipeline(config: ExperimentConfig, write: bool = True) -> AggregateReport:
    check_solver(config.solver)
    schedule = load_schedule(config)
    days = schedule.days if config.days is None else schedule.days[: config.days]
    out_dir = Path(config.output_dir)

    tasks = [(k, d) for k in range(len(config.scenarios)) for d in days]
    log.info("sizing fleets for %d profiles", len(tasks))
    sized_and_csv = _map(_size_task, tasks, schedule, config)
    sized = [s for s, _ in sized_and_csv]

    by_scenario: dict[int, list[_SizedProfile]] = {}
    for s in sized:
        by_scenario.setdefault(s.scenario_idx, []).append(s)
    spill_tasks = []
    for k, group in by_scenario.items():
        group_rows = [s.row for s in group]
        for s in group:
            if s.row.error or s.row.zero_spill_fleet_size is None:
                continue
            spill_tasks.append((s, sweep_sizes(config, group_rows, s.row.zero_spill_fleet_size)))
    log.info("solving spill sweeps for %d profiles", len(spill_tasks))
    finished = {(r.add, r.ar_coeff, r.day): r for r in _map(_spill_task, spill_tasks, schedule, config)}
    rows = [finished.get((s.row.add, s.row.ar_coeff, s.row.day), s.row) for s in sized]

    report = AggregateReport(rows, [scen for scen in config.scenarios])
    if write:
        out_dir.mkdir(parents=True, exist_ok=True)
        if not config.schedule_csv:
            (out_dir / "schedule.csv").write_text(serialize_schedule(schedule))
        for k, scen in enumerate(config.scenarios):
            chunks = [csv_text for s, csv_text in sized_and_csv if s.scenario_idx == k]
            header, body = "day,origin,minute\n", "".join(c.split("\n", 1)[1] for c in chunks)
            (out_dir / f"profiles_{scen.label}.csv").write_text(header + body)
            series_dir = out_dir / "series" / scen.label
            series_dir.mkdir(parents=True, exist_ok=True)
            for s in sized:
                if s.scenario_idx == k and s.series is not None:
                    (series_dir / f"{s.row.day}.csv").write_text(serialize_series(s.series))
        report.write(out_dir)
        (out_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    return report
