from pathlib import Path

import numpy as np
import pytest

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.milp import (
    FLEET_SIZING,
    SPILL,
    MilpModel,
    SolverError,
    SolverLimits,
    Status,
    build_fleet_sizing,
    build_spill,
    fleet_size_of,
    get_adapter,
    solve,
    solve_fleet_sizing,
    spill_by_step,
    spill_start,
    write_lp,
)
from uamfleet.milp.model import TAGS
from uamfleet.milp.validate import validate_solution
from uamfleet.network import NetworkConfig

DATA = Path(__file__).parent / "data"
EXACT = SolverLimits.exact(time_limit=60)
ADAPTERS = ["highs", "scipy"]


def small_config(**kw):
    base = dict(steps_per_day=12, levels=4, kappa=2, tau=2, gamma=(1, 1, 1, 1), seat_capacity=4)
    base.update(kw)
    return NetworkConfig(**base)


def series_with(config, *flights):
    """``flights`` are (i, j, day_step, count, passengers)."""
    s = DemandTimeSeries.zeros(config.vertiports, config.steps_per_day, seat_capacity=config.seat_capacity)
    for i, j, step, f, p in flights:
        s.flights[i, j, step] += f
        s.passengers[i, j, step] += p
    return s


def round_trip_config():
    return NetworkConfig(steps_per_day=7, levels=4, kappa=2, tau=2, gamma=(1, 1, 1, 1))


# --- model structure -----------------------------------------------------------------

def test_fleet_model_structure():
    cfg = small_config()
    model = build_fleet_sizing(cfg, series_with(cfg, (0, 1, 3, 1, 2)))
    T, K = cfg.horizon, cfg.levels
    kinds = {}
    for v in model.variables:
        kinds[v.kind] = kinds.get(v.kind, 0) + 1
        assert v.lb == 0 and v.integer
    assert kinds == {"n": 2 * (K + 1) * (T + 1), "u": 2 * (K + 1) * (T + 1), "C": 2 * 10 * (T + 1)}
    assert {c.tag for c in model.constraints} <= set(TAGS)
    tags = [c.tag for c in model.constraints]
    assert tags.count("dynamics") == 2 * (K + 1) * T
    assert tags.count("demand") == 1
    demand = next(c for c in model.constraints if c.tag == "demand")
    assert demand.index == (0, 1, 4) and demand.rhs == 1
    assert not any(v.name.startswith("u_0_0") or v.name.startswith("u_1_1") for v in model.variables)


def test_spill_model_structure():
    cfg = small_config()
    model = build_spill(cfg, series_with(cfg, (0, 1, 3, 1, 2)), fleet_size=2)
    tags = [c.tag for c in model.constraints]
    assert "demand" not in tags
    assert tags.count("fleet_fix") == 1
    assert tags.count("spill_def") == tags.count("spill_pos") == 2 * (cfg.horizon + 1)
    fix = next(c for c in model.constraints if c.tag == "fleet_fix")
    assert fix.sense == "=" and fix.rhs == 2


def test_builder_input_errors():
    cfg = small_config()
    bad = series_with(cfg)
    bad.flights[0, 0, 2] = 1
    with pytest.raises(ValueError):
        build_fleet_sizing(cfg, bad)
    with pytest.raises(ValueError):
        build_spill(cfg, series_with(cfg), fleet_size=-1)
    longer = DemandTimeSeries.zeros(cfg.vertiports, cfg.horizon + 3)
    longer.flights[0, 1, cfg.horizon + 1] = 1
    longer.passengers[0, 1, cfg.horizon + 1] = 1
    with pytest.raises(ValueError):
        build_fleet_sizing(cfg, longer)


# --- solved examples --------------------------------------------------------------

@pytest.mark.parametrize("adapter", ADAPTERS)
def test_zero_demand_needs_no_aircraft(adapter):
    cfg = small_config()
    s = series_with(cfg)
    sol = solve(build_fleet_sizing(cfg, s), adapter, EXACT)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(0)
    assert validate_solution(cfg, FLEET_SIZING, {"series": s}, sol) == []


@pytest.mark.parametrize("adapter", ADAPTERS)
def test_one_flight_needs_one_aircraft(adapter):
    cfg = NetworkConfig(steps_per_day=16, levels=4, kappa=4, tau=2, gamma=(1, 1, 1, 1))
    s = series_with(cfg, (0, 1, 9, 1, 3))
    sol = solve(build_fleet_sizing(cfg, s), adapter, EXACT)
    assert fleet_size_of(sol, cfg) == 1
    assert validate_solution(cfg, FLEET_SIZING, {"series": s}, sol) == []


@pytest.mark.parametrize("adapter", ADAPTERS)
def test_two_simultaneous_flights_need_two(adapter):
    cfg = small_config()
    s = series_with(cfg, (0, 1, 4, 2, 8))
    sol = solve(build_fleet_sizing(cfg, s), adapter, EXACT)
    assert fleet_size_of(sol, cfg) == 2
    assert validate_solution(cfg, FLEET_SIZING, {"series": s}, sol) == []


@pytest.mark.parametrize("ret_step,fleet", [(5, 1), (2, 2)])
def test_round_trip_timing(ret_step, fleet):
    cfg = round_trip_config()
    s = series_with(cfg, (0, 1, 1, 1, 2), (1, 0, ret_step, 1, 2))
    sol = solve(build_fleet_sizing(cfg, s), "highs", EXACT)
    assert fleet_size_of(sol, cfg) == fleet


def test_no_aircraft_spills_everything():
    cfg = small_config()
    s = series_with(cfg, (0, 1, 2, 2, 7), (1, 0, 6, 1, 3))
    sol = solve(build_spill(cfg, s, 0), "highs", EXACT)
    assert sol.objective_value == pytest.approx(10)
    assert spill_by_step(sol, cfg).sum() == 10
    assert spill_by_step(sol, cfg)[0, 1, 2] == 7


def test_zero_spill_at_optimal_fleet_and_warm_start():
    cfg = small_config()
    s = series_with(cfg, (0, 1, 2, 2, 7), (1, 0, 6, 1, 3), (0, 1, 8, 1, 1))
    fs = solve(build_fleet_sizing(cfg, s), "highs", EXACT)
    F = fleet_size_of(fs, cfg)
    start = spill_start(fs, cfg, s)
    for warm in (None, start):
        sol = solve(build_spill(cfg, s, F), "highs", EXACT, start=warm)
        assert spill_by_step(sol, cfg).sum() == 0
        assert validate_solution(cfg, SPILL, {"series": s, "fleet_size": F}, sol) == []


def test_flight_weight_leaves_integer_part_equal_to_fleet():
    cfg = small_config()
    s = series_with(cfg, (0, 1, 2, 2, 7), (1, 0, 6, 1, 3))
    sol = solve(build_fleet_sizing(cfg, s), "highs", EXACT)
    assert int(sol.objective_value) == fleet_size_of(sol, cfg)


def test_reserve_safety_and_cyclic_state():
    cfg = small_config()
    s = series_with(cfg, (0, 1, 2, 2, 7), (1, 0, 6, 1, 3))
    sol = solve(build_fleet_sizing(cfg, s), "highs", EXACT)
    T = cfg.horizon
    for name, value in sol.values.items():
        kind, *idx = name.split("_")
        if kind == "u":
            assert int(idx[2]) >= 1
    for i in range(2):
        for k in range(cfg.levels + 1):
            assert sol.get("n", i, k, 0) == sol.get("n", i, k, T)


# --- LP text and adapters ---------------------------------------------------------

def one_variable_model():
    model = MilpModel(name="one_var")
    col = model.add_variable("x")
    model.add_constraint("lower", (), {col: 1.0}, ">=", 1)
    model.objective = {col: 1.0}
    return model


def test_empty_model_lp():
    assert write_lp(MilpModel(name="empty")) == "\\ empty\nEND\n"


def test_one_variable_lp_matches_golden():
    assert write_lp(one_variable_model()) == (DATA / "one_var.lp").read_text()


def test_round_trip_model_lp_matches_golden():
    cfg = round_trip_config()
    s = series_with(cfg, (0, 1, 1, 1, 2), (1, 0, 5, 1, 2))
    text = write_lp(build_fleet_sizing(cfg, s))
    assert text == (DATA / "round_trip_fleet.lp").read_text()
    assert text == write_lp(build_fleet_sizing(cfg, s))


@pytest.mark.parametrize("adapter", ADAPTERS)
def test_trivial_model(adapter):
    sol = solve(one_variable_model(), adapter)
    assert sol.status is Status.OPTIMAL and sol["x"] == 3 - 2


def test_lower_bound_three():
    model = MilpModel(name="three")
    col = model.add_variable("x")
    model.add_constraint("lower", (), {col: 1.0}, ">=", 3)
    model.objective = {col: 1.0}
    for adapter in ADAPTERS:
        assert solve(model, adapter)["x"] == 3


def test_infeasible_model():
    model = MilpModel(name="infeasible")
    col = model.add_variable("x", ub=1)
    model.add_constraint("lower", (), {col: 1.0}, ">=", 3)
    model.objective = {col: 1.0}
    for adapter in ADAPTERS:
        assert solve(model, adapter).status is Status.INFEASIBLE


def test_tiny_time_limit_is_reported():
    cfg = NetworkConfig(steps_per_day=96, step_minutes=15, levels=8, soc_increment=0.1, kappa=1, tau=1)
    rng = np.random.default_rng(0)
    s = DemandTimeSeries.zeros(cfg.vertiports, 96)
    s.flights[0, 1] = rng.poisson(1.5, 96)
    s.flights[1, 0] = rng.poisson(1.5, 96)
    s.passengers[:] = s.flights * 3
    sol = solve(build_spill(cfg, s, 3), "highs", SolverLimits(time_limit=0.001))
    assert sol.status in (Status.TIMED_OUT, Status.FEASIBLE)
    if sol.status is Status.FEASIBLE:
        assert sol.gap > 0



@pytest.mark.parametrize("adapter", ADAPTERS)
def test_two_stage_sizing_small_cases(adapter):
    cfg = small_config()
    empty = solve_fleet_sizing(cfg, series_with(cfg), adapter)
    assert empty.status is Status.OPTIMAL and fleet_size_of(empty, cfg) == 0
    s = series_with(cfg, (0, 1, 2, 1, 3), (1, 0, 2, 1, 2))
    default = solve_fleet_sizing(cfg, s, adapter)
    exact = solve_fleet_sizing(cfg, s, adapter, EXACT)
    single = solve(build_fleet_sizing(cfg, s), adapter, EXACT)
    assert fleet_size_of(default, cfg) == fleet_size_of(exact, cfg) == 2
    assert exact.objective_value == pytest.approx(single.objective_value, abs=1e-9)
    assert default.bound <= exact.objective_value + 1e-9 <= default.objective_value + 1e-9


def test_two_stage_sizing_without_time_reports_no_solution():
    cfg = NetworkConfig(steps_per_day=96, step_minutes=15, levels=8, soc_increment=0.1, kappa=1, tau=1)
    rng = np.random.default_rng(0)
    s = DemandTimeSeries.zeros(cfg.vertiports, 96)
    s.flights[0, 1] = rng.poisson(1.5, 96)
    s.flights[1, 0] = rng.poisson(1.5, 96)
    sol = solve_fleet_sizing(cfg, s, "highs", SolverLimits(time_limit=0.001))
    assert sol.status in (Status.TIMED_OUT, Status.FEASIBLE)
    if sol.status.has_solution:
        assert validate_solution(cfg, FLEET_SIZING, {"series": s}, sol) == []

def test_unknown_adapter():
    with pytest.raises(SolverError):
        get_adapter("cplex")


def test_highs_adapter_keeps_lp(tmp_path):
    from uamfleet.milp import HighsAdapter

    path = tmp_path / "kept.lp"
    HighsAdapter(keep_lp=str(path)).solve(one_variable_model())
    assert path.read_text() == write_lp(one_variable_model())


def test_lp_relaxation_flag():
    cfg = small_config()
    s = series_with(cfg, (0, 1, 2, 2, 7), (1, 0, 6, 1, 3))
    model = build_fleet_sizing(cfg, s)
    relaxed = solve(model, "highs", SolverLimits(relax=True))
    exact = solve(model, "highs", EXACT)
    assert relaxed.objective_value <= exact.objective_value + 1e-9
