"""Fleet-sizing and spill integer programs on the time-space network.

Variables (all integer, >= 0), model time ``t = 0..T``:

* ``n_i_k_t``    idle aircraft at vertiport i with SoC level k
* ``u_i_j_k_t``  departures i->j at SoC level k
* ``C_i_x_y_t``  aircraft starting a charge x->y at vertiport i
* ``s_i_j_t``    spilled passengers i->j (spill model only)

Day step ``s`` of a demand series is model time ``s + 1``.  Terms whose time
index falls outside ``0..T`` (charges started before the day, departures at
``t' < 1``) contribute nothing; together with the cyclic constraints this gives
a steady-state daily operation.
"""

from __future__ import annotations

import numpy as np

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.milp.model import MilpModel, var_name
from uamfleet.network import NetworkConfig, arrival_sets

DEFAULT_FLIGHT_WEIGHT = 1e-5

FLEET_SIZING = "fleet_sizing"
SPILL = "spill"


def model_time_demand(config: NetworkConfig, series: DemandTimeSeries, which: str = "flights") -> np.ndarray:
    """Demand on model time 0..T as an array (V, V, T+1), zero-padded."""
    horizon = config.horizon
    data = series.flights if which == "flights" else series.passengers
    n = config.n_ports
    if data.shape[:2] != (n, n):
        raise ValueError(f"series has {data.shape[0]} vertiports, network has {n}")
    if any(data[i, i].any() for i in range(n)):
        raise ValueError("demand from a vertiport to itself is not allowed")
    out = np.zeros((n, n, horizon + 1), dtype=np.int64)
    steps = data.shape[2]
    usable = min(steps, horizon)
    if steps > usable and data[:, :, usable:].any():
        raise ValueError(f"demand at day step >= {usable} lies beyond the planning horizon T={horizon}")
    out[:, :, 1:usable + 1] = data[:, :, :usable]
    return out


def _add_state_variables(model: MilpModel, config: NetworkConfig) -> None:
    horizon, levels, ports = config.horizon, config.levels, range(config.n_ports)
    for i in ports:
        for k in range(levels + 1):
            for t in range(horizon + 1):
                model.add_variable("n", (i, k, t))
    for i, j in config.pairs:
        for k in range(levels + 1):
            for t in range(horizon + 1):
                model.add_variable("u", (i, j, k, t))
    for i in ports:
        for x in range(levels + 1):
            for y in range(x + 1, levels + 1):
                for t in range(horizon + 1):
                    model.add_variable("C", (i, x, y, t))


def _col(model: MilpModel, kind: str, *index) -> int:
    return model.column(var_name(kind, index))


def _fleet_terms(model: MilpModel, config: NetworkConfig) -> dict:
    terms = {}
    for i in range(config.n_ports):
        for k in range(config.levels + 1):
            terms[_col(model, "n", i, k, 0)] = 1.0
        for x in range(config.levels + 1):
            for y in range(x + 1, config.levels + 1):
                terms[_col(model, "C", i, x, y, 0)] = 1.0
    return terms


def _add_common_constraints(model: MilpModel, config: NetworkConfig) -> None:
    """Aircraft-state dynamics, reserve/energy feasibility of departures, cyclicity."""
    horizon, levels = config.horizon, config.levels
    arrivals = arrival_sets(config)
    durations = {(x, y): config.charge_steps(x, y) for x in range(levels + 1) for y in range(x + 1, levels + 1)}
    ports = range(config.n_ports)

    for i in ports:
        for k in range(levels + 1):
            for t in range(1, horizon + 1):
                terms: dict[int, float] = {}

                def add(col, coef):
                    terms[col] = terms.get(col, 0.0) + coef

                add(_col(model, "n", i, k, t), 1.0)
                add(_col(model, "n", i, k, t - 1), -1.0)
                for j in ports:
                    if j == i:
                        continue
                    # arrivals j->i landing at t with level k
                    for t_dep in arrivals.get((j, i, t), ()):
                        k_dep = k + config.kappa_at(j, i, t_dep)
                        if k_dep <= levels:
                            add(_col(model, "u", j, i, k_dep, t_dep), -1.0)
                    add(_col(model, "u", i, j, k, t), 1.0)
                for x in range(k):
                    t_start = t - durations[(x, k)]
                    if t_start >= 0:
                        add(_col(model, "C", i, x, k, t_start), -1.0)
                for y in range(k + 1, levels + 1):
                    add(_col(model, "C", i, k, y, t), 1.0)
                model.add_constraint("dynamics", (i, k, t), terms, "=", 0.0)

    for i, j in config.pairs:
        for t in range(horizon + 1):
            for k in range(config.min_flight_level(i, j, t)):
                model.add_constraint("energy", (i, j, k, t), {_col(model, "u", i, j, k, t): 1.0}, "=", 0.0)

    for v in list(model.variables):
        if v.kind in ("n", "u", "C") and v.index[-1] == 0:
            end = var_name(v.kind, v.index[:-1] + (horizon,))
            model.add_constraint("cyclic", (v.kind,) + v.index[:-1],
                                 {model.column(v.name): 1.0, model.column(end): -1.0}, "=", 0.0)


def _flight_objective(model: MilpModel, flight_weight: float) -> dict:
    return {c: flight_weight for c, v in enumerate(model.variables) if v.kind == "u"}


def build_fleet_sizing(config: NetworkConfig, flights: DemandTimeSeries,
                       flight_weight: float = DEFAULT_FLIGHT_WEIGHT) -> MilpModel:
    """Minimum fleet (idle + charging aircraft at t=0) serving every demanded flight."""
    demand = model_time_demand(config, flights, "flights")
    model = MilpModel(name="fleet_sizing", kind=FLEET_SIZING,
                      meta={"config": config, "series": flights, "flight_weight": flight_weight})
    _add_state_variables(model, config)
    _add_common_constraints(model, config)
    for i, j in config.pairs:
        for t in np.nonzero(demand[i, j])[0]:
            t = int(t)
            terms = {_col(model, "u", i, j, k, t): 1.0 for k in range(1, config.levels + 1)}
            model.add_constraint("demand", (i, j, t), terms, ">=", float(demand[i, j, t]))
    objective = _flight_objective(model, flight_weight)
    objective.update(_fleet_terms(model, config))
    model.objective = objective
    return model


def build_spill(config: NetworkConfig, series: DemandTimeSeries, fleet_size: int,
                flight_weight: float = DEFAULT_FLIGHT_WEIGHT) -> MilpModel:
    """Minimum total spill with exactly ``fleet_size`` aircraft; flights are optional."""
    if fleet_size < 0:
        raise ValueError(f"fleet size must be >= 0, got {fleet_size}")
    passengers = model_time_demand(config, series, "passengers")
    model = MilpModel(name=f"spill_F{fleet_size}", kind=SPILL,
                      meta={"config": config, "series": series, "flight_weight": flight_weight,
                            "fleet_size": fleet_size})
    _add_state_variables(model, config)
    horizon = config.horizon
    for i, j in config.pairs:
        for t in range(horizon + 1):
            model.add_variable("s", (i, j, t))
    _add_common_constraints(model, config)
    seats = float(config.seat_capacity)
    for i, j in config.pairs:
        for t in range(horizon + 1):
            s_col = _col(model, "s", i, j, t)
            model.add_constraint("spill_pos", (i, j, t), {s_col: 1.0}, ">=", 0.0)
            terms = {s_col: 1.0}
            for k in range(config.levels + 1):
                terms[_col(model, "u", i, j, k, t)] = seats
            model.add_constraint("spill_def", (i, j, t), terms, ">=", float(passengers[i, j, t]))
    model.add_constraint("fleet_fix", (), _fleet_terms(model, config), "=", float(fleet_size))
    objective = _flight_objective(model, flight_weight)
    for c, v in enumerate(model.variables):
        if v.kind == "s":
            objective[c] = 1.0
    model.objective = objective
    return model


def fleet_size_of(solution, config: NetworkConfig) -> int:
    """Aircraft idle or starting a charge at t=0."""
    total = 0
    for i in range(config.n_ports):
        for k in range(config.levels + 1):
            total += solution.get("n", i, k, 0)
        for x in range(config.levels + 1):
            for y in range(x + 1, config.levels + 1):
                total += solution.get("C", i, x, y, 0)
    return total


def spill_by_step(solution, config: NetworkConfig, n_steps: int | None = None) -> np.ndarray:
    """Spill per (i, j, day step) read from a spill-model solution."""
    n_steps = config.steps_per_day if n_steps is None else n_steps
    out = np.zeros((config.n_ports, config.n_ports, n_steps), dtype=np.int64)
    for i, j in config.pairs:
        for s in range(n_steps):
            out[i, j, s] = solution.get("s", i, j, s + 1)
    return out


def flights_flown(solution, config: NetworkConfig) -> int:
    return sum(v for name, v in solution.values.items() if name.startswith("u_"))


def spill_start(solution, config: NetworkConfig, series: DemandTimeSeries) -> dict:
    """Feasible spill-model assignment reusing the flights of ``solution``.

    A fleet-sizing optimum flies every demanded flight, so at its own fleet
    size the resulting spill is zero; it makes a cheap warm start.
    """
    pax = model_time_demand(config, series, "passengers")
    values = {name: v for name, v in solution.values.items() if not name.startswith("s_")}
    for i, j in config.pairs:
        for t in range(config.horizon + 1):
            seats = config.seat_capacity * sum(values.get(var_name("u", (i, j, k, t)), 0)
                                               for k in range(config.levels + 1))
            short = int(pax[i, j, t]) - seats
            if short > 0:
                values[var_name("s", (i, j, t))] = short
    return values
