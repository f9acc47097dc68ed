"""Re-check a solution against the model's constraints, computed from scratch.

Nothing here reads the built ``MilpModel``; constraints are re-derived from the
network configuration and demand so a builder bug cannot hide itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.milp.build import FLEET_SIZING, SPILL, model_time_demand
from uamfleet.milp.model import Solution, Status
from uamfleet.network import NetworkConfig

TOL = 1e-6


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: tuple
    detail: str

    def __str__(self) -> str:
        return f"{self.constraint}{self.index}: {self.detail}"


def _values_view(solution: Solution):
    vals = solution.values

    def get(kind, *index):
        return vals.get(kind + "_" + "_".join(map(str, index)), 0)

    return get


def validate_solution(config: NetworkConfig, model_kind: str, inputs: dict, solution: Solution) -> list[Violation]:
    """``inputs`` holds ``series`` and, for the spill model, ``fleet_size``."""
    if not solution.status.has_solution:
        return [Violation("status", (), f"no solution to validate ({solution.status.value})")]
    series: DemandTimeSeries = inputs["series"]
    get = _values_view(solution)
    T, K = config.horizon, config.levels
    ports = range(config.n_ports)
    pairs = config.pairs
    out: list[Violation] = []

    landings: dict[tuple[int, int, int], list[int]] = {}
    for i, j in pairs:
        for t_dep in range(1, T + 1):
            landings.setdefault((i, j, t_dep + config.tau_at(i, j, t_dep)), []).append(t_dep)

    for name, x in solution.values.items():
        if x < 0 or abs(x - round(x)) > TOL:
            out.append(Violation("integrality", (name,), f"value {x}"))

    # (2) dynamics, t = 1..T
    for i in ports:
        for k in range(K + 1):
            for t in range(1, T + 1):
                inflow = get("n", i, k, t - 1)
                outflow = 0
                for j in ports:
                    if j == i:
                        continue
                    for t_dep in landings.get((j, i, t), ()):
                        k_dep = k + config.kappa_at(j, i, t_dep)
                        if k_dep <= K:
                            inflow += get("u", j, i, k_dep, t_dep)
                    outflow += get("u", i, j, k, t)
                for x in range(k):
                    t0 = t - config.charge_steps(x, k)
                    if t0 >= 0:
                        inflow += get("C", i, x, k, t0)
                for y in range(k + 1, K + 1):
                    outflow += get("C", i, k, y, t)
                lhs = get("n", i, k, t)
                if abs(lhs - (inflow - outflow)) > TOL:
                    out.append(Violation("dynamics", (i, k, t), f"n={lhs} but flows give {inflow - outflow}"))

    # (4) departures need a level above reserve that survives the trip
    for i, j in pairs:
        for t in range(T + 1):
            for k in range(config.min_flight_level(i, j, t)):
                if get("u", i, j, k, t):
                    out.append(Violation("energy", (i, j, k, t), f"{get('u', i, j, k, t)} departures at level {k}"))

    # (5) cyclic start/end states
    for i in ports:
        for k in range(K + 1):
            if get("n", i, k, 0) != get("n", i, k, T):
                out.append(Violation("cyclic", ("n", i, k), "n(0) != n(T)"))
            for y in range(k + 1, K + 1):
                if get("C", i, k, y, 0) != get("C", i, k, y, T):
                    out.append(Violation("cyclic", ("C", i, k, y), "C(0) != C(T)"))
    for i, j in pairs:
        for k in range(K + 1):
            if get("u", i, j, k, 0) != get("u", i, j, k, T):
                out.append(Violation("cyclic", ("u", i, j, k), "u(0) != u(T)"))

    fleet = sum(get("n", i, k, 0) for i in ports for k in range(K + 1)) + sum(
        get("C", i, x, y, 0) for i in ports for x in range(K + 1) for y in range(x + 1, K + 1))

    if model_kind == FLEET_SIZING:
        demand = model_time_demand(config, series, "flights")
        for i, j in pairs:
            for t in range(T + 1):
                served = sum(get("u", i, j, k, t) for k in range(1, K + 1))
                if served < demand[i, j, t]:
                    out.append(Violation("demand", (i, j, t), f"{served} flights < demand {demand[i, j, t]}"))
    elif model_kind == SPILL:
        pax = model_time_demand(config, series, "passengers")
        for i, j in pairs:
            for t in range(T + 1):
                s = get("s", i, j, t)
                if s < 0:
                    out.append(Violation("spill_pos", (i, j, t), f"spill {s} < 0"))
                seats = config.seat_capacity * sum(get("u", i, j, k, t) for k in range(K + 1))
                if s < pax[i, j, t] - seats:
                    out.append(Violation("spill_def", (i, j, t), f"spill {s} < {pax[i, j, t]} - {seats}"))
        if fleet != inputs["fleet_size"]:
            out.append(Violation("fleet_fix", (), f"fleet {fleet} != {inputs['fleet_size']}"))
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")

    # derived: idle + airborne + charging aircraft is the same at every t
    busy = [0] * (T + 2)  # difference array of in-flight / mid-charge aircraft
    for name, x in solution.values.items():
        kind, *idx = name.split("_")
        idx = [int(v) for v in idx]
        if kind == "u" and idx[-1] >= 1:
            i, j, _, t0 = idx
            start, stop = t0, min(t0 + config.tau_at(i, j, t0), T + 1)
        elif kind == "C":
            i, x0, y0, t0 = idx
            start, stop = t0, min(t0 + config.charge_steps(x0, y0), T + 1)
        else:
            continue
        busy[start] += x
        busy[stop] -= x
    in_service = 0
    for t in range(T + 1):
        in_service += busy[t]
        total = in_service + sum(get("n", i, k, t) for i in ports for k in range(K + 1))
        if total != fleet:
            out.append(Violation("conservation", (t,), f"{total} aircraft in service != fleet {fleet}"))
    return out


def is_valid(config, model_kind, inputs, solution) -> bool:
    return not validate_solution(config, model_kind, inputs, solution)


__all__ = ["Violation", "validate_solution", "is_valid", "Status"]
