"""Two-stage (lexicographic) fleet sizing.

With the flight penalty in the objective the optimum is no longer an integer,
so branch-and-bound cannot round its dual bound up and can spend minutes
closing a gap that is really zero.  Here the fleet is minimized first with a
pure integer objective, then fixed while the flight term is minimized (only
when the requested tolerance is tighter than that term).  The result is a solution of the ordinary fleet-sizing model and its bound is a
valid bound for that model as long as ``flight_weight * flights < 1``.
"""

from __future__ import annotations

import math
from dataclasses import replace

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.milp.adapters import SolverLimits, _classify, solve
from uamfleet.milp.build import DEFAULT_FLIGHT_WEIGHT, _fleet_terms, build_fleet_sizing, fleet_size_of
from uamfleet.milp.model import Solution, Status
from uamfleet.network import NetworkConfig

BOUND_TOL = 1e-6


def _within_tolerance(objective: float, bound: float, limits: SolverLimits) -> bool:
    gap = objective - bound
    allowed = max(limits.abs_gap or 0.0, limits.rel_gap * abs(objective))
    return gap <= allowed + BOUND_TOL


def solve_fleet_sizing(config: NetworkConfig, series: DemandTimeSeries, adapter="highs",
                       limits: SolverLimits = SolverLimits(),
                       flight_weight: float = DEFAULT_FLIGHT_WEIGHT) -> Solution:
    full = build_fleet_sizing(config, series, flight_weight)
    first = solve(build_fleet_sizing(config, series, 0.0), adapter, limits)
    if not first.status.has_solution:
        return first
    fleet = fleet_size_of(first, config)
    fleet_bound = float(math.ceil(first.bound - BOUND_TOL)) if first.bound is not None else 0.0
    proven = first.status is Status.OPTIMAL or fleet_bound >= fleet
    values, runtime, bound = first.values, first.runtime, fleet_bound
    second_optimal = False

    # the first-stage solution is feasible for the full model; only polish the
    # flight term when the caller's tolerance is tighter than that term
    if proven and not _within_tolerance(full.evaluate_objective(values), bound, limits):
        pinned = build_fleet_sizing(config, series, flight_weight)
        pinned.add_constraint("fleet_fix", (), _fleet_terms(pinned, config), "=", float(fleet))
        remaining = max(limits.time_limit - first.runtime, 1.0)
        second = solve(pinned, adapter, replace(limits, time_limit=remaining), start=values)
        runtime += second.runtime
        if second.status.has_solution:
            values = second.values
            second_optimal = second.status is Status.OPTIMAL
            if second.bound is not None:
                # any larger fleet costs at least fleet + 1, more than anything at this size
                bound = max(bound, second.bound)

    objective = full.evaluate_objective(values)
    bound = min(bound, objective)
    exact = proven and (second_optimal or objective - bound <= BOUND_TOL)
    status, gap = _classify(True, objective, bound, exact)
    return Solution(status, objective, values, gap, bound, runtime, first.solver)
