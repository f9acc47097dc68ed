"""Exhaustive search for micro instances, used as a test oracle.

Instead of enumerating raw variable vectors, the search walks the time-space
network with one state per aircraft (aircraft are interchangeable, so the
fleet state is a sorted tuple).  For every possible start-of-day state it runs
a memoized depth-first search over all per-step decisions and requires the
state after the last step to equal the start state.  The dynamics equation is
satisfied by construction; demand, energy and cyclicity are enforced as the
search goes.

Charges are taken one SoC level at a time.  A charge x->y is the same as the
chain x->x+1->...->y restarted at each completion step (durations add up), so
the optimum is unchanged while the branching factor drops sharply.
"""

from __future__ import annotations

import itertools
from collections import Counter
from functools import lru_cache

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.milp.build import DEFAULT_FLIGHT_WEIGHT, FLEET_SIZING, SPILL, model_time_demand
from uamfleet.milp.model import MilpModel, Solution, Status
from uamfleet.network import NetworkConfig

MAX_HORIZON = 10
MAX_LEVELS = 4
MAX_FLEET = 3
INFEASIBLE = (float("inf"), float("inf"))


class InstanceTooLargeError(ValueError):
    pass


def _compositions(total: int, parts: int):
    """All ways to split ``total`` identical items into ``parts`` ordered bins."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _check_size(config: NetworkConfig, fleet_bound: int) -> None:
    if config.n_ports != 2:
        raise InstanceTooLargeError("brute force handles exactly two vertiports")
    if config.horizon > MAX_HORIZON:
        raise InstanceTooLargeError(f"horizon T={config.horizon} exceeds {MAX_HORIZON}")
    if config.levels > MAX_LEVELS:
        raise InstanceTooLargeError(f"K={config.levels} exceeds {MAX_LEVELS}")
    if fleet_bound > MAX_FLEET:
        raise InstanceTooLargeError(f"fleet bound {fleet_bound} exceeds {MAX_FLEET}")


class _Search:
    def __init__(self, config: NetworkConfig, series: DemandTimeSeries, kind: str):
        self.cfg = config
        self.kind = kind
        self.T = config.horizon
        self.K = config.levels
        self.flights = model_time_demand(config, series, "flights")
        self.pax = model_time_demand(config, series, "passengers")
        self.dur = {(x, y): config.charge_steps(x, y) for x in range(self.K + 1) for y in range(x + 1, self.K + 1)}

    def start_items(self):
        items = [("I", i, k) for i in range(2) for k in range(self.K + 1)]
        items += [("S", i, x, x + 1) for i in range(2) for x in range(self.K)]
        return items

    def initial_state(self, start):
        out = []
        for item in start:
            if item[0] == "I":
                out.append(item)
            else:
                _, i, x, y = item
                out.append(("C", i, self.dur[(x, y)], y))
        return tuple(sorted(out))

    def actions(self, item, t):
        """Possible (decision, next-item) pairs for one idle aircraft at time t."""
        _, i, k = item
        acts = [(None, item)]
        if t < self.T:
            for j in range(2):
                if j == i or k < self.cfg.min_flight_level(i, j, t):
                    continue
                t_arr = t + self.cfg.tau_at(i, j, t)
                if t_arr <= self.T:
                    acts.append((("u", i, j, k), ("F", j, t_arr, k - self.cfg.kappa_at(i, j, t))))
        for y in range(k + 1, min(k + 1, self.K) + 1):
            if t == self.T:
                acts.append((("C", i, k, y), ("S", i, k, y)))
            elif t + self.dur[(k, y)] <= self.T:
                acts.append((("C", i, k, y), ("C", i, t + self.dur[(k, y)], y)))
        return acts

    def step_cost(self, t, departures: Counter):
        flown = sum(departures.values())
        primary = 0
        for i, j in ((0, 1), (1, 0)):
            dep = departures.get((i, j), 0)
            if self.kind == FLEET_SIZING:
                if dep < self.flights[i, j, t]:
                    return None
            else:
                primary += max(0, int(self.pax[i, j, t]) - self.cfg.seat_capacity * dep)
        return primary, flown

    def solve_from(self, start):
        """Best (primary, flights) cost and per-step decisions for one start state."""
        target = tuple(sorted(start))
        T = self.T

        @lru_cache(maxsize=None)
        def best(t, state):
            if t == T:
                return ((0, 0), ()) if state == target else (INFEASIBLE, ())
            t1 = t + 1
            fixed, idle = [], Counter()
            for item in state:
                if item[0] == "F" and item[2] == t1:
                    idle[("I", item[1], item[3])] += 1
                elif item[0] == "C" and item[2] == t1:
                    idle[("I", item[1], item[3])] += 1
                elif item[0] == "I":
                    idle[item] += 1
                else:
                    fixed.append(item)
            if t1 == T and fixed:
                return INFEASIBLE, ()
            groups = sorted(idle.items())
            per_group = []
            for item, count in groups:
                acts = self.actions(item, t1)
                per_group.append([(acts, split) for split in _compositions(count, len(acts))])
            best_cost, best_path = INFEASIBLE, ()
            for combo in itertools.product(*per_group):
                nxt = list(fixed)
                decisions = Counter()
                departures = Counter()
                for acts, split in combo:
                    for (decision, new_item), n in zip(acts, split):
                        if not n:
                            continue
                        nxt.extend([new_item] * n)
                        if decision is not None:
                            decisions[decision] += n
                            if decision[0] == "u":
                                departures[(decision[1], decision[2])] += n
                cost = self.step_cost(t1, departures)
                if cost is None:
                    continue
                sub_cost, sub_path = best(t1, tuple(sorted(nxt)))
                if sub_cost == INFEASIBLE:
                    continue
                total = (cost[0] + sub_cost[0], cost[1] + sub_cost[1])
                if total < best_cost:
                    best_cost = total
                    best_path = ((tuple(sorted(decisions.items())), tuple(sorted(nxt))),) + sub_path
            return best_cost, best_path

        cost, path = best(0, self.initial_state(start))
        best.cache_clear()
        return cost, path

    def values(self, start, path) -> dict:
        vals: Counter = Counter()
        for item in start:
            if item[0] == "I":
                vals[f"n_{item[1]}_{item[2]}_0"] += 1
            else:
                vals[f"C_{item[1]}_{item[2]}_{item[3]}_0"] += 1
        for t, (decisions, state) in enumerate(path, start=1):
            for decision, n in decisions:
                if decision[0] == "u":
                    _, i, j, k = decision
                    vals[f"u_{i}_{j}_{k}_{t}"] += n
                else:
                    _, i, x, y = decision
                    vals[f"C_{i}_{x}_{y}_{t}"] += n
            for item in state:
                if item[0] == "I":
                    vals[f"n_{item[1]}_{item[2]}_{t}"] += 1
        return dict(vals)


def _spill_values(search: _Search, values: dict) -> dict:
    out = dict(values)
    for i, j in ((0, 1), (1, 0)):
        for t in range(search.T + 1):
            seats = search.cfg.seat_capacity * sum(values.get(f"u_{i}_{j}_{k}_{t}", 0) for k in range(search.K + 1))
            s = max(0, int(search.pax[i, j, t]) - seats)
            if s:
                out[f"s_{i}_{j}_{t}"] = s
    return out


def brute_force_solve(config: NetworkConfig | MilpModel, series: DemandTimeSeries | None = None,
                      kind: str = FLEET_SIZING, fleet_size: int | None = None,
                      flight_weight: float = DEFAULT_FLIGHT_WEIGHT, max_fleet: int = MAX_FLEET) -> Solution:
    """Exact optimum of a micro fleet-sizing or spill instance.

    Accepts either explicit inputs or a model built by ``build_fleet_sizing`` /
    ``build_spill`` (its inputs are read from ``model.meta``).
    """
    if isinstance(config, MilpModel):
        model = config
        config, series = model.meta["config"], model.meta["series"]
        kind, flight_weight = model.kind, model.meta["flight_weight"]
        fleet_size = model.meta.get("fleet_size")
    if kind == SPILL:
        if fleet_size is None or fleet_size < 0:
            raise ValueError("spill instances need a nonnegative fleet size")
        _check_size(config, fleet_size)
        sizes = [fleet_size]
    elif kind == FLEET_SIZING:
        _check_size(config, max_fleet)
        sizes = range(max_fleet + 1)
    else:
        raise ValueError(f"unknown model kind {kind!r}")

    search = _Search(config, series, kind)
    items = search.start_items()
    for size in sizes:
        best_cost, best_start, best_path = INFEASIBLE, None, ()
        for start in itertools.combinations_with_replacement(items, size):
            cost, path = search.solve_from(start)
            if cost < best_cost:
                best_cost, best_start, best_path = cost, start, path
        if best_cost == INFEASIBLE:
            continue
        values = search.values(best_start, best_path)
        if kind == SPILL:
            values = _spill_values(search, values)
            objective = best_cost[0] + flight_weight * best_cost[1]
        else:
            objective = size + flight_weight * best_cost[1]
        return Solution(Status.OPTIMAL, objective, values, 0.0, objective, 0.0, "brute_force")
    if kind == FLEET_SIZING:
        raise InstanceTooLargeError(f"no feasible fleet of at most {max_fleet} aircraft")
    return Solution(Status.INFEASIBLE, solver="brute_force")


def random_micro_instance(seed: int, max_requests: int = 3) -> tuple[NetworkConfig, DemandTimeSeries]:
    """Small random network and demand inside the brute-force size limits."""
    import numpy as np

    rng = np.random.default_rng(seed)
    tau = int(rng.integers(1, 3))
    steps = int(rng.integers(4, MAX_HORIZON - tau))
    levels = int(rng.integers(2, MAX_LEVELS + 1))
    kappa = int(rng.integers(1, levels // 2 + 1))
    gamma = tuple(int(g) for g in rng.integers(1, 3, size=levels))
    seats = int(rng.integers(2, 5))
    config = NetworkConfig(steps_per_day=steps, levels=levels, tau=tau, kappa=kappa, gamma=gamma,
                           seat_capacity=seats)
    series = DemandTimeSeries.zeros(config.vertiports, steps, seat_capacity=seats)
    for _ in range(int(rng.integers(1, max_requests + 1))):
        i = int(rng.integers(0, 2))
        s = int(rng.integers(0, steps))
        load = int(rng.integers(1, seats + 1))
        series.flights[i, 1 - i, s] += 1
        series.passengers[i, 1 - i, s] += load
        series.occupancies.setdefault((i, 1 - i, s), []).append(load)
    return config, series
