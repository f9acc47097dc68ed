"""Greedy operating policies that bracket the optimal spill at a fixed fleet size.

Both simulators run on day steps with the network's flight times, energy use
and charging curve:

* grounded aircraft below full charge always charge (level by level, per the
  charging curve); under the located policy an aircraft that reached the
  reserve level is committed to charge until full, others may leave mid-charge
  and lose the partial level;
* at each step the demanded flights are served largest load first, each by
  the ready aircraft with the highest SoC; unserved flights spill at once.

The upper-bound policy keeps aircraft at their vertiport and only repositions
when too many well-charged aircraft sit idle at one place, plus return flights
after the last demand step that restore the morning placement.  The lower-bound
policy pools both vertiports: any ready aircraft can serve any flight.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from uamfleet.dispatch import DemandTimeSeries
from uamfleet.network import NetworkConfig

REPOSITION_THRESHOLD = 5
REPOSITION_SOC = 0.50
MAX_WARMUP_DAYS = 60


@dataclass
class SimAircraft:
    location: int | None  # None when pooled
    soc_level: int
    busy_until: int = 0  # model time at which the current flight lands
    progress: int = 0  # steps charged toward the next level
    committed: bool = False

    def grounded(self, t: int) -> bool:
        return self.busy_until <= t

    def key(self) -> tuple:
        return (-1 if self.location is None else self.location, self.soc_level, self.committed)


@dataclass
class SimResult:
    spill: np.ndarray  # (V, V, day steps)
    flights_flown: int = 0
    repositioning_flights: int = 0
    fleet_by_step: list = field(default_factory=list)
    days_simulated: int = 1
    steady: bool = True

    @property
    def spill_by_step(self) -> np.ndarray:
        return self.spill.sum(axis=(0, 1))

    @property
    def daily_spill(self) -> int:
        return int(self.spill.sum())


def consolidated_loads(passengers: int, seat_capacity: int) -> list[int]:
    """Fewest flights carrying ``passengers``: full cabins plus one remainder."""
    full, rest = divmod(int(passengers), seat_capacity)
    return [seat_capacity] * full + ([rest] if rest else [])


def _initial_fleet(config: NetworkConfig, demand: DemandTimeSeries, fleet_size: int, pooled: bool):
    if pooled:
        return [SimAircraft(None, config.levels) for _ in range(fleet_size)]
    # place aircraft in proportion to each vertiport's outgoing passengers
    out = demand.passengers.sum(axis=(1, 2)).astype(float)
    weights = out / out.sum() if out.sum() > 0 else np.full(config.n_ports, 1.0 / config.n_ports)
    quota = weights * fleet_size
    counts = np.floor(quota).astype(int)
    for idx in np.argsort(-(quota - counts), kind="stable")[: fleet_size - counts.sum()]:
        counts[idx] += 1
    fleet = []
    for port, n in enumerate(counts):
        fleet.extend(SimAircraft(port, config.levels) for _ in range(n))
    return fleet


def _depart(config: NetworkConfig, ac: SimAircraft, i: int, j: int, t: int, pooled: bool) -> None:
    ac.soc_level -= config.kappa_at(i, j, t)
    ac.busy_until = t + config.tau_at(i, j, t)
    ac.progress = 0
    ac.location = None if pooled else j


def _reposition(config: NetworkConfig, fleet, t: int, threshold: int, well_charged: int,
                result: SimResult) -> None:
    """Send idle, well-charged aircraft beyond ``threshold`` toward less supplied vertiports.

    Supply counts ready aircraft plus those already flying in, and a move is
    only made while it narrows the gap, so surplus never bounces back and forth.
    """
    def supply(j):
        return sum(1 for ac in fleet if ac.location == j and not ac.committed and ac.soc_level >= well_charged)

    for i in range(config.n_ports):
        idle = [ac for ac in fleet if ac.grounded(t) and not ac.committed
                and ac.location == i and ac.soc_level >= well_charged]
        surplus = len(idle) - threshold
        if surplus <= 0:
            continue
        idle.sort(key=lambda ac: -ac.soc_level)
        for j in sorted((j for j in range(config.n_ports) if j != i), key=lambda j: (supply(j), j)):
            movable = min(surplus, (supply(i) - supply(j)) // 2)
            while movable > 0 and idle:
                ac = idle.pop(0)
                if ac.soc_level < config.min_flight_level(i, j, t):
                    continue
                _depart(config, ac, i, j, t, pooled=False)
                result.repositioning_flights += 1
                surplus -= 1
                movable -= 1


def _return_home(config: NetworkConfig, fleet, t: int, targets, result: SimResult) -> None:
    """After the last demand step, fly spare aircraft back toward the morning placement."""
    counts = [sum(1 for ac in fleet if ac.location == i) for i in range(config.n_ports)]
    for i in range(config.n_ports):
        spare = sorted((ac for ac in fleet if ac.location == i and ac.grounded(t) and not ac.committed),
                       key=lambda ac: -ac.soc_level)
        for j in range(config.n_ports):
            while counts[i] > targets[i] and counts[j] < targets[j] and spare:
                if t + config.tau_at(i, j, t) > config.horizon:
                    break
                ac = spare.pop(0)
                if ac.soc_level < config.min_flight_level(i, j, t):
                    spare.clear()
                    break
                _depart(config, ac, i, j, t, pooled=False)
                result.repositioning_flights += 1
                counts[i] -= 1
                counts[j] += 1


def _run_day(config: NetworkConfig, demand: DemandTimeSeries, fleet, pooled: bool,
             reposition_threshold: int | None, commit_at_reserve: bool = True) -> SimResult:
    """Operate one day on model time 0..T; ``fleet`` is updated in place to the end state."""
    n_steps = demand.n_steps
    horizon = config.horizon
    result = SimResult(np.zeros((config.n_ports, config.n_ports, n_steps), dtype=np.int64))
    well_charged = config.level_at_fraction(REPOSITION_SOC)
    for ac in fleet:
        ac.busy_until, ac.progress = 0, 0
    targets = [sum(1 for ac in fleet if ac.location == i) for i in range(config.n_ports)]

    for t in range(horizon):
        step = t - 1
        in_day = 0 <= step < n_steps
        for ac in fleet:
            if commit_at_reserve and ac.grounded(t) and ac.soc_level == 0:
                ac.committed = True

        if in_day:
            requests = []
            for i, j in config.pairs:
                for load in consolidated_loads(demand.passengers[i, j, step], config.seat_capacity):
                    requests.append((-load, i, j))
            requests.sort()
            for neg_load, i, j in requests:
                need = config.min_flight_level(i, j, t)
                best = None
                for ac in fleet:
                    if not ac.grounded(t) or ac.committed or ac.soc_level < need:
                        continue
                    if not pooled and ac.location != i:
                        continue
                    if best is None or ac.soc_level > best.soc_level:
                        best = ac
                if best is None:
                    result.spill[i, j, step] += -neg_load
                    continue
                _depart(config, best, i, j, t, pooled)
                result.flights_flown += 1

        if in_day and reposition_threshold is not None and not pooled:
            _reposition(config, fleet, t, reposition_threshold, well_charged, result)
        if step >= n_steps and not pooled:
            _return_home(config, fleet, t, targets, result)

        # grounded aircraft below full charge accrue one step of charging
        for ac in fleet:
            if not ac.grounded(t) or ac.soc_level >= config.levels:
                continue
            ac.progress += 1
            if ac.progress >= config.gamma[ac.soc_level]:
                ac.soc_level += 1
                ac.progress = 0
                if ac.soc_level >= config.levels:
                    ac.committed = False
        result.fleet_by_step.append(len(fleet))
    return result


def _check_fleet_size(fleet_size: int) -> None:
    if fleet_size < 0:
        raise ValueError(f"fleet size must be >= 0, got {fleet_size}")


def simulate_upper_bound(config: NetworkConfig, demand: DemandTimeSeries, fleet_size: int,
                         reposition_threshold: int = REPOSITION_THRESHOLD, max_days: int = MAX_WARMUP_DAYS) -> SimResult:
    """Located operation repeated day after day until it reaches a steady state.

    Each simulated day starts where the previous one ended (partial charges
    dropped).  When the end-of-day state equals the start state, that day can
    be flown every day and its spill is reported.  If the policy instead
    cycles over several days (or never settles), no single repeatable day
    exists and the result falls back to flying nothing, which spills every
    passenger.
    """
    _check_fleet_size(fleet_size)
    fleet = _initial_fleet(config, demand, fleet_size, pooled=False)
    seen: set[tuple] = set()
    for day in range(max_days):
        start = tuple(sorted(ac.key() for ac in fleet))
        result = _run_day(config, demand, fleet, False, reposition_threshold)
        result.days_simulated = day + 1
        end = tuple(sorted(ac.key() for ac in fleet))
        if end == start:
            return result
        if end in seen:
            break
        seen.add(start)
    fallback = SimResult(demand.passengers.astype(np.int64).copy(), days_simulated=day + 1, steady=False)
    for i in range(config.n_ports):
        fallback.spill[i, i] = 0
    fallback.fleet_by_step = [fleet_size] * config.horizon
    return fallback


def simulate_lower_bound(config: NetworkConfig, demand: DemandTimeSeries, fleet_size: int,
                         commit_at_reserve: bool = False) -> SimResult:
    """One day of pooled operation starting from a fully charged fleet.

    Aircraft at the reserve level are not locked into a full recharge here:
    with that rule the evenly drained pooled fleet hits reserve all at once
    and can spill more than the integer program, which may fly again after a
    single level.  ``commit_at_reserve=True`` restores the shared rule.
    """
    _check_fleet_size(fleet_size)
    fleet = _initial_fleet(config, demand, fleet_size, pooled=True)
    return _run_day(config, demand, fleet, True, None, commit_at_reserve)


SPILL_HEADER = ("from", "to", "step", "spill")


def serialize_spill(spill: np.ndarray, vertiports) -> str:
    """``from,to,step,spill`` rows; shared by simulator and IP spill output."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPILL_HEADER)
    n = len(vertiports)
    for i in range(n):
        for j in range(n):
            if i != j:
                for s in range(spill.shape[2]):
                    w.writerow((vertiports[i], vertiports[j], s, int(spill[i, j, s])))
    return buf.getvalue()


def parse_spill(csv_text: str, vertiports) -> np.ndarray:
    reader = csv.DictReader(io.StringIO(csv_text))
    if tuple(reader.fieldnames or ()) != SPILL_HEADER:
        raise ValueError(f"expected header {','.join(SPILL_HEADER)}")
    rows = list(reader)
    index = {name: k for k, name in enumerate(vertiports)}
    steps = max((int(r["step"]) for r in rows), default=-1) + 1
    out = np.zeros((len(vertiports), len(vertiports), steps), dtype=np.int64)
    for r in rows:
        out[index[r["from"]], index[r["to"]], int(r["step"])] = int(r["spill"])
    return out
