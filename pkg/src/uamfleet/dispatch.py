"""Deterministic dispatch rule: passenger arrivals -> per-step flight and passenger demand."""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from uamfleet.demand import ArrivalProfile


@dataclass(frozen=True)
class DemandTimeSeries:
    """f_ij^s and p_ij^s on day steps ``s = 0..n_steps-1`` for ordered vertiport pairs.

    ``occupancies`` keeps the individual flight loads when known (dispatch
    output); series read from CSV only carry the per-step totals.
    """

    vertiports: tuple[str, ...]
    flights: np.ndarray  # (V, V, n_steps) int
    passengers: np.ndarray  # (V, V, n_steps) int
    step_minutes: int = 5
    seat_capacity: int = 4
    occupancies: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vertiports", tuple(self.vertiports))
        f = np.asarray(self.flights, dtype=np.int64)
        p = np.asarray(self.passengers, dtype=np.int64)
        n = len(self.vertiports)
        if f.shape != p.shape or f.ndim != 3 or f.shape[:2] != (n, n):
            raise ValueError("flights/passengers must both have shape (V, V, steps)")
        if (f < 0).any() or (p < 0).any():
            raise ValueError("demand must be nonnegative")
        object.__setattr__(self, "flights", f)
        object.__setattr__(self, "passengers", p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DemandTimeSeries):
            return NotImplemented
        return (self.vertiports == other.vertiports and self.step_minutes == other.step_minutes
                and self.seat_capacity == other.seat_capacity
                and np.array_equal(self.flights, other.flights)
                and np.array_equal(self.passengers, other.passengers))

    __hash__ = None

    @property
    def n_steps(self) -> int:
        return self.flights.shape[2]

    @property
    def total_passengers(self) -> int:
        return int(self.passengers.sum())

    @property
    def total_flights(self) -> int:
        return int(self.flights.sum())

    def flight_loads(self, i: int, j: int, s: int) -> list[int]:
        """Occupancy of each demanded flight, largest first.

        Without recorded loads, rebuild the dispatch-like split: full flights,
        one partial flight, and single-passenger flights for the rest.
        """
        if self.occupancies is not None and (i, j, s) in self.occupancies:
            return sorted(self.occupancies[(i, j, s)], reverse=True)
        f, p = int(self.flights[i, j, s]), int(self.passengers[i, j, s])
        if f == 0:
            return []
        loads = [1] * f
        extra = p - f
        for idx in range(f):
            add = min(self.seat_capacity - 1, extra)
            loads[idx] += add
            extra -= add
        return loads

    @classmethod
    def zeros(cls, vertiports, n_steps: int, step_minutes: int = 5, seat_capacity: int = 4):
        n = len(vertiports)
        z = np.zeros((n, n, n_steps), dtype=np.int64)
        return cls(tuple(vertiports), z, z.copy(), step_minutes, seat_capacity, {})


def _dispatch_queue(minutes, capacity: int, max_wait: float):
    """Yield (departure_minute, occupancy) for one origin queue."""
    queue: deque[float] = deque()
    idx, n = 0, len(minutes)
    while idx < n or queue:
        trigger = queue[0] + max_wait if queue else math.inf
        if idx < n and minutes[idx] <= trigger:
            m = float(minutes[idx])
            queue.append(m)
            idx += 1
            while len(queue) >= capacity:
                for _ in range(capacity):
                    queue.popleft()
                yield m, capacity
        else:
            load = min(len(queue), capacity)
            for _ in range(load):
                queue.popleft()
            yield trigger, load


def dispatch(profile: ArrivalProfile, seat_capacity: int = 4, max_wait_minutes: float = 5.0,
             step_minutes: int = 5, vertiports=("APT", "CBD"), steps_per_day: int | None = None) -> DemandTimeSeries:
    """A flight leaves when ``seat_capacity`` passengers are queued, or when the
    head of the queue has waited ``max_wait_minutes``; whatever is left when the
    day ends leaves in the last step."""
    if seat_capacity < 1:
        raise ValueError("seat capacity must be >= 1")
    if len(vertiports) != 2:
        raise ValueError("dispatch pairs each origin with the other vertiport; need exactly two")
    n_steps = steps_per_day if steps_per_day is not None else math.ceil(1440 / step_minutes)
    series = DemandTimeSeries.zeros(vertiports, n_steps, step_minutes, seat_capacity)
    origins = np.asarray(profile.origins)
    for i, name in enumerate(vertiports):
        j = 1 - i
        mins = np.sort(np.asarray(profile.minutes)[origins == name]) if len(origins) else np.zeros(0)
        for m, load in _dispatch_queue(mins, seat_capacity, max_wait_minutes):
            s = min(int(m // step_minutes), n_steps - 1)
            series.flights[i, j, s] += 1
            series.passengers[i, j, s] += load
            series.occupancies.setdefault((i, j, s), []).append(load)
    unknown = set(profile.origins) - set(vertiports)
    if unknown:
        raise ValueError(f"profile has origins {sorted(unknown)} not among vertiports {vertiports}")
    return series


SERIES_HEADER = ("from", "to", "step", "flights", "passengers")


def serialize_series(series: DemandTimeSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    names = series.vertiports
    for i in range(len(names)):
        for j in range(len(names)):
            if i == j:
                continue
            for s in range(series.n_steps):
                w.writerow((names[i], names[j], s, int(series.flights[i, j, s]), int(series.passengers[i, j, s])))
    return buf.getvalue()


def parse_series(csv_text: str, vertiports=None, step_minutes: int = 5, seat_capacity: int = 4,
                 n_steps: int | None = None) -> DemandTimeSeries:
    reader = csv.DictReader(io.StringIO(csv_text))
    if tuple(reader.fieldnames or ()) != SERIES_HEADER:
        raise ValueError(f"expected header {','.join(SERIES_HEADER)}")
    rows = list(reader)
    names = list(vertiports) if vertiports else sorted({r["from"] for r in rows} | {r["to"] for r in rows})
    if not names:
        names = ["APT", "CBD"]
    steps = n_steps if n_steps is not None else (max((int(r["step"]) for r in rows), default=-1) + 1)
    shape = (len(names), len(names), max(steps, 1))
    series = DemandTimeSeries(tuple(names), np.zeros(shape, dtype=np.int64), np.zeros(shape, dtype=np.int64),
                              step_minutes, seat_capacity, None)
    index = {n: k for k, n in enumerate(names)}
    for lineno, r in enumerate(rows, start=2):
        try:
            i, j, s = index[r["from"]], index[r["to"]], int(r["step"])
            series.flights[i, j, s] = int(r["flights"])
            series.passengers[i, j, s] = int(r["passengers"])
        except (KeyError, ValueError, IndexError):
            raise ValueError(f"line {lineno}: malformed series row") from None
    return series
