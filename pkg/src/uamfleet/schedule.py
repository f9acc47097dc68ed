"""Airline schedules: CSV ingestion, a synthetic generator and per-hour seat ECDFs."""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from functools import cached_property
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from uamfleet.network import ConfigError

HEADER = ("date", "direction", "minute", "seats")
HOURS = range(24)


class Direction(IntEnum):
    ARRIVAL = 0  # airline arrival at APT -> UAM demand APT->CBD
    DEPARTURE = 1  # airline departure from APT -> UAM demand CBD->APT


_TOKENS = {"ARR": Direction.ARRIVAL, "DEP": Direction.DEPARTURE}
_NAMES = {v: k for k, v in _TOKENS.items()}


class ScheduleParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class FlightRecord:
    day: dt.date
    direction: Direction
    event_minute: int
    seats: int

    def __post_init__(self):
        if self.seats < 1:
            raise ValueError(f"seats must be >= 1, got {self.seats}")
        if not 0 <= self.event_minute < 1440:
            raise ValueError(f"event_minute must be in [0, 1440), got {self.event_minute}")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def hour(self) -> int:
        return self.event_minute // 60


@dataclass(frozen=True)
class AirlineSchedule:
    """Flight records plus the (day, hour, direction) -> record-index grouping."""

    records: tuple[FlightRecord, ...]
    days: tuple[dt.date, ...] = field(init=False)
    cells: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "days", tuple(sorted({r.day for r in records})))
        cells: dict[tuple[dt.date, int, int], list[int]] = {}
        for idx, rec in enumerate(records):
            cells.setdefault((rec.day, rec.hour, int(rec.direction)), []).append(idx)
        object.__setattr__(self, "cells", {k: tuple(v) for k, v in cells.items()})

    def __len__(self) -> int:
        return len(self.records)

    def cell(self, day: dt.date, hour: int, direction: int) -> tuple[int, ...]:
        """Record indices of f_{d,h,v}; empty tuple for an empty cell."""
        return self.cells.get((day, hour, int(direction)), ())

    def flights(self, day: dt.date, hour: int, direction: int) -> list[FlightRecord]:
        return [self.records[i] for i in self.cell(day, hour, direction)]

    def seats_array(self) -> np.ndarray:
        return np.fromiter((r.seats for r in self.records), dtype=np.int64, count=len(self.records))

    @cached_property
    def event_minutes(self) -> np.ndarray:
        return np.fromiter((r.event_minute for r in self.records), dtype=float, count=len(self.records))

    @cached_property
    def directions(self) -> np.ndarray:
        return np.fromiter((int(r.direction) for r in self.records), dtype=np.int64, count=len(self.records))


def parse_schedule(csv_text: str) -> AirlineSchedule:
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise ScheduleParseError(1, "missing header") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ScheduleParseError(1, f"expected header {','.join(HEADER)}, got {','.join(header)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ScheduleParseError(lineno, f"expected 4 fields, got {len(row)}")
        date_s, dir_s, minute_s, seats_s = (c.strip() for c in row)
        try:
            day = dt.date.fromisoformat(date_s)
        except ValueError:
            raise ScheduleParseError(lineno, f"bad date {date_s!r}") from None
        if dir_s not in _TOKENS:
            raise ScheduleParseError(lineno, f"direction must be ARR or DEP, got {dir_s!r}")
        try:
            minute = int(minute_s)
            seats = int(seats_s)
        except ValueError:
            raise ScheduleParseError(lineno, "minute and seats must be integers") from None
        if seats <= 0:
            raise ValueError(f"line {lineno}: seats must be positive, got {seats}")
        if not 0 <= minute < 1440:
            raise ScheduleParseError(lineno, f"minute {minute} outside [0, 1440)")
        records.append(FlightRecord(day, _TOKENS[dir_s], minute, seats))
    return AirlineSchedule(tuple(records))


def serialize_schedule(schedule: AirlineSchedule) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in schedule.records:
        writer.writerow([r.day.isoformat(), _NAMES[r.direction], r.event_minute, r.seats])
    return buf.getvalue()


def total_capacity(schedule: AirlineSchedule, direction: int) -> int:
    """beta_v: seats of every flight of one direction over all days."""
    return sum(r.seats for r in schedule.records if r.direction == direction)


@dataclass(frozen=True)
class CapacityEcdf:
    """Seat-weighted ECDF over the flights of one (day, hour, direction) cell."""

    indices: tuple[int, ...]
    cumulative: np.ndarray

    def masses(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0)

    def inverse(self, u: float) -> int:
        """Record index of F^-1(u) for u in (0, 1]."""
        pos = int(np.searchsorted(self.cumulative, u, side="left"))
        return self.indices[min(pos, len(self.indices) - 1)]

    def sample_positions(self, u: np.ndarray) -> np.ndarray:
        """Vectorized inverse lookup returning positions into ``indices``."""
        pos = np.searchsorted(self.cumulative, u, side="left")
        return np.minimum(pos, len(self.indices) - 1)


def hourly_capacity_ecdf(schedule: AirlineSchedule, day: dt.date, hour: int, direction: int) -> CapacityEcdf:
    idx = schedule.cell(day, hour, direction)
    if not idx:
        raise ValueError(f"no flights on {day} hour {hour} direction {int(direction)}")
    seats = np.array([schedule.records[i].seats for i in idx], dtype=np.float64)
    cum = np.cumsum(seats) / seats.sum()
    cum[-1] = 1.0
    cum.setflags(write=False)
    return CapacityEcdf(idx, cum)


# --- synthetic schedules -----------------------------------------------------

def hourly_shape(peak_hours: Sequence[int], first_hour: int, last_hour: int,
                 base: float = 0.3, width: float = 1.5) -> np.ndarray:
    """24 nonnegative weights: zero outside [first_hour, last_hour], a base level
    plus a Gaussian bump at every peak hour inside."""
    h = np.arange(24, dtype=float)
    w = np.full(24, base)
    for p in peak_hours:
        w += np.exp(-0.5 * ((h - p) / width) ** 2)
    w[(h < first_hour) | (h > last_hour)] = 0.0
    return w


@dataclass(frozen=True)
class SyntheticScheduleParams:
    days: int = 365
    daily_flights_mean: float = 600.0
    peak_hours: tuple[int, ...] = (8, 17)
    seat_mix: tuple[tuple[int, float], ...] = ((76, 0.25), (150, 0.55), (220, 0.2))
    seed: int = 0
    start_date: dt.date = dt.date(2019, 1, 1)
    departure_share: float = 0.5
    # explicit 24-entry tables override the peak-hour shape per direction
    arrival_shape: tuple[float, ...] | None = None
    departure_shape: tuple[float, ...] | None = None
    # airline departures start earlier than arrivals (first bank of the day)
    departure_window: tuple[int, int] = (6, 22)
    arrival_window: tuple[int, int] = (8, 23)

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticScheduleParams":
        data = dict(data)
        if "start_date" in data and isinstance(data["start_date"], str):
            data["start_date"] = dt.date.fromisoformat(data["start_date"])
        for key in ("peak_hours", "arrival_shape", "departure_shape", "departure_window", "arrival_window"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        if "seat_mix" in data:
            data["seat_mix"] = tuple((int(s), float(w)) for s, w in data["seat_mix"])
        return cls(**data)


def _shape_probs(table: Iterable[float] | None, peaks, window) -> np.ndarray:
    w = hourly_shape(peaks, *window) if table is None else np.asarray(tuple(table), dtype=float)
    if w.shape != (24,) or (w < 0).any() or w.sum() <= 0:
        raise ConfigError("hourly shape must be 24 nonnegative weights with a positive sum")
    return w / w.sum()


def generate_synthetic_schedule(days: int = 365, daily_flights_mean: float = 600.0,
                                peak_hours: Sequence[int] = (8, 17),
                                seat_mix: Sequence[tuple[int, float]] = ((150, 1.0),),
                                seed: int = 0, **extra) -> AirlineSchedule:
    """Poisson daily flight counts per direction, spread over hours by a bimodal
    shape, uniform minute within the hour, seats drawn from ``seat_mix``."""
    params = SyntheticScheduleParams(days=days, daily_flights_mean=daily_flights_mean,
                                     peak_hours=tuple(peak_hours),
                                     seat_mix=tuple((int(s), float(w)) for s, w in seat_mix),
                                     seed=seed, **extra)
    return synthesize(params)


def synthesize(params: SyntheticScheduleParams) -> AirlineSchedule:
    if not params.seat_mix:
        raise ConfigError("seat_mix must not be empty")
    seats = np.array([s for s, _ in params.seat_mix], dtype=np.int64)
    weights = np.array([w for _, w in params.seat_mix], dtype=float)
    if (seats < 1).any() or (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-9:
        raise ConfigError("seat_mix needs positive seat counts and weights summing to 1")
    if params.daily_flights_mean < 0 or params.days < 0:
        raise ConfigError("days and daily_flights_mean must be nonnegative")
    if not 0.0 <= params.departure_share <= 1.0:
        raise ConfigError("departure_share must lie in [0, 1]")

    probs = {
        Direction.ARRIVAL: _shape_probs(params.arrival_shape, params.peak_hours, params.arrival_window),
        Direction.DEPARTURE: _shape_probs(params.departure_shape, params.peak_hours, params.departure_window),
    }
    share = {Direction.ARRIVAL: 1.0 - params.departure_share, Direction.DEPARTURE: params.departure_share}
    rng = np.random.default_rng(params.seed)
    records = []
    for offset in range(params.days):
        day = params.start_date + dt.timedelta(days=offset)
        for v in (Direction.ARRIVAL, Direction.DEPARTURE):
            n = rng.poisson(params.daily_flights_mean * share[v])
            per_hour = rng.multinomial(n, probs[v])
            for hour, count in enumerate(per_hour):
                if count == 0:
                    continue
                minutes = np.sort(hour * 60 + rng.integers(0, 60, size=count))
                cap = rng.choice(seats, size=count, p=weights)
                records.extend(FlightRecord(day, v, int(m), int(c)) for m, c in zip(minutes, cap))
    return AirlineSchedule(tuple(records))
