"""Autoregressive passenger arrival process.

Per-flight UAM rates are allocated from the yearly seat capacity, hourly
Poisson counts are regressed on the previous hour's surprise, passengers are
assigned to flights through the seat ECDF and shifted by skew-normal lead/lag
times to get vertiport arrival minutes.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field

import numpy as np

from uamfleet.network import ConfigError
from uamfleet.schedule import HOURS, AirlineSchedule, Direction, hourly_capacity_ecdf, total_capacity

APT, CBD = "APT", "CBD"
# airline arrival (v=0) -> passenger shows up at APT; departure (v=1) -> at CBD
ORIGIN_OF_DIRECTION = {Direction.ARRIVAL: APT, Direction.DEPARTURE: CBD}
DAY_MINUTES = 1440


@dataclass(frozen=True)
class SkewNormalParams:
    location: float
    scale: float
    shape: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError(f"skew-normal scale must be positive, got {self.scale}")

    @property
    def delta(self) -> float:
        return self.shape / math.sqrt(1.0 + self.shape ** 2)

    @property
    def mean(self) -> float:
        return self.location + self.scale * self.delta * math.sqrt(2.0 / math.pi)


LEAD_TIME = SkewNormalParams(93.0, 40.0, 3.0)
LAG_TIME = SkewNormalParams(31.0, 2.12, 3.0)  # includes the 10 min curb-to-vertiport walk


@dataclass(frozen=True)
class DemandParams:
    add: float
    ar_coeff: float = 0.7
    lead_dist: SkewNormalParams = LEAD_TIME
    lag_dist: SkewNormalParams = LAG_TIME
    transfer_minutes: float = 0.0

    def __post_init__(self):
        if self.add < 0:
            raise ConfigError(f"ADD must be nonnegative, got {self.add}")
        if not 0.0 <= self.ar_coeff <= 1.0:
            raise ConfigError(f"ar_coeff must lie in [0, 1], got {self.ar_coeff}")
        if self.transfer_minutes < 0:
            raise ConfigError("transfer_minutes must be nonnegative")


@dataclass(frozen=True)
class ArrivalProfile:
    day: dt.date
    minutes: np.ndarray  # vertiport arrival minute per passenger, sorted
    origins: tuple[str, ...]  # origin vertiport per passenger
    hourly_counts: np.ndarray = field(default_factory=lambda: np.zeros((24, 2), dtype=np.int64))
    hourly_rates: np.ndarray = field(default_factory=lambda: np.zeros((24, 2)))
    expected_rates: np.ndarray = field(default_factory=lambda: np.zeros((24, 2)))

    def __len__(self) -> int:
        return len(self.origins)

    def count(self, origin: str) -> int:
        return sum(1 for o in self.origins if o == origin)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArrivalProfile):
            return NotImplemented
        return (self.day == other.day and self.origins == other.origins
                and np.array_equal(self.minutes, other.minutes)
                and np.array_equal(self.hourly_counts, other.hourly_counts)
                and np.array_equal(self.hourly_rates, other.hourly_rates))


class FlightRates:
    """lambda_i per schedule record, aligned with ``schedule.records``."""

    def __init__(self, schedule: AirlineSchedule, values: np.ndarray):
        self.schedule = schedule
        self.values = values

    def __getitem__(self, record_index: int) -> float:
        return float(self.values[record_index])

    def __len__(self) -> int:
        return len(self.values)

    def direction_total(self, direction: int) -> float:
        return float(self.values[self.schedule.directions == direction].sum())


def flight_rates(schedule: AirlineSchedule, add: float) -> FlightRates:
    n_days = len(schedule.days)
    seats = schedule.seats_array().astype(float)
    directions = schedule.directions
    values = np.zeros(len(schedule))
    for v in Direction:
        mask = directions == v
        if not mask.any():
            continue
        beta = float(total_capacity(schedule, v))
        if beta == 0 and add > 0:
            raise ValueError(f"direction {int(v)} has zero seat capacity")
        values[mask] = seats[mask] / beta * add * n_days
    return FlightRates(schedule, values)


def expected_hourly_rate(rates: FlightRates, day: dt.date, hour: int, direction: int) -> float:
    idx = rates.schedule.cell(day, hour, direction)
    return float(rates.values[list(idx)].sum()) if idx else 0.0


def autoregressive_rate(lambda0_prev: float | None, x_prev: int | None, lambda0_cur: float,
                        ar_coeff: float) -> float:
    """Hourly rate regressed on the previous hour's surprise, clamped at 0.

    ``lambda0_prev=None`` marks the first hour of a day (no regression).
    """
    if lambda0_prev is None or x_prev is None or lambda0_prev == 0:
        return lambda0_cur
    value = lambda0_cur + (x_prev - lambda0_prev) * lambda0_cur / lambda0_prev * ar_coeff
    return max(0.0, value)


def sample_poisson(rate: float, rng: np.random.Generator) -> int:
    if rate <= 0:
        return 0
    return int(rng.poisson(rate))


def sample_skew_normal(params: SkewNormalParams, rng: np.random.Generator, size=None):
    """Skew-normal draws via location + scale * (delta |Z0| + sqrt(1 - delta^2) Z1)."""
    delta = params.delta
    z0 = np.abs(rng.standard_normal(size))
    z1 = rng.standard_normal(size)
    out = params.location + params.scale * (delta * z0 + math.sqrt(1.0 - delta * delta) * z1)
    return float(out) if size is None else out


def generate_day(schedule: AirlineSchedule, day: dt.date, params: DemandParams,
                 rng: np.random.Generator, rates: FlightRates | None = None) -> ArrivalProfile:
    if rates is None:
        rates = flight_rates(schedule, params.add)
    counts = np.zeros((24, 2), dtype=np.int64)
    lam = np.zeros((24, 2))
    lam0 = np.zeros((24, 2))
    minutes_parts: list[np.ndarray] = []
    origin_parts: list[tuple[str, int]] = []
    event_minutes = schedule.event_minutes

    prev = {v: (None, None) for v in Direction}
    for h in HOURS:
        for v in Direction:
            base = expected_hourly_rate(rates, day, h, v)
            rate = autoregressive_rate(prev[v][0], prev[v][1], base, params.ar_coeff)
            x = sample_poisson(rate, rng)
            lam0[h, v], lam[h, v], counts[h, v] = base, rate, x
            prev[v] = (base, x)
            if x == 0:
                continue
            ecdf = hourly_capacity_ecdf(schedule, day, h, v)
            u = 1.0 - rng.random(x)  # (0, 1]
            flights = np.asarray(ecdf.indices)[ecdf.sample_positions(u)]
            if v == Direction.DEPARTURE:
                shift = -sample_skew_normal(params.lead_dist, rng, x)
            else:
                shift = sample_skew_normal(params.lag_dist, rng, x) + params.transfer_minutes
            minutes_parts.append(event_minutes[flights] + shift)
            origin_parts.append((ORIGIN_OF_DIRECTION[v], x))

    if minutes_parts:
        minutes = np.clip(np.concatenate(minutes_parts), 0.0, DAY_MINUTES - 1)
        origins = np.concatenate([np.full(n, o) for o, n in origin_parts])
        order = np.lexsort((origins, minutes))
        minutes, origins = minutes[order], tuple(str(o) for o in origins[order])
    else:
        minutes, origins = np.zeros(0), ()
    return ArrivalProfile(day, minutes, origins, counts, lam, lam0)


def day_rng(base_seed: int, day: dt.date) -> np.random.Generator:
    """Independent, order-free RNG stream per (seed, day)."""
    return np.random.default_rng([int(base_seed), day.toordinal()])


def generate_profiles(schedule: AirlineSchedule, params: DemandParams, base_seed: int,
                      days=None) -> list[ArrivalProfile]:
    rates = flight_rates(schedule, params.add)
    days = schedule.days if days is None else days
    return [generate_day(schedule, d, params, day_rng(base_seed, d), rates) for d in days]


def serialize_profiles(profiles) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("day", "origin", "minute"))
    for prof in profiles:
        day = prof.day.isoformat()
        for m, o in zip(prof.minutes, prof.origins):
            writer.writerow((day, o, f"{m:.4f}"))
    return buf.getvalue()


def parse_profiles(csv_text: str) -> list[ArrivalProfile]:
    """Read ``day,origin,minute`` rows back into profiles (hourly diagnostics are not stored)."""
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["day", "origin", "minute"]:
        raise ValueError("expected header day,origin,minute")
    by_day: dict[dt.date, list[tuple[float, str]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            day = dt.date.fromisoformat(row[0])
            by_day.setdefault(day, []).append((float(row[2]), row[1]))
        except (ValueError, IndexError):
            raise ValueError(f"line {lineno}: malformed profile row {row!r}") from None
    out = []
    for day in sorted(by_day):
        rows = sorted(by_day[day])
        out.append(ArrivalProfile(day, np.array([m for m, _ in rows]), tuple(o for _, o in rows)))
    return out
