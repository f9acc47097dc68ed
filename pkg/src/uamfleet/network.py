"""Time/SoC discretization, charging curve and flight parameters of a vertiport network.

Model time runs over ``0..T``.  Operating-day step ``s`` (as produced by the
dispatcher, ``0..steps_per_day-1``) maps to model time ``t = s + 1``; ``t = 0``
is the start-of-day state and the extra ``max tau + 1`` steps after the day
let late flights land.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration value."""


def default_charging_curve(levels: int) -> tuple[int, ...]:
    """CC-CV-like taper: one step per level up to ~80% of ``levels``, then
    2, 2, 3, 3, 4, 4, ... steps for the remaining levels."""
    if levels < 1:
        raise ConfigError(f"need at least one SoC level, got {levels}")
    knee = int(math.floor(0.8 * levels + 0.5))
    return tuple([1] * knee + [2 + j // 2 for j in range(levels - knee)])


def charging_duration(x: int, y: int, gamma: Sequence[int]) -> int:
    """Time steps to charge from level ``x`` to level ``y`` (sum of gamma[x+1..y])."""
    if not 0 <= x < y <= len(gamma):
        raise ValueError(f"charging needs 0 <= x < y <= K, got x={x}, y={y}, K={len(gamma)}")
    return int(sum(gamma[x:y]))


def _pair_table(value, n_ports: int, steps: int, name: str) -> np.ndarray:
    """Broadcast a scalar / per-pair / per-pair-per-step spec to shape (V, V, steps)."""
    arr = np.asarray(value, dtype=np.int64)
    if arr.ndim == 0:
        out = np.full((n_ports, n_ports, steps), int(arr), dtype=np.int64)
    elif arr.shape == (n_ports, n_ports):
        out = np.repeat(arr[:, :, None], steps, axis=2)
    elif arr.shape == (n_ports, n_ports, steps):
        out = arr.copy()
    else:
        raise ConfigError(
            f"{name} must be a scalar, a {n_ports}x{n_ports} table or shape "
            f"({n_ports}, {n_ports}, {steps}); got {arr.shape}"
        )
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NetworkConfig:
    vertiports: tuple[str, ...] = ("APT", "CBD")
    steps_per_day: int = 288
    step_minutes: int = 5
    levels: int = 32
    reserve_fraction: float = 0.20
    soc_increment: float = 0.025
    gamma: tuple[int, ...] | None = None
    tau: object = 2
    kappa: object = 4
    seat_capacity: int = 4
    tau_table: np.ndarray = field(init=False, repr=False, compare=False)
    kappa_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertiports", tuple(self.vertiports))
        if len(self.vertiports) < 2 or len(set(self.vertiports)) != len(self.vertiports):
            raise ConfigError("need at least two distinctly named vertiports")
        if self.steps_per_day < 1 or self.step_minutes < 1:
            raise ConfigError("steps_per_day and step_minutes must be positive")
        if self.levels < 1:
            raise ConfigError("levels (K) must be >= 1")
        if self.seat_capacity < 1:
            raise ConfigError("seat_capacity must be >= 1")
        gamma = default_charging_curve(self.levels) if self.gamma is None else tuple(int(g) for g in self.gamma)
        if len(gamma) != self.levels:
            raise ConfigError(f"gamma has {len(gamma)} entries, expected K={self.levels}")
        if any(g < 1 for g in gamma):
            raise ConfigError("every gamma_k must be >= 1 (charging takes time)")
        object.__setattr__(self, "gamma", gamma)

        n = len(self.vertiports)
        tau = _pair_table(self.tau, n, self.steps_per_day, "tau")
        kappa = _pair_table(self.kappa, n, self.steps_per_day, "kappa")
        off_diag = ~np.eye(n, dtype=bool)
        if (tau[off_diag] < 1).any():
            raise ConfigError("flight time tau must be >= 1 step")
        if (kappa[off_diag] < 1).any() or (kappa[off_diag] > self.levels).any():
            raise ConfigError("energy use kappa must lie in 1..K")
        object.__setattr__(self, "tau_table", tau)
        object.__setattr__(self, "kappa_table", kappa)

    @property
    def n_ports(self) -> int:
        return len(self.vertiports)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        n = self.n_ports
        return [(i, j) for i in range(n) for j in range(n) if i != j]

    @property
    def max_tau(self) -> int:
        n = self.n_ports
        return int(max(self.tau_table[i, j].max() for i in range(n) for j in range(n) if i != j))

    @property
    def horizon(self) -> int:
        """T = number of day steps + max flight time + 1."""
        return self.steps_per_day + self.max_tau + 1

    def _day_index(self, t: int) -> int:
        return min(max(t - 1, 0), self.steps_per_day - 1)

    def tau_at(self, i: int, j: int, t: int) -> int:
        """Flight time i->j for a departure at model time t (clamped to the day's table)."""
        return int(self.tau_table[i, j, self._day_index(t)])

    def kappa_at(self, i: int, j: int, t: int) -> int:
        return int(self.kappa_table[i, j, self._day_index(t)])

    def min_flight_level(self, i: int, j: int, t: int) -> int:
        """Lowest SoC level allowed to depart: above reserve and able to land at >= 0."""
        return max(1, self.kappa_at(i, j, t))

    def charge_steps(self, x: int, y: int) -> int:
        return charging_duration(x, y, self.gamma)

    def level_fraction(self, k: int) -> float:
        """Absolute state of charge of level k, for reporting."""
        return self.reserve_fraction + k * self.soc_increment

    def level_at_fraction(self, fraction: float) -> int:
        """Smallest level whose absolute SoC is >= fraction."""
        k = math.ceil((fraction - self.reserve_fraction) / self.soc_increment - 1e-9)
        return min(max(k, 0), self.levels)

    def with_overrides(self, **changes) -> "NetworkConfig":
        base = {
            "vertiports": self.vertiports,
            "steps_per_day": self.steps_per_day,
            "step_minutes": self.step_minutes,
            "levels": self.levels,
            "reserve_fraction": self.reserve_fraction,
            "soc_increment": self.soc_increment,
            "gamma": self.gamma,
            "tau": self.tau,
            "kappa": self.kappa,
            "seat_capacity": self.seat_capacity,
        }
        if "levels" in changes and "gamma" not in changes:
            base["gamma"] = None
        base.update(changes)
        return NetworkConfig(**base)

    def to_dict(self) -> dict:
        def plain(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "vertiports": list(self.vertiports),
            "steps_per_day": self.steps_per_day,
            "step_minutes": self.step_minutes,
            "levels": self.levels,
            "reserve_fraction": self.reserve_fraction,
            "soc_increment": self.soc_increment,
            "gamma": list(self.gamma),
            "tau": plain(self.tau),
            "kappa": plain(self.kappa),
            "seat_capacity": self.seat_capacity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        known = {"vertiports", "steps_per_day", "step_minutes", "levels", "reserve_fraction",
                 "soc_increment", "gamma", "tau", "kappa", "seat_capacity"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown network config keys: {sorted(unknown)}")
        return cls(**data)


def arrival_sets(config: NetworkConfig) -> dict[tuple[int, int, int], tuple[int, ...]]:
    """A_ij^t = {t' in 1..T : t' + tau_ij(t') = t}, keyed by (i, j, t).

    Keys with t > T are kept so that every departure time belongs to exactly
    one set; missing keys mean the empty set.
    """
    horizon = config.horizon
    sets: dict[tuple[int, int, int], list[int]] = {}
    for i, j in config.pairs:
        for t_dep in range(1, horizon + 1):
            t_arr = t_dep + config.tau_at(i, j, t_dep)
            sets.setdefault((i, j, t_arr), []).append(t_dep)
    return {key: tuple(v) for key, v in sets.items()}
