"""Experiment configuration: one JSON file, with CLI flags overriding top-level fields."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from uamfleet.milp.adapters import ADAPTERS, SolverLimits
from uamfleet.network import ConfigError, NetworkConfig
from uamfleet.schedule import SyntheticScheduleParams


@dataclass(frozen=True)
class Scenario:
    add: float
    ar_coeff: float = 0.7

    @property
    def label(self) -> str:
        return f"add{self.add:g}_ar{self.ar_coeff:g}"


@dataclass(frozen=True)
class SweepSpec:
    """Fleet sizes at which the spill model is solved.

    ``relative``: each profile's own F*-depth .. F*.
    ``absolute``: the listed ``sizes`` for every profile, or, when ``sizes`` is
    empty, the scenario's median F* minus ``depth`` up to that median.
    """

    mode: str = "absolute"
    depth: int = 3
    sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in ("absolute", "relative"):
            raise ConfigError(f"sweep mode must be 'absolute' or 'relative', got {self.mode!r}")
        if self.depth < 0:
            raise ConfigError("sweep depth must be >= 0")
        if any(s < 0 for s in self.sizes):
            raise ConfigError("sweep fleet sizes must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: tuple[Scenario, ...]
    network: NetworkConfig = field(default_factory=NetworkConfig)
    schedule_csv: str | None = None
    synthetic: SyntheticScheduleParams = field(default_factory=SyntheticScheduleParams)
    days: int | None = None  # first N schedule days; None uses all
    max_wait_minutes: float = 5.0
    sweep: SweepSpec = field(default_factory=SweepSpec)
    solver: str = "highs"
    time_limit: float = 600.0
    rel_gap: float = 0.005
    abs_gap: float | None = 0.5
    bounds: bool = True
    base_seed: int = 0
    output_dir: str = "results"
    jobs: int = 1

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        if self.solver not in ADAPTERS:
            raise ConfigError(f"unknown solver {self.solver!r}; choose from {sorted(ADAPTERS)}")
        if self.time_limit <= 0 or self.rel_gap < 0 or (self.abs_gap is not None and self.abs_gap < 0):
            raise ConfigError("time limit must be positive and gaps nonnegative")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.days is not None and self.days < 1:
            raise ConfigError("days must be >= 1")

    @property
    def limits(self) -> SolverLimits:
        return SolverLimits(time_limit=self.time_limit, rel_gap=self.rel_gap, abs_gap=self.abs_gap)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            scenarios = tuple(Scenario(**s) for s in data.pop("scenarios", ()))
            network = NetworkConfig.from_dict(data.pop("network", {}))
            synthetic = SyntheticScheduleParams.from_dict(data.pop("synthetic", {}))
            sweep = data.pop("sweep", {})
            sweep = SweepSpec(**{**sweep, "sizes": tuple(sweep.get("sizes", ()))})
            return cls(scenarios=scenarios, network=network, synthetic=synthetic, sweep=sweep, **data)
        except TypeError as exc:
            raise ConfigError(f"bad experiment config: {exc}") from None

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        config = cls.from_dict(data)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(config, **overrides) if overrides else config

    def to_dict(self) -> dict:
        synthetic = asdict(self.synthetic)
        synthetic["start_date"] = self.synthetic.start_date.isoformat()
        out = {
            "scenarios": [asdict(s) for s in self.scenarios],
            "network": self.network.to_dict(),
            "synthetic": synthetic,
            "sweep": {**asdict(self.sweep), "sizes": list(self.sweep.sizes)},
        }
        for key in ("schedule_csv", "days", "max_wait_minutes", "solver", "time_limit", "rel_gap", "abs_gap",
                    "bounds", "base_seed", "output_dir", "jobs"):
            out[key] = getattr(self, key)
        return out
