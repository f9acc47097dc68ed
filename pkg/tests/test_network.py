import numpy as np
import pytest
from hypothesis import given, strategies as st

from uamfleet.network import (
    ConfigError,
    NetworkConfig,
    arrival_sets,
    charging_duration,
    default_charging_curve,
)


def test_duration_sums_levels_between():
    assert charging_duration(1, 3, [1, 1, 2, 3]) == 3


def test_duration_single_level_is_gamma_entry():
    gamma = [1, 2, 3, 4]
    for k in range(1, 5):
        assert charging_duration(k - 1, k, gamma) == gamma[k - 1]


def test_uniform_curve_full_charge_is_k():
    assert charging_duration(0, 6, [1] * 6) == 6


@pytest.mark.parametrize("x,y", [(2, 2), (3, 1), (-1, 2), (0, 5)])
def test_duration_domain_errors(x, y):
    with pytest.raises(ValueError):
        charging_duration(x, y, [1, 1, 1, 1])


def test_default_curve_examples():
    assert default_charging_curve(4) == (1, 1, 1, 2)
    assert default_charging_curve(1) == (1,)
    curve = default_charging_curve(32)
    assert curve[-1] == 4
    assert sum(curve) == 44


@given(st.integers(1, 64))
def test_default_curve_is_nondecreasing_with_unit_start(k):
    curve = default_charging_curve(k)
    assert len(curve) == k
    assert curve[0] == 1
    assert all(a <= b for a, b in zip(curve, curve[1:]))


@given(st.lists(st.integers(1, 5), min_size=3, max_size=10), st.data())
def test_duration_is_additive(gamma, data):
    k = len(gamma)
    x = data.draw(st.integers(0, k - 2))
    y = data.draw(st.integers(x + 1, k - 1))
    z = data.draw(st.integers(y + 1, k))
    assert charging_duration(x, z, gamma) == charging_duration(x, y, gamma) + charging_duration(y, z, gamma)


def test_horizon_adds_longest_flight_and_one():
    cfg = NetworkConfig(steps_per_day=10, tau=3, kappa=2, levels=4)
    assert cfg.horizon == 14


def test_constant_tau_arrival_sets():
    cfg = NetworkConfig(steps_per_day=10, tau=2, kappa=1, levels=4)
    sets = arrival_sets(cfg)
    assert sets[(0, 1, 5)] == (3,)
    assert sets.get((0, 1, 1), ()) == ()


def test_time_varying_tau_arrival_set():
    tau = np.full((2, 2, 4), 2)
    tau[:, :, 1] = 1  # departures at t=2 take one step
    cfg = NetworkConfig(steps_per_day=4, tau=tau, kappa=1, levels=4)
    assert cfg.tau_at(0, 1, 1) == 2 and cfg.tau_at(0, 1, 2) == 1
    assert arrival_sets(cfg)[(0, 1, 3)] == (1, 2)


@given(st.lists(st.integers(1, 3), min_size=6, max_size=6))
def test_arrival_sets_partition_departures(taus):
    steps = len(taus)
    table = np.ones((2, 2, steps), dtype=int)
    table[0, 1] = taus
    table[1, 0] = taus[::-1]
    cfg = NetworkConfig(steps_per_day=steps, tau=table, kappa=1, levels=4)
    sets = arrival_sets(cfg)
    for i, j in cfg.pairs:
        seen = [t for (a, b, _), deps in sets.items() if (a, b) == (i, j) for t in deps]
        assert sorted(seen) == list(range(1, cfg.horizon + 1))


@given(st.integers(1, 5))
def test_constant_tau_sets_are_shifts(tau):
    cfg = NetworkConfig(steps_per_day=8, tau=tau, kappa=1, levels=4)
    sets = arrival_sets(cfg)
    for t in range(cfg.horizon + 1):
        expected = (t - tau,) if 1 <= t - tau <= cfg.horizon else ()
        assert sets.get((0, 1, t), ()) == expected


@pytest.mark.parametrize("kwargs", [
    {"kappa": 0},
    {"kappa": 40},
    {"tau": 0},
    {"gamma": (1, 0, 1, 1), "levels": 4},
    {"gamma": (1, 1), "levels": 4},
    {"vertiports": ("A",)},
    {"vertiports": ("A", "A")},
    {"levels": 0},
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        NetworkConfig(**kwargs)


def test_reserve_and_soc_levels():
    cfg = NetworkConfig()
    assert cfg.min_flight_level(0, 1, 1) == 4
    assert cfg.level_fraction(0) == pytest.approx(0.20)
    assert cfg.level_fraction(32) == pytest.approx(1.0)
    assert cfg.level_at_fraction(0.5) == 12


def test_dict_round_trip():
    cfg = NetworkConfig(steps_per_day=12, levels=6, tau=1, kappa=2)
    again = NetworkConfig.from_dict(cfg.to_dict())
    assert again == cfg
    assert again.horizon == cfg.horizon
    with pytest.raises(ConfigError):
        NetworkConfig.from_dict({"bogus": 1})
