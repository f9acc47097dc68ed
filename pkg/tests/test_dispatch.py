import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uamfleet.demand import ArrivalProfile
from uamfleet.dispatch import DemandTimeSeries, dispatch, parse_series, serialize_series

DAY = dt.date(2019, 1, 1)


def profile(minutes, origins):
    order = np.argsort(minutes, kind="stable")
    return ArrivalProfile(DAY, np.asarray(minutes, dtype=float)[order], tuple(np.asarray(origins)[order]))


def test_empty_profile_gives_zero_series():
    series = dispatch(profile([], []))
    assert series.total_flights == 0 and series.total_passengers == 0
    assert series.flights.shape == (2, 2, 288)


def test_full_cabin_departs_on_last_boarding():
    series = dispatch(profile([0, 1, 2, 3], ["CBD"] * 4), seat_capacity=4)
    assert series.flights[1, 0, 0] == 1
    assert series.passengers[1, 0, 0] == 4
    assert series.total_flights == 1


def test_single_passenger_leaves_after_max_wait():
    series = dispatch(profile([0], ["CBD"]), seat_capacity=4)
    assert series.flights[1, 0, 1] == 1 and series.passengers[1, 0, 1] == 1
    assert series.total_flights == 1


def test_arrival_at_exact_deadline_boards_first():
    series = dispatch(profile([0, 5], ["APT", "APT"]), seat_capacity=4)
    assert series.flights[0, 1, 1] == 1 and series.passengers[0, 1, 1] == 2


def test_late_queue_is_flushed_in_last_step():
    series = dispatch(profile([1438.0], ["APT"]), seat_capacity=4)
    assert series.flights[0, 1, 287] == 1


def test_origins_map_to_pairs():
    series = dispatch(profile([10, 20], ["APT", "CBD"]))
    assert series.passengers[0, 1].sum() == 1 and series.passengers[1, 0].sum() == 1


arrivals = st.lists(st.tuples(st.floats(0, 1439.99, allow_nan=False), st.sampled_from(["APT", "CBD"])),
                    max_size=150)


@settings(max_examples=60)
@given(arrivals, st.integers(1, 6))
def test_dispatch_invariants(rows, capacity):
    prof = profile([m for m, _ in rows], [o for _, o in rows])
    series = dispatch(prof, seat_capacity=capacity)
    assert series.total_passengers == len(rows)
    assert np.all(series.passengers <= capacity * series.flights)
    assert np.all((series.flights == 0) | (series.passengers >= 1))
    for loads in series.occupancies.values():
        assert all(1 <= load <= capacity for load in loads)
    again = dispatch(prof, seat_capacity=capacity)
    assert np.array_equal(again.flights, series.flights) and np.array_equal(again.passengers, series.passengers)


@settings(max_examples=60)
@given(st.lists(st.floats(0, 1400, allow_nan=False), max_size=80), st.integers(1, 5))
def test_wait_is_bounded(minutes, capacity):
    """Replays the queue to check each passenger's flight step against its arrival."""
    minutes = sorted(minutes)
    series = dispatch(profile(minutes, ["CBD"] * len(minutes)), seat_capacity=capacity)
    departures = []
    for s in range(series.n_steps):
        departures += [s] * int(series.passengers[1, 0, s])
    assert len(departures) == len(minutes)
    for m, s in zip(minutes, departures):
        assert s * 5 >= int(m // 5) * 5
        assert s * 5 <= m + 5 + 5


def test_series_csv_round_trip():
    series = dispatch(profile([0, 1, 2, 3, 100, 700.5], ["CBD", "CBD", "APT", "CBD", "APT", "APT"]))
    again = parse_series(serialize_series(series))
    assert again == series


def test_series_rejects_bad_header_and_negative_values():
    with pytest.raises(ValueError):
        parse_series("a,b\n")
    with pytest.raises(ValueError):
        DemandTimeSeries(("APT", "CBD"), -np.ones((2, 2, 3)), np.zeros((2, 2, 3)))


def test_flight_loads_reconstruction():
    series = DemandTimeSeries.zeros(("APT", "CBD"), 3)
    series.flights[0, 1, 0], series.passengers[0, 1, 0] = 3, 6
    series.occupancies.clear()
    loads = series.flight_loads(0, 1, 0)
    assert sum(loads) == 6 and len(loads) == 3 and all(1 <= x <= 4 for x in loads)
