#!/usr/bin/env python3
"""Compare both bound policies with the exact spill optimum on random micro instances.

    python scripts/sandwich_micro.py [n_seeds]

Prints every (seed, F) where lower <= optimum <= upper fails.
"""

import sys

from uamfleet.heuristics import simulate_lower_bound, simulate_upper_bound
from uamfleet.milp import SolverLimits, build_fleet_sizing, build_spill, fleet_size_of, solve
from uamfleet.milp.bruteforce import random_micro_instance


def main(n_seeds: int) -> int:
    exact = SolverLimits.exact()
    checked = failures = 0
    for seed in range(n_seeds):
        cfg, series = random_micro_instance(seed)
        fstar = fleet_size_of(solve(build_fleet_sizing(cfg, series), "highs", exact), cfg)
        for f in range(fstar + 1):
            opt = round(solve(build_spill(cfg, series, f), "highs", exact).objective_value)
            lb = simulate_lower_bound(cfg, series, f).daily_spill
            ub = simulate_upper_bound(cfg, series, f).daily_spill
            checked += 1
            if not lb <= opt <= ub:
                failures += 1
                print(f"seed {seed} F={f}: lower {lb}, optimum {opt}, upper {ub}")
    print(f"{checked - failures}/{checked} (seed, F) pairs sandwiched")
    return 0


if __name__ == "__main__":
    sys.exit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 100))
