#!/usr/bin/env python3
"""Summarize a year of generated demand: daily totals per direction and AR spread.

    python scripts/demand_stats.py [add] [seed]
"""

import sys

import numpy as np

from uamfleet.demand import DemandParams, generate_profiles
from uamfleet.schedule import generate_synthetic_schedule


def main(add: float, seed: int) -> int:
    year = generate_synthetic_schedule(days=365, seed=seed)
    for ar in (0.0, 0.7):
        profiles = generate_profiles(year, DemandParams(add=add, ar_coeff=ar), base_seed=seed)
        totals = np.array([[p.count("APT"), p.count("CBD")] for p in profiles])
        q1, med, q3 = np.percentile(totals.sum(axis=1), [25, 50, 75])
        print(f"ar_coeff={ar}: mean per direction {totals.mean(axis=0).round(1).tolist()}, "
              f"daily total median {med:.0f} (IQR {q1:.0f}-{q3:.0f}), sd {totals.sum(axis=1).std():.1f}")
    return 0


if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(main(float(args[0]) if args else 1500.0, int(args[1]) if len(args) > 1 else 0))
