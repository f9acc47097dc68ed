#!/usr/bin/env python3
"""Run the full pipeline from a JSON config and render the charts.

    python scripts/run_experiment.py scripts/configs/smoke.json
    python scripts/run_experiment.py scripts/configs/reduced_scale.json --jobs 4 --output results/reduced
"""

import sys

from uamfleet.harness.cli import main

if __name__ == "__main__":
    if len(sys.argv) < 2 or sys.argv[1].startswith("-"):
        sys.exit(__doc__)
    sys.exit(main(["-v", "experiment", "--config", sys.argv[1], *sys.argv[2:]]))
