#!/usr/bin/env python3
"""
Reproduce the four figure sweeps from the documents in configs/.

Writes one CSV per document under results/ and prints the
Poisson-hexagonal dB gap at outage 0.5 for the threshold sweeps.
"""

import argparse
import os
import sys

# Add the backend directory to Python path
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, os.path.join(ROOT, "backend"))

from app.core.errors import CoverageError
from app.core.logging_config import configure_logging
from app.services.config_service import load_config
from app.services.sweep_service import compare_models, run_sweep, write_rows

CONFIGS = [
    "fig1_outage_vs_threshold_gamma4.env",
    "fig1_outage_vs_threshold_gamma3.env",
    "fig2_handover_vs_threshold.env",
    "fig3_outage_vs_gamma.env",
    "fig4_handover_vs_gamma.env",
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--snapshots", type=int, default=None, help="overrides SIM_SNAPSHOTS")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    configure_logging()

    for name in CONFIGS:
        config = load_config(os.path.join(ROOT, "configs", name))
        rows = run_sweep(config, workers=args.workers, snapshots=args.snapshots)
        output = os.path.join(ROOT, config.output_path or f"results/{name}.csv")
        write_rows(rows, output, config)
        print(f"{name}: {len(rows)} rows -> {output}")

        if config.hex_enabled and config.sweep_name == "threshold_db":
            try:
                report = compare_models(rows, 0.5)
                print(f"  gap at p_o = 0.5 (gamma = {config.pathloss_gamma:g}): {report.gap_db:.2f} dB")
            except CoverageError as e:
                print(f"  gap not available: {e}")


if __name__ == "__main__":
    main()
