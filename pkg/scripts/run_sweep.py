#!/usr/bin/env python3
"""Parameter study on the ten-layer karate replica.

Builds the replica with per-layer resolutions 0.1 ... 1.0 and full
node-copy couplings, runs the spectral detector once per coupling
strength in {0, 0.01, 0.1, 1, 10}, and writes label tables plus a
per-strength consistency summary.

Usage:
    python scripts/run_sweep.py [outdir]
"""

from __future__ import annotations

import sys

from mlmod.cli import main

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "results/sweep"
    code = main([
        "sweep",
        "--dataset", "karate-replica",
        "--layers", "10",
        "--omega", "0", "0.01", "0.1", "1", "10",
        "--seed", "0",
        "--out", outdir,
    ])
    if code == 0:
        print(f"label table:   {outdir}/sweep_labels.csv")
        print(f"consistency:   {outdir}/sweep_summary.csv")
    sys.exit(code)
