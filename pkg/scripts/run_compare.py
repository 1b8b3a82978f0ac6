#!/usr/bin/env python3
"""Algorithm comparison across coupling densities.

Runs mspec, mlouv, smean and sfull on the ten-layer karate replica for
rho in {0, 0.1, ..., 1}, averaging each density over seeded coupling
realizations, and writes the comparison table (one row per algorithm,
one column per rho plus variance and mean).

Usage:
    python scripts/run_compare.py [outdir] [repeats]

Repeats defaults to 5; the acceptance suite uses 20.
"""

from __future__ import annotations

import sys

from mlmod.cli import main

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "results/compare"
    repeats = sys.argv[2] if len(sys.argv) > 2 else "5"
    code = main([
        "compare",
        "--dataset", "karate-replica",
        "--layers", "10",
        "--repeats", repeats,
        "--seed", "0",
        "--out", outdir,
    ])
    if code == 0:
        print(f"table: {outdir}/compare.csv (aligned text: compare.txt)")
    sys.exit(code)
