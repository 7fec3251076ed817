#!/usr/bin/env python3
"""Run opposite-chirp sweeps through the bistable regime (beta ~ 9.5) and
write both branches plus the fold report to results/."""

import pathlib
import sys

from cavkerr.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "results"

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    cfg = str(ROOT / "configs" / "fig_hysteresis.yaml")
    rc = main(["--config", cfg, "--out", str(OUT / "hysteresis.csv")])
    if rc == 0:
        rc = main(["--config", cfg, "--scenario", "bistability-threshold",
                   "--out", str(OUT / "folds.json")])
    sys.exit(rc)
