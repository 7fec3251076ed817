#!/usr/bin/env python3
"""Sweep the probe across the dressed resonance at three drive levels and
write the stacked asymmetric-lineshape traces to results/lineshapes.csv."""

import pathlib
import sys

from cavkerr.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "results"

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    sys.exit(main(["--config", str(ROOT / "configs" / "fig_lineshapes.yaml"),
                   "--out", str(OUT / "lineshapes.csv")]))
