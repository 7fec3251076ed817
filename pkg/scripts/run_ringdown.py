#!/usr/bin/env python3
"""Full ring-up pipeline: probe switch-on transient, 50-shot photon
counting, windowed spectral amplitudes and the fitted coherence time.
Writes results/ringdown_{trace,counts,windows}.csv and _summary.json."""

import pathlib
import sys

from cavkerr.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "results"

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    sys.exit(main(["--config", str(ROOT / "configs" / "fig_ringdown.yaml"),
                   "--out", str(OUT / "ringdown")]))
