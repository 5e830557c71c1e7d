#!/usr/bin/env python3
"""In-plane witness sweep for the 100-atom timed-Dicke chain (spacing
pi/2k, Chebyshev-root phases), analytic moment path."""

import pathlib
import sys

from fieldwitness.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"
OUT.mkdir(exist_ok=True)

sys.exit(main([
    "dicke-sweep",
    "--output", str(OUT / "dicke_sweep.csv"),
    "--plot",
    *sys.argv[1:],
]))
