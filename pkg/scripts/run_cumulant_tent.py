#!/usr/bin/env python3
"""Detection-time grid over (N, kd) from the second-order cumulant flow,
observation angle 0.45 pi from the chain axis, antisymmetric initial state."""

import pathlib
import sys

from fieldwitness.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"
OUT.mkdir(exist_ok=True)

sys.exit(main([
    "cumulant-tent",
    "--output", str(OUT / "cumulant_tent.csv"),
    "--plot",
    *sys.argv[1:],
]))
