#!/usr/bin/env python3
"""Witness over a full sphere of observation directions for the three-atom
chain state (spacing 0.3/k, relative phase pi/3), written to results/."""

import pathlib
import sys

from fieldwitness.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"
OUT.mkdir(exist_ok=True)

sys.exit(main([
    "fig1-sphere",
    "--output", str(OUT / "fig1_sphere.csv"),
    "--plot",
    *sys.argv[1:],
]))
