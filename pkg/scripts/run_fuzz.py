#!/usr/bin/env python3
"""Separable-state fuzz of the eight witness bounds (10^4 trials by default;
pass --set fuzz.trials=... to resize)."""

import pathlib
import sys

from fieldwitness.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"
OUT.mkdir(exist_ok=True)

sys.exit(main([
    "fuzz",
    "--set", "fuzz.bell_control=true",
    "--output", str(OUT / "fuzz.json"),
    *sys.argv[1:],
]))
