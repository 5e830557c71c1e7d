"""The four witness families and their minimum.

With (Delta A)^2 = <A^2> - <A>^2 and (A, B, C) running over the cyclic
permutations of (X, Y, Z):

    w1    = N(2 + N) - <X^2> - <Y^2> - <Z^2>
    w2    = (DX)^2 + (DY)^2 + (DZ)^2 - 2N
    w3[A] = 2N + (N - 1)(DA)^2 - <B^2> - <C^2>
    w4[C] = (N - 1)[(DA)^2 + (DB)^2] - <C^2> - N(N - 2)

Every separable state satisfies all eight inequalities >= 0, so a negative
minimum certifies entanglement.  w3 is symmetric in (B, C) and is labeled
by A; w4 is symmetric in (A, B) and is labeled by C.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .field import OperatorMoments, moments, moments_from_phases
from .geometry import AtomConfig, Direction
from .qstate import State

WITNESS_LABELS = ("w1", "w2", "w3_X", "w3_Y", "w3_Z", "w4_X", "w4_Y", "w4_Z")

_CYCLIC = {"X": ("Y", "Z"), "Y": ("Z", "X"), "Z": ("X", "Y")}


@dataclass
class WitnessReport:
    w1: float
    w2: float
    w3: dict[str, float]
    w4: dict[str, float]
    w_min: float
    argmin: str
    direction: Direction | None = None

    def values(self) -> tuple[float, ...]:
        """The eight witness values in the fixed WITNESS_LABELS order."""
        return (
            self.w1, self.w2,
            self.w3["X"], self.w3["Y"], self.w3["Z"],
            self.w4["X"], self.w4["Y"], self.w4["Z"],
        )


def detection_epsilon(n_atoms: int) -> float:
    """Threshold below which a negative minimum counts as detection; scaled
    with N to absorb floating-point noise in 4^N arithmetic."""
    return 1e-6 * n_atoms


def witness_report(m: OperatorMoments) -> WitnessReport:
    n = m.n_atoms
    second = {"X": m.second_x, "Y": m.second_y, "Z": m.second_z}
    var = dict(zip("XYZ", m.variances()))

    w1 = n * (2.0 + n) - second["X"] - second["Y"] - second["Z"]
    w2 = var["X"] + var["Y"] + var["Z"] - 2.0 * n
    w3 = {
        a: 2.0 * n + (n - 1.0) * var[a] - second[b] - second[c]
        for a, (b, c) in _CYCLIC.items()
    }
    # cyclic triples (A, B, C) keyed by C: (X,Y,Z)->Z, (Y,Z,X)->X, (Z,X,Y)->Y
    w4 = {
        c: (n - 1.0) * (var[a] + var[b]) - second[c] - n * (n - 2.0)
        for c, (a, b) in _CYCLIC.items()
    }

    values = (w1, w2, w3["X"], w3["Y"], w3["Z"], w4["X"], w4["Y"], w4["Z"])
    idx = int(np.argmin(values))
    return WitnessReport(
        w1=w1, w2=w2, w3=w3, w4=w4,
        w_min=values[idx], argmin=WITNESS_LABELS[idx],
        direction=m.direction,
    )


def phase_vector_moments(
    state: State, config: AtomConfig, phases
) -> OperatorMoments:
    """Moments with atom j's optical-path phase replaced by phases[j]; spans
    the full per-atom-phase witness family beyond physical directions."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (config.n_atoms,):
        raise ValueError(
            f"need {config.n_atoms} phases, got shape {phases.shape}"
        )
    return moments_from_phases(state, phases, chi=0.0, direction=None)


def spin_squeezing_report(state: State, config: AtomConfig) -> WitnessReport:
    """Witness report with every optical-path phase forced to zero (k = 0),
    i.e. the plain spin-squeezing inequalities."""
    m = phase_vector_moments(state, config, np.zeros(config.n_atoms))
    return witness_report(m)


def sweep(
    state: State,
    config: AtomConfig,
    directions: list[Direction],
    max_workers: int = 1,
) -> list[WitnessReport]:
    """One report per direction, order preserved regardless of worker count."""
    if not directions:
        raise ValueError("need at least one direction")

    def one(direction: Direction) -> WitnessReport:
        return witness_report(moments(state, config, direction))

    if max_workers <= 1 or len(directions) == 1:
        return [one(d) for d in directions]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, directions))
