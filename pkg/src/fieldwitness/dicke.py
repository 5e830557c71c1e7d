"""Single-excitation Dicke states with per-atom phases.

The analytic moment path costs O(N^2) (actually O(N) via a coherent sum)
and is valid for any N; exact-state construction is only possible below
the dense cap and serves as the brute-force oracle in tests.

For these states (DZ)^2 = 0, so the variance witness and the Z-labeled
w3 collapse onto one scalar

    S_k = (4/N) sum_{j != s} cos[(phi_s - phi_j) + k.(r_j - r_s)]

with w2 = -w3[Z] = S_k: either sign of S_k away from zero is a detection.
Phases phi_n = n arccos(delta), with delta an interior root of
T_N(delta) - N delta + (N - 1) = 0 (T_N the Chebyshev polynomial of the
first kind), zero the k = 0 double sum and thereby blind plain spin
squeezing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .field import OperatorMoments, optical_phases
from .geometry import AtomConfig, Direction
from .qstate import PureState, check_atom_count, dim


@dataclass
class DickeSpec:
    phases: np.ndarray
    n_atoms: int

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        if self.phases.shape != (self.n_atoms,):
            raise ValueError(
                f"need {self.n_atoms} phases, got shape {self.phases.shape}"
            )
        if self.n_atoms < 1:
            raise ValueError("need at least one atom")


def dicke_state(spec: DickeSpec) -> PureState:
    """(1/sqrt(N)) sum_n exp(i phi_n) |up_n> as a dense ket."""
    n = spec.n_atoms
    check_atom_count(n)
    vec = np.zeros(dim(n), dtype=complex)
    all_down = dim(n) - 1
    for site in range(1, n + 1):
        idx = all_down - (1 << (n - site))  # flip site's bit to |up>
        vec[idx] = np.exp(1j * spec.phases[site - 1])
    vec /= np.sqrt(n)
    return PureState(vec, n)


def _pair_cosine_sum(beta: np.ndarray) -> float:
    """sum_{j != s} cos(beta_j - beta_s) = |sum_j e^{i beta_j}|^2 - N."""
    coherent = np.exp(1j * beta).sum()
    return float(abs(coherent) ** 2 - beta.size)


def dicke_moments(
    spec: DickeSpec, config: AtomConfig, direction: Direction
) -> OperatorMoments:
    """Closed-form moments, O(N^2) or better; no exponential objects.

    <X^2> = <Y^2> = N + (2/N) sum_{j != s} cos[(phi_s - phi_j) + k.(r_j - r_s)]
    <Z^2> = N + (N - 4)(N - 1),  <Z> = -(N - 2),  <X> = <Y> = 0.

    The sign of <Z> follows this package's sigma_z = |up><up| - |down><down|
    convention (one excitation, N - 1 ground atoms); only <Z>^2 feeds any
    witness.
    """
    n = spec.n_atoms
    if config.n_atoms != n:
        raise ValueError(f"geometry has {config.n_atoms} atoms, spec {n}")
    beta = spec.phases - optical_phases(config, direction)
    pair_sum = _pair_cosine_sum(beta)
    second_xy = n + (2.0 / n) * pair_sum
    return OperatorMoments(
        mean_x=0.0,
        mean_y=0.0,
        mean_z=-(n - 2.0),
        second_x=second_xy,
        second_y=second_xy,
        second_z=n + (n - 4.0) * (n - 1.0),
        n_atoms=n,
        direction=direction,
    )


def s_k(spec: DickeSpec, config: AtomConfig, direction: Direction) -> float:
    """(4/N) sum_{j != s} cos[(phi_s - phi_j) + k.(r_j - r_s)].

    Sign fixed so that w2 = -w3[Z] = S_k holds identically on the analytic
    moments (checked against the brute-force oracle in the tests).
    """
    beta = spec.phases - optical_phases(config, direction)
    return (4.0 / spec.n_atoms) * _pair_cosine_sum(beta)


def _root_function(n: int):
    """h(nu) = cos(N nu) - 1 - N (cos nu - 1); h(nu) = 0 iff delta = cos(nu)
    solves T_N(delta) - N delta + (N - 1) = 0."""

    def h(nu: float) -> float:
        return np.cos(n * nu) - 1.0 - n * (np.cos(nu) - 1.0)

    return h


def chebyshev_interior_roots(n: int) -> np.ndarray:
    """All roots delta in (-1, 1) of T_N(delta) - N delta + (N - 1) = 0,
    descending.  delta = 1 is always a root and is excluded."""
    if n < 2:
        raise ValueError("need at least two atoms")
    h = _root_function(n)
    # first interior root sits at nu ~ few/N; step fine enough to catch every
    # sign change of the cos(N nu) oscillation
    grid = np.linspace(0.0, np.pi, 40 * n + 1)[1:]
    values = np.array([h(nu) for nu in grid])
    roots = []
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            roots.append(grid[i])
        elif values[i] * values[i + 1] < 0.0:
            roots.append(brentq(h, grid[i], grid[i + 1], xtol=1e-15, rtol=8.9e-16))
    hp = lambda nu: -n * np.sin(n * nu) + n * np.sin(nu)
    polished = []
    for nu in roots:
        for _ in range(3):  # Newton polish toward |h| ~ eps
            d = hp(nu)
            if d == 0.0:
                break
            nu = nu - h(nu) / d
        if 0.0 < nu < np.pi:
            polished.append(nu)
    deltas = np.cos(polished)
    deltas = deltas[(deltas > -1.0) & (deltas < 1.0)]
    return np.sort(deltas)[::-1]


def chebyshev_delta(n: int) -> float:
    """Largest interior root; the corresponding phases phi_m = m arccos(delta)
    make the k = 0 pair-cosine sum vanish."""
    roots = chebyshev_interior_roots(n)
    if roots.size == 0:
        raise RuntimeError(f"no interior root found for N = {n}")
    delta = float(roots[0])
    residual = np.cos(n * np.arccos(delta)) - n * delta + (n - 1.0)
    if abs(residual) > 1e-12:
        raise RuntimeError(f"root residual {residual:.3e} exceeds 1e-12")
    phases = chebyshev_phases(n, delta)
    zero_sum = _pair_cosine_sum(phases)
    if abs(zero_sum) > 1e-6:
        raise RuntimeError(f"pair-cosine sum {zero_sum:.3e} at the root exceeds 1e-6")
    return delta


def chebyshev_phases(n: int, delta: float | None = None) -> np.ndarray:
    """phi_m = m arccos(delta) for m = 1..N (auto-solves delta if omitted)."""
    if delta is None:
        delta = chebyshev_delta(n)
    return np.arange(1, n + 1) * np.arccos(delta)
