"""Far-field operators and the six moments feeding every witness.

The detected field at direction k is E^- = sum_j exp(-i k.r_j) sigma_j^-
with E^+ its adjoint (field prefactor set to one, so moments come out in
emitter-number units).  A nonzero quadrature angle chi multiplies E^+- by
exp(+-i chi), which simply shifts every optical-path phase by chi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AtomConfig, Direction
from .qstate import (
    Operator,
    PureState,
    State,
    check_atom_count,
    collective_z,
    dim,
    pauli_embed,
)


@dataclass
class OperatorMoments:
    """First and second moments of (X, Y, Z) at one observation direction."""

    mean_x: float
    mean_y: float
    mean_z: float
    second_x: float
    second_y: float
    second_z: float
    n_atoms: int
    direction: Direction | None = None

    def variances(self) -> tuple[float, float, float]:
        return (
            self.second_x - self.mean_x**2,
            self.second_y - self.mean_y**2,
            self.second_z - self.mean_z**2,
        )

    def validate(self, tol: float = 1e-9) -> None:
        n = self.n_atoms
        if not (-n - tol <= self.mean_z <= n + tol):
            raise ValueError(f"<Z> = {self.mean_z} outside [-{n}, {n}]")
        for label, second in (("X", self.second_x), ("Y", self.second_y),
                              ("Z", self.second_z)):
            if not (-tol <= second <= n * n + tol):
                raise ValueError(f"<{label}^2> = {second} outside [0, {n * n}]")
        for label, var in zip("XYZ", self.variances()):
            if var < -tol:
                raise ValueError(f"variance of {label} is {var} < -{tol}")


def optical_phases(config: AtomConfig, direction: Direction) -> np.ndarray:
    """k . r_j for every atom (|k| = 1 in natural units)."""
    return config.positions @ direction.khat


def field_operator(config: AtomConfig, direction: Direction, sign: str) -> Operator:
    """sum_j exp(-i k.r_j) sigma_j^- for sign "-", its adjoint for sign "+"."""
    n = config.n_atoms
    check_atom_count(n)
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    phases = optical_phases(config, direction)
    total = np.zeros((dim(n), dim(n)), dtype=complex)
    for j in range(1, n + 1):
        if sign == "-":
            total += np.exp(-1j * phases[j - 1]) * pauli_embed(j, "minus", n).entries
        else:
            total += np.exp(1j * phases[j - 1]) * pauli_embed(j, "plus", n).entries
    return Operator(total, n)


def _quadratures_from_phases(n: int, phases: np.ndarray, chi: float):
    """Dense X, Y entries plus the diagonal of Z for given per-atom phases."""
    d = dim(n)
    e_plus = np.zeros((d, d), dtype=complex)
    for j in range(1, n + 1):
        e_plus += np.exp(1j * (phases[j - 1] + chi)) * pauli_embed(j, "plus", n).entries
    e_minus = e_plus.conj().T
    x = e_plus + e_minus
    y = 1j * (e_plus - e_minus)
    return x, y, collective_z(n)


def quadrature_operators(
    config: AtomConfig, direction: Direction
) -> tuple[Operator, Operator, Operator]:
    """X = E+ + E-, Y = i(E+ - E-), Z = sum_j sigma_j^z, with the chi rotation
    folded into E+-."""
    n = config.n_atoms
    check_atom_count(n)
    x, y, zdiag = _quadratures_from_phases(n, optical_phases(config, direction),
                                           direction.chi)
    return (
        Operator(x, n),
        Operator(y, n),
        Operator(np.diag(zdiag.astype(complex)), n),
    )


def moments_from_phases(
    state: State,
    phases: np.ndarray,
    chi: float = 0.0,
    direction: Direction | None = None,
) -> OperatorMoments:
    """Six moments with atom j's optical-path phase fixed to phases[j]."""
    n = state.n_atoms
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (n,):
        raise ValueError(f"need {n} phases, got shape {phases.shape}")
    x, y, zdiag = _quadratures_from_phases(n, phases, chi)
    if isinstance(state, PureState):
        psi = state.amplitudes
        xpsi = x @ psi
        ypsi = y @ psi
        zpsi = zdiag * psi
        mean_x = np.vdot(psi, xpsi).real
        mean_y = np.vdot(psi, ypsi).real
        mean_z = np.vdot(psi, zpsi).real
        second_x = np.vdot(xpsi, xpsi).real
        second_y = np.vdot(ypsi, ypsi).real
        second_z = np.vdot(zpsi, zpsi).real
    else:
        rho = state.entries
        xr = x @ rho
        yr = y @ rho
        mean_x = np.trace(xr).real
        mean_y = np.trace(yr).real
        mean_z = float(np.real(zdiag @ np.diag(rho)))
        second_x = np.sum(x * xr.T).real
        second_y = np.sum(y * yr.T).real
        second_z = float(np.real(zdiag**2 @ np.diag(rho)))
    return OperatorMoments(
        mean_x=float(mean_x),
        mean_y=float(mean_y),
        mean_z=float(mean_z),
        second_x=float(second_x),
        second_y=float(second_y),
        second_z=float(second_z),
        n_atoms=n,
        direction=direction,
    )


def moments(state: State, config: AtomConfig, direction: Direction) -> OperatorMoments:
    """Moments of the quadratures at one observation direction."""
    if state.n_atoms != config.n_atoms:
        raise ValueError(
            f"state on {state.n_atoms} atoms, geometry on {config.n_atoms}"
        )
    return moments_from_phases(
        state, optical_phases(config, direction), direction.chi, direction
    )
