"""Dense N-qubit states and operators.

Basis convention, shared by every module so that array dumps and oracle
comparisons are bit-exact: site 1 is the most-significant bit, with
|up> = 0 and |down> = 1 per site.  Index 0 is |up...up>, index 2^N - 1
is |down...down>.

Everything here is dense and capped at EXACT_CAP atoms (a density matrix
at the cap is ~2.7 GB).  Hermiticity / positivity checks are explicit
validation calls, never per-arithmetic-op overhead.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

EXACT_CAP = 14

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |up><down|
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |down><up|

_SINGLE_SITE = {
    "x": SIGMA_X,
    "y": SIGMA_Y,
    "z": SIGMA_Z,
    "plus": SIGMA_PLUS,
    "minus": SIGMA_MINUS,
}


def dim(n_atoms: int) -> int:
    return 1 << n_atoms


def check_atom_count(n_atoms: int) -> None:
    if n_atoms < 1:
        raise ValueError(f"need at least one atom, got {n_atoms}")
    if n_atoms > EXACT_CAP:
        raise ValueError(
            f"{n_atoms} atoms exceeds the exact-state cap of {EXACT_CAP}"
        )


@dataclass
class PureState:
    """Normalized ket on the 2^N-dimensional Hilbert space."""

    amplitudes: np.ndarray
    n_atoms: int

    def __post_init__(self):
        check_atom_count(self.n_atoms)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (dim(self.n_atoms),):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({dim(self.n_atoms)},)"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond 1e-12")

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             self.n_atoms)


@dataclass
class DensityMatrix:
    """2^N x 2^N density matrix.  Construction checks shape only; call
    validate() / min_eigenvalue() where the physics requires it."""

    entries: np.ndarray
    n_atoms: int

    def __post_init__(self):
        check_atom_count(self.n_atoms)
        self.entries = np.asarray(self.entries, dtype=complex)
        d = dim(self.n_atoms)
        if self.entries.shape != (d, d):
            raise ValueError(
                f"density matrix has shape {self.entries.shape}, expected ({d}, {d})"
            )

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10) -> None:
        dev = np.abs(self.entries - self.entries.conj().T).max()
        if dev > herm_tol:
            raise ValueError(f"hermiticity deviation {dev:.3e} exceeds {herm_tol:.1e}")
        tr = self.entries.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {trace_tol:.1e}")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def validate_positive(self, floor: float = -1e-8) -> None:
        lam = self.min_eigenvalue()
        if lam < floor:
            raise ValueError(f"minimum eigenvalue {lam:.3e} below floor {floor:.1e}")


@dataclass
class Operator:
    """Dense operator on the 2^N-dimensional space."""

    entries: np.ndarray
    n_atoms: int

    def __post_init__(self):
        check_atom_count(self.n_atoms)
        self.entries = np.asarray(self.entries, dtype=complex)
        d = dim(self.n_atoms)
        if self.entries.shape != (d, d):
            raise ValueError(
                f"operator has shape {self.entries.shape}, expected ({d}, {d})"
            )

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T, self.n_atoms)


State = Union[PureState, DensityMatrix]


def _embed(single: np.ndarray, j: int, n_atoms: int) -> np.ndarray:
    factors = [np.eye(2, dtype=complex)] * n_atoms
    factors[j - 1] = single
    return reduce(np.kron, factors)


def pauli_embed(j: int, axis: str, n_atoms: int) -> Operator:
    """Single-site Pauli operator acting on site j (1-based), identity elsewhere.

    axis is one of {"x", "y", "z", "plus", "minus"}.
    """
    check_atom_count(n_atoms)
    if not 1 <= j <= n_atoms:
        raise IndexError(f"atom index {j} out of range 1..{n_atoms}")
    try:
        single = _SINGLE_SITE[axis]
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}") from None
    return Operator(_embed(single, j, n_atoms), n_atoms)


def phase_pauli(j: int, axis: str, theta: float, n_atoms: int) -> Operator:
    """Phase-dressed transverse Pauli operator for site j.

    For a detection phase theta,
        x: exp(-i theta) sigma- + exp(+i theta) sigma+
        y: i (exp(+i theta) sigma+ - exp(-i theta) sigma-)
    Both are Hermitian involutions for every theta.  At theta = 0 the x
    component coincides with the plain sigma_x embedding; the y component
    uses the raising/lowering sign convention of the detection basis, which
    differs from SIGMA_Y by an overall sign (harmless: only squares and
    variances feed the witnesses).
    """
    if not np.isfinite(theta):
        raise ValueError(f"phase must be finite, got {theta!r}")
    if not 1 <= j <= n_atoms:
        raise IndexError(f"atom index {j} out of range 1..{n_atoms}")
    phase = np.exp(1j * theta)
    if axis == "x":
        single = SIGMA_MINUS / phase + SIGMA_PLUS * phase
    elif axis == "y":
        single = 1j * (SIGMA_PLUS * phase - SIGMA_MINUS / phase)
    else:
        raise ValueError(f"phase_pauli axis must be 'x' or 'y', got {axis!r}")
    return Operator(_embed(single, j, n_atoms), n_atoms)


def expectation(op: Operator, state: State) -> complex:
    """<psi|O|psi> for kets, Tr(O rho) for density matrices."""
    if op.n_atoms != state.n_atoms:
        raise ValueError(
            f"operator on {op.n_atoms} atoms, state on {state.n_atoms}"
        )
    if isinstance(state, PureState):
        return complex(np.vdot(state.amplitudes, op.entries @ state.amplitudes))
    return complex(np.sum(op.entries * state.entries.T))


def product_state(bloch_angles: Sequence[tuple[float, float]]) -> PureState:
    """Tensor product of cos(t/2)|up> + e^{i phi} sin(t/2)|down> per site."""
    n = len(bloch_angles)
    check_atom_count(n)
    vec = np.array([1.0 + 0j])
    for theta, phi in bloch_angles:
        site = np.array(
            [np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)]
        )
        vec = np.kron(vec, site)
    vec /= np.linalg.norm(vec)
    return PureState(vec, n)


def antisymmetric_product_state(n_atoms: int) -> PureState:
    """|+ - + - ...>: alternating superposition states (|up> +/- |down>)/sqrt(2)."""
    angles = [(np.pi / 2.0, 0.0 if j % 2 == 0 else np.pi) for j in range(n_atoms)]
    return product_state(angles)


def ground_state(n_atoms: int) -> PureState:
    vec = np.zeros(dim(n_atoms), dtype=complex)
    vec[-1] = 1.0
    return PureState(vec, n_atoms)


def excited_state(n_atoms: int) -> PureState:
    vec = np.zeros(dim(n_atoms), dtype=complex)
    vec[0] = 1.0
    return PureState(vec, n_atoms)


def maximally_mixed(n_atoms: int) -> DensityMatrix:
    d = dim(n_atoms)
    return DensityMatrix(np.eye(d, dtype=complex) / d, n_atoms)


def three_atom_phase_state(phase: float) -> PureState:
    """(|up up down> + e^{i L}|down up up> + e^{2i L}|down down up>)/sqrt(3)."""
    vec = np.zeros(8, dtype=complex)
    vec[0b001] = 1.0
    vec[0b100] = np.exp(1j * phase)
    vec[0b110] = np.exp(2j * phase)
    vec /= np.sqrt(3.0)
    return PureState(vec, 3)


def collective_z(n_atoms: int) -> np.ndarray:
    """Diagonal of sum_j sigma_j^z: (#up - #down) per basis index."""
    check_atom_count(n_atoms)
    idx = np.arange(dim(n_atoms), dtype=np.uint64)
    popcount = np.zeros_like(idx, dtype=np.int64)
    for bit in range(n_atoms):
        popcount += ((idx >> np.uint64(bit)) & np.uint64(1)).astype(np.int64)
    return (n_atoms - 2 * popcount).astype(float)
