"""Pairwise Wootters concurrence and its ensemble average."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qstate import PureState, State

_YY = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ],
    dtype=complex,
)  # sigma_y (x) sigma_y


@dataclass
class PairReduction:
    """Two-qubit reduced density matrix for one ordered atom pair."""

    rho_pair: np.ndarray
    pair: tuple[int, int]

    def __post_init__(self):
        self.rho_pair = np.asarray(self.rho_pair, dtype=complex)
        if self.rho_pair.shape != (4, 4):
            raise ValueError(f"pair reduction must be 4x4, got {self.rho_pair.shape}")

    def validate(self, tol: float = 1e-9) -> None:
        if np.abs(self.rho_pair - self.rho_pair.conj().T).max() > tol:
            raise ValueError("pair reduction not Hermitian")
        if abs(self.rho_pair.trace() - 1.0) > tol:
            raise ValueError("pair reduction trace != 1")
        if np.linalg.eigvalsh(self.rho_pair)[0] < -tol:
            raise ValueError("pair reduction not positive semidefinite")


def _trace_out_site(tensor: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Trace one site (0-based) out of a (2^n x 2^n) matrix."""
    d_pre = 1 << site
    d_post = 1 << (n_sites - site - 1)
    t = tensor.reshape(d_pre, 2, d_post, d_pre, 2, d_post)
    return (t[:, 0, :, :, 0, :] + t[:, 1, :, :, 1, :]).reshape(
        d_pre * d_post, d_pre * d_post
    )


def reduce_pair(state: State, j: int, s: int) -> PairReduction:
    """Partial trace onto atoms (j, s), 1-based, presented in that order."""
    n = state.n_atoms
    if j == s:
        raise IndexError("pair indices must differ")
    for idx in (j, s):
        if not 1 <= idx <= n:
            raise IndexError(f"atom index {idx} out of range 1..{n}")
    if isinstance(state, PureState):
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    else:
        rho = state.entries
    keep = sorted((j - 1, s - 1))
    remaining = list(range(n))
    for site in reversed(range(n)):
        if site in keep:
            continue
        pos = remaining.index(site)
        rho = _trace_out_site(rho, pos, len(remaining))
        remaining.remove(site)
    if (j - 1, s - 1) != tuple(keep):  # caller asked for the swapped order
        rho = rho.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    return PairReduction(rho, (j, s))


def wootters_concurrence(p: PairReduction) -> float:
    """C = max(0, l1 - l2 - l3 - l4), the l_i being the decreasing square
    roots of the eigenvalues of rho (Y x Y) rho* (Y x Y)."""
    rho = p.rho_pair
    rho_tilde = _YY @ rho.conj() @ _YY
    lam = np.linalg.eigvals(rho @ rho_tilde).real
    lam = np.sqrt(np.clip(lam, 0.0, None))
    lam.sort()
    c = lam[-1] - lam[:-1].sum()
    return float(np.clip(c, 0.0, 1.0))


def global_concurrence(state: State, n_atoms: int | None = None) -> float:
    """Average pairwise concurrence over all (unordered) atom pairs."""
    n = state.n_atoms if n_atoms is None else n_atoms
    if n < 2:
        raise ValueError("global concurrence needs at least two atoms")
    total = 0.0
    for j in range(1, n + 1):
        for s in range(j + 1, n + 1):
            total += wootters_concurrence(reduce_pair(state, j, s))
    return total / (n * (n - 1) / 2.0)
