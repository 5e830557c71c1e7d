"""Brute-force oracles shared by the test modules.

Everything here goes through the dense 2^N machinery and deliberately
avoids the code paths it is used to check.
"""

import numpy as np

from fieldwitness.cumulant import CumulantState
from fieldwitness.dynamics import GreensCouplings, lindblad_rhs
from fieldwitness.qstate import DensityMatrix, pauli_embed


def _tracked_operators(n):
    plus = [pauli_embed(j, "plus", n).entries for j in range(1, n + 1)]
    minus = [pauli_embed(j, "minus", n).entries for j in range(1, n + 1)]
    z = [pauli_embed(j, "z", n).entries for j in range(1, n + 1)]
    return plus, minus, z


def cumulant_from_density(dm: DensityMatrix) -> CumulantState:
    """Exact tracked moments of a dense state."""
    n = dm.n_atoms
    rho = dm.entries
    plus, minus, z = _tracked_operators(n)
    tr = lambda op: complex(np.sum(op * rho.T))
    s = np.array([tr(plus[a]) for a in range(n)])
    sz = np.array([tr(z[a]).real for a in range(n)])
    pm = np.zeros((n, n), dtype=complex)
    pp = np.zeros((n, n), dtype=complex)
    zz = np.zeros((n, n))
    zp = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            pm[a, b] = tr(plus[a] @ minus[b])
            pp[a, b] = tr(plus[a] @ plus[b])
            zz[a, b] = tr(z[a] @ z[b]).real
            zp[a, b] = tr(z[a] @ plus[b])
    return CumulantState(s, sz, pm, pp, zz, zp)


def cumulant_derivatives_from_density(
    dm: DensityMatrix, c: GreensCouplings
) -> CumulantState:
    """Exact Ehrenfest derivatives d<O>/dt = Tr(O drho/dt) of the tracked set.

    DensityMatrix construction checks shape only, so wrapping the (traceless)
    derivative matrix is fine here.
    """
    drho = lindblad_rhs(dm, c)
    return cumulant_from_density(DensityMatrix(drho, dm.n_atoms))


def max_block_deviation(a: CumulantState, b: CumulantState) -> float:
    return max(
        np.abs(a.s_plus - b.s_plus).max(),
        np.abs(a.s_z - b.s_z).max(),
        np.abs(a.c_pm - b.c_pm).max(),
        np.abs(a.c_pp - b.c_pp).max(),
        np.abs(a.c_zz - b.c_zz).max(),
        np.abs(a.c_zp - b.c_zp).max(),
    )
