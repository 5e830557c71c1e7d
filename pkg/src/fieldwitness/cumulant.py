"""Second-order cumulant dynamics for large ensembles.

Tracked set: <sigma_j^+>, <sigma_j^z> plus the distinct-site correlators
<s+ s->, <s+ s+>, <sz sz>, <sz s+> (conjugate blocks implicit).  Same-site
products are reduced by Pauli algebra before anything else, and every
three-point moment <ABC> on distinct sites is closed as

    <AB><C> + <AC><B> + <BC><A> - 2 <A><B><C>,

which is exact for product states and leaves the two-atom hierarchy
complete (no closure error at N = 2).

Equations of motion, with G_ab = Gamma_ab / 2 + i Delta_ab and the pair
blocks written PM[a,b] = <s_a^+ s_b^->, PP = <s+ s+>, ZZ = <sz sz>,
ZP[a,b] = <s_a^z s_b^+> (a != b, sums over t excluding a and b):

  d<s_a^+> = -G_aa <s_a^+> + sum_t G_at <s_a^z s_t^+>
  d<s_a^z> = -Gamma_aa (1 + <s_a^z>) - 4 sum_t Re(conj(G_at) PM[a,t])
  dPM[a,b] = -(G_aa + G_bb) PM
             + Gamma_ab (z_a + z_b + 2 ZZ[a,b]) / 4
             + i Delta_ab (z_a - z_b) / 2
             + sum_t [ G_at <Z_a P_t M_b> + conj(G_bt) <Z_b P_a M_t> ]
  dPP[a,b] = -(G_aa + G_bb) PP
             + sum_t [ G_at <Z_a P_t P_b> + G_bt <Z_b P_t P_a> ]
  dZZ[a,b] = -Gamma_aa (z_b + ZZ) - Gamma_bb (z_a + ZZ) + 4 Gamma_ab Re PM[a,b]
             - 4 sum_t Re[ conj(G_at) <P_a Z_b M_t> + conj(G_bt) <P_b Z_a M_t> ]
  dZP[a,b] = -Gamma_aa (s_b + ZP) - Gamma_bb ZP / 2
             - Gamma_ab (s_a + 2 ZP[b,a]) / 2 + i Delta_ab s_a
             + sum_t [ G_bt <Z_a Z_b P_t> - 2 G_at <P_t M_a P_b>
                       - 2 conj(G_at) <P_a P_b M_t> ]

(in the first line G_aa = Gamma_aa / 2).  The exactness of these at N = 2
and for product-state initial slopes is pinned by tests against the dense
solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import GreensCouplings, IntegrationError
from .field import OperatorMoments, optical_phases
from .geometry import AtomConfig, Direction


class ClosureBlowupError(IntegrationError):
    """Correlators left the physical range: the closure has broken down."""


@dataclass
class CumulantState:
    """One- and two-point correlators; pair-block diagonals are unused and
    kept at zero (same-site products reduce by Pauli algebra)."""

    s_plus: np.ndarray
    s_z: np.ndarray
    c_pm: np.ndarray
    c_pp: np.ndarray
    c_zz: np.ndarray
    c_zp: np.ndarray

    def __post_init__(self):
        n = len(self.s_plus)
        self.s_plus = np.asarray(self.s_plus, dtype=complex)
        self.s_z = np.asarray(self.s_z, dtype=float)
        for name in ("c_pm", "c_pp", "c_zz", "c_zp"):
            block = np.asarray(getattr(self, name), dtype=complex)
            if block.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {block.shape}")
            setattr(self, name, block)

    @property
    def n_atoms(self) -> int:
        return len(self.s_plus)

    def max_correlator(self) -> float:
        return max(
            np.abs(self.c_pm).max(), np.abs(self.c_pp).max(),
            np.abs(self.c_zz).max(), np.abs(self.c_zp).max(),
        )


def init_from_product(bloch_angles: Sequence[tuple[float, float]]) -> CumulantState:
    """Correlators of a product state: first moments from each Bloch vector,
    two-point blocks factorized exactly."""
    theta = np.array([t for t, _ in bloch_angles], dtype=float)
    phi = np.array([p for _, p in bloch_angles], dtype=float)
    s = 0.5 * np.sin(theta) * np.exp(1j * phi)
    z = np.cos(theta)
    cs = s.conj()
    c_pm = np.outer(s, cs)
    c_pp = np.outer(s, s)
    c_zz = np.outer(z, z).astype(complex)
    c_zp = np.outer(z, s)
    for block in (c_pm, c_pp, c_zz, c_zp):
        np.fill_diagonal(block, 0.0)
    return CumulantState(s, z, c_pm, c_pp, c_zz.real, c_zp)


def antisymmetric_angles(n: int) -> list[tuple[float, float]]:
    """Bloch angles of |+ - + - ...>."""
    return [(np.pi / 2.0, 0.0 if j % 2 == 0 else np.pi) for j in range(n)]


def cumulant_rhs(state: CumulantState, c: GreensCouplings) -> CumulantState:
    """Closed equations of motion (vectorized; see module docstring)."""
    n = state.n_atoms
    if c.n_atoms != n:
        raise ValueError(f"couplings for {c.n_atoms} atoms, state has {n}")
    s, z = state.s_plus, state.s_z
    cs = s.conj()
    pm, pp, zz, zp = state.c_pm, state.c_pp, state.c_zz.real, state.c_zp

    gd = np.diag(c.gamma).copy()
    g_off = 0.5 * c.gamma + 1j * c.delta
    np.fill_diagonal(g_off, 0.0)
    gamma_off = c.gamma.copy()
    np.fill_diagonal(gamma_off, 0.0)
    delta_off = c.delta.copy()
    np.fill_diagonal(delta_off, 0.0)

    # shared contractions over the third site (Goff's zero diagonal removes
    # t = a automatically; the t = b summand is subtracted explicitly)
    a_zp = (g_off * zp).sum(axis=1)            # sum_t G_at ZP[a,t]
    b_s = g_off @ s                            # sum_t G_at s_t
    e_pm = (g_off.conj() * pm).sum(axis=1)     # sum_t conj(G_at) PM[a,t]
    d_pm = (g_off * pm.T).sum(axis=1)          # sum_t G_at PM[t,a]
    g_pm = g_off @ pm                          # sum_t G_at PM[t,b]
    g_pp = g_off @ pp
    q_zp = zp @ g_off                          # sum_t ZP[a,t] G_tb
    r_pm = pm @ g_off.conj()                   # sum_t PM[a,t] conj(G_tb)

    col = lambda v: v[:, None]
    row = lambda v: v[None, :]

    ds = -0.5 * gd * s + a_zp
    dz = -gd * (1.0 + z) - 4.0 * e_pm.real

    # --- PM block -----------------------------------------------------------
    full1 = (col(a_zp) * row(cs) + zp.conj() * col(b_s) + col(z) * g_pm
             - 2.0 * col(z) * col(b_s) * row(cs))
    corr1 = g_off * (zp * row(cs) + zp.conj() * row(s)
                     - 2.0 * col(z) * row(s) * row(cs))
    full2 = (zp.T * row(b_s.conj()) + row(z) * r_pm + col(s) * row(a_zp.conj())
             - 2.0 * row(z) * col(s) * row(b_s.conj()))
    corr2 = g_off.conj() * (zp.T * col(cs) + zp.conj().T * col(s)
                            - 2.0 * row(z) * col(s) * col(cs))
    dpm = (-0.5 * (col(gd) + row(gd)) * pm
           + 0.25 * gamma_off * (col(z) + row(z) + 2.0 * zz)
           + 0.5j * delta_off * (col(z) - row(z))
           + (full1 - corr1) + (full2 - corr2))

    # --- PP block -----------------------------------------------------------
    full_f = (col(a_zp) * row(s) + zp * col(b_s) + col(z) * g_pp
              - 2.0 * col(z) * col(b_s) * row(s))
    corr_f = g_off * (2.0 * zp * row(s) - 2.0 * col(z) * row(s) ** 2)
    f = full_f - corr_f
    dpp = -0.5 * (col(gd) + row(gd)) * pp + f + f.T

    # --- ZZ block -----------------------------------------------------------
    full_f1 = (zp.T * col(b_s.conj()) + row(z) * col(e_pm) + col(s) * q_zp.conj().T
               - 2.0 * col(s) * row(z) * col(b_s.conj()))
    corr_f1 = g_off.conj() * (zp.T * row(cs) + pm * row(z)
                              - 2.0 * col(s) * row(z) * row(cs))
    f1 = full_f1 - corr_f1
    dzz = (-col(gd) * (row(z) + zz) - row(gd) * (col(z) + zz)
           + 4.0 * gamma_off * pm.real
           - 4.0 * (f1 + f1.T).real)

    # --- ZP block -----------------------------------------------------------
    t1_full = (zz * row(b_s) + row(z) * q_zp + col(z) * row(a_zp)
               - 2.0 * col(z) * row(z) * row(b_s))
    t1_corr = g_off * (zz * col(s) + zp.T * col(z)
                       - 2.0 * col(z) * row(z) * col(s))
    t2_full = (col(d_pm) * row(s) + col(cs) * g_pp + pm.T * col(b_s)
               - 2.0 * col(b_s) * col(cs) * row(s))
    t2_corr = g_off * (2.0 * pm.T * row(s) - 2.0 * col(cs) * row(s) ** 2)
    t3_full = (pp * col(b_s.conj()) + row(s) * col(e_pm) + col(s) * r_pm.T
               - 2.0 * col(s) * row(s) * col(b_s.conj()))
    t3_corr = g_off.conj() * (pp * row(cs) + pm * row(s)
                              - 2.0 * col(s) * row(s) * row(cs))
    dzp = (-col(gd) * (row(s) + zp) - 0.5 * row(gd) * zp
           - 0.5 * gamma_off * (col(s) + 2.0 * zp.T) + 1j * delta_off * col(s)
           + (t1_full - t1_corr) - 2.0 * (t2_full - t2_corr)
           - 2.0 * (t3_full - t3_corr))

    for block in (dpm, dpp, dzz, dzp):
        np.fill_diagonal(block, 0.0)
    return CumulantState(ds, dz.real, dpm, dpp, dzz.real, dzp)


def _t3(pair_ab, pair_ac, pair_bc, one_a, one_b, one_c):
    """<AB><C> + <AC><B> + <BC><A> - 2<A><B><C> on distinct sites."""
    return (pair_ab * one_c + pair_ac * one_b + pair_bc * one_a
            - 2.0 * one_a * one_b * one_c)


def cumulant_rhs_reference(state: CumulantState, c: GreensCouplings) -> CumulantState:
    """Plain-loop transcription of the same equations; used to pin the
    vectorized path in tests."""
    n = state.n_atoms
    s, z = state.s_plus, state.s_z
    cs = s.conj()
    pm, pp, zz, zp = state.c_pm, state.c_pp, state.c_zz.real, state.c_zp
    zm = zp.conj()
    gd = np.diag(c.gamma)
    g = 0.5 * c.gamma + 1j * c.delta

    ds = np.zeros(n, dtype=complex)
    dz = np.zeros(n)
    dpm = np.zeros((n, n), dtype=complex)
    dpp = np.zeros((n, n), dtype=complex)
    dzz = np.zeros((n, n))
    dzp = np.zeros((n, n), dtype=complex)

    for a in range(n):
        ds[a] = -0.5 * gd[a] * s[a]
        dz[a] = -gd[a] * (1.0 + z[a])
        for t in range(n):
            if t == a:
                continue
            ds[a] += g[a, t] * zp[a, t]
            dz[a] += -4.0 * (np.conj(g[a, t]) * pm[a, t]).real

    for a in range(n):
        for b in range(n):
            if b == a:
                continue
            dpm[a, b] = (-0.5 * (gd[a] + gd[b]) * pm[a, b]
                         + 0.25 * c.gamma[a, b] * (z[a] + z[b] + 2.0 * zz[a, b])
                         + 0.5j * c.delta[a, b] * (z[a] - z[b]))
            dpp[a, b] = -0.5 * (gd[a] + gd[b]) * pp[a, b]
            dzz[a, b] = (-gd[a] * (z[b] + zz[a, b]) - gd[b] * (z[a] + zz[a, b])
                         + 4.0 * c.gamma[a, b] * pm[a, b].real)
            dzp[a, b] = (-gd[a] * (s[b] + zp[a, b]) - 0.5 * gd[b] * zp[a, b]
                         - 0.5 * c.gamma[a, b] * (s[a] + 2.0 * zp[b, a])
                         + 1j * c.delta[a, b] * s[a])
            for t in range(n):
                if t == a or t == b:
                    continue
                zptm = _t3(zp[a, t], zm[a, b], pm[t, b], z[a], s[t], cs[b])
                zpam = _t3(zp[b, a], zm[b, t], pm[a, t], z[b], s[a], cs[t])
                dpm[a, b] += g[a, t] * zptm + np.conj(g[b, t]) * zpam

                zptp_a = _t3(zp[a, t], zp[a, b], pp[t, b], z[a], s[t], s[b])
                zptp_b = _t3(zp[b, t], zp[b, a], pp[t, a], z[b], s[t], s[a])
                dpp[a, b] += g[a, t] * zptp_a + g[b, t] * zptp_b

                pazm = _t3(zp[b, a], pm[a, t], zm[b, t], s[a], z[b], cs[t])
                pbzm = _t3(zp[a, b], pm[b, t], zm[a, t], s[b], z[a], cs[t])
                dzz[a, b] += -4.0 * (np.conj(g[a, t]) * pazm
                                     + np.conj(g[b, t]) * pbzm).real

                zzp = _t3(zz[a, b], zp[a, t], zp[b, t], z[a], z[b], s[t])
                pmp = _t3(pm[t, a], pp[t, b], pm[b, a], s[t], cs[a], s[b])
                ppm = _t3(pp[a, b], pm[a, t], pm[b, t], s[a], s[b], cs[t])
                dzp[a, b] += (g[b, t] * zzp - 2.0 * g[a, t] * pmp
                              - 2.0 * np.conj(g[a, t]) * ppm)

    return CumulantState(ds, dz, dpm, dpp, dzz, dzp)


def _pack(state: CumulantState) -> np.ndarray:
    n = state.n_atoms
    return np.concatenate([
        state.s_plus, state.s_z.astype(complex),
        state.c_pm.ravel(), state.c_pp.ravel(),
        state.c_zz.astype(complex).ravel(), state.c_zp.ravel(),
    ])


def _unpack(y: np.ndarray, n: int) -> CumulantState:
    blocks = np.split(y, [n, 2 * n, 2 * n + n * n, 2 * n + 2 * n * n,
                          2 * n + 3 * n * n])
    return CumulantState(
        blocks[0], blocks[1].real,
        blocks[2].reshape(n, n), blocks[3].reshape(n, n),
        blocks[4].real.reshape(n, n), blocks[5].reshape(n, n),
    )


def integrate_cumulant(
    state0: CumulantState,
    c: GreensCouplings,
    t_grid,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    blowup_limit: float = 10.0,
) -> list[CumulantState]:
    """Adaptive RK5(4) flow of the closed moment set, sampled on t_grid.

    No positivity repair is applied; a correlator magnitude beyond
    blowup_limit raises ClosureBlowupError so closure failure stays visible.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise ValueError("t_grid must contain at least start and end times")
    if np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly increasing")
    n = state0.n_atoms

    def rhs(_t, y):
        return _pack(cumulant_rhs(_unpack(y, n), c))

    sol = solve_ivp(
        rhs, (t_grid[0], t_grid[-1]), _pack(state0),
        method="RK45", t_eval=t_grid, rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise ClosureBlowupError(f"cumulant integration failed: {sol.message}")
    out = []
    for i, t in enumerate(t_grid):
        st = _unpack(sol.y[:, i], n)
        peak = st.max_correlator()
        if peak > blowup_limit:
            raise ClosureBlowupError(
                f"correlator magnitude {peak:.3g} exceeds {blowup_limit} "
                f"at t = {t:.6g}"
            )
        out.append(st)
    return out


def cumulant_detection_time(
    state0: CumulantState,
    c: GreensCouplings,
    config: AtomConfig,
    direction: Direction,
    epsilon: float,
    t_max: float,
    n_samples: int = 401,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    blowup_limit: float = 10.0,
) -> tuple[float | None, str]:
    """First time the witness at one observation direction drops below
    -epsilon along the cumulant flow, integrating only as far as needed.

    Returns (t_ent, "detected"), (None, "none") when the flow stays above
    threshold through t_max, or (None, "blowup") when the closure fails
    before any detection.  Stopping at the crossing matters twice over:
    strongly coupled ensembles can detect early and blow up later (the
    breakdown must not mask the detection), and near-field witnesses dive
    so steeply from the product-state boundary that the crossing needs
    bracket refinement well below the sample spacing to be ordered
    meaningfully.
    """
    from scipy.integrate import RK45

    from .witness import witness_report

    n = state0.n_atoms
    t_grid = np.linspace(0.0, float(t_max), n_samples)
    split = 2 * n  # first moments | correlator blocks in the packed vector

    def rhs(_t, y):
        return _pack(cumulant_rhs(_unpack(y, n), c))

    def w_min(state: CumulantState) -> float:
        return witness_report(moments_from_cumulant(state, config, direction)).w_min

    prev_t, prev_w = 0.0, w_min(state0)
    if prev_w < -epsilon:
        return 0.0, "detected"
    solver = RK45(rhs, 0.0, _pack(state0), t_bound=t_grid[-1],
                  rtol=rtol, atol=atol)
    bracket = None
    next_idx = 1
    while next_idx < t_grid.size:
        if solver.status != "running":
            return None, "blowup"
        solver.step()
        if solver.status == "failed":
            return None, "blowup"
        if np.abs(solver.y[split:]).max() > blowup_limit:
            return None, "blowup"
        interp = solver.dense_output()
        while next_idx < t_grid.size and t_grid[next_idx] <= solver.t + 1e-12:
            t = t_grid[next_idx]
            w = w_min(_unpack(interp(t), n))
            if w < -epsilon:
                bracket = (prev_t, prev_w, t, w)
                break
            prev_t, prev_w = t, w
            next_idx += 1
        if bracket is not None:
            break
    if bracket is None:
        return None, "none"

    # refine the crossing bracket by re-scanning from t = 0 on finer grids;
    # once the bracket is narrow the witness is linear across it
    lo, w_lo, hi, w_hi = bracket
    for _ in range(6):
        if hi - lo <= max(1e-10, 1e-4 * hi):
            break
        pts = np.linspace(lo, hi, 33)
        grid = np.unique(np.concatenate([[0.0], pts]))
        flow = integrate_cumulant(state0, c, grid, rtol=rtol, atol=atol,
                                  blowup_limit=blowup_limit)
        values = {t: w_min(st) for t, st in zip(grid, flow)}
        refined = False
        for a, b in zip(pts[:-1], pts[1:]):
            if values[a] >= -epsilon > values[b]:
                lo, w_lo, hi, w_hi = a, values[a], b, values[b]
                refined = True
                break
        if not refined:
            break
    t_cross = lo + (-epsilon - w_lo) * (hi - lo) / (w_hi - w_lo)
    return float(t_cross), "detected"


def moments_from_cumulant(
    state: CumulantState, config: AtomConfig, direction: Direction
) -> OperatorMoments:
    """Witness moments assembled from the tracked correlators in O(N^2)."""
    n = state.n_atoms
    if config.n_atoms != n:
        raise ValueError(f"geometry has {config.n_atoms} atoms, state {n}")
    phases = optical_phases(config, direction) + direction.chi
    u = np.exp(1j * phases)
    w = u * state.s_plus
    mean_x = 2.0 * w.real.sum()
    mean_y = -2.0 * w.imag.sum()
    mean_z = state.s_z.sum()
    pp_term = np.einsum("j,jk,k->", u, state.c_pp, u)
    pm_term = np.einsum("j,jk,k->", u, state.c_pm, u.conj())
    second_x = n + 2.0 * pp_term.real + 2.0 * pm_term.real
    second_y = n - 2.0 * pp_term.real + 2.0 * pm_term.real
    second_z = n + state.c_zz.real.sum()
    return OperatorMoments(
        mean_x=float(mean_x), mean_y=float(mean_y), mean_z=float(mean_z),
        second_x=float(second_x), second_y=float(second_y),
        second_z=float(second_z), n_atoms=n, direction=direction,
    )
