"""Free-space dipole-dipole couplings and exact Lindblad decay.

The master equation integrated here is

    drho/dt = sum_{j, m != j} i Delta_jm [sigma_j^+ sigma_m^-, rho]
              + sum_{j, m} Gamma_jm (sigma_j^- rho sigma_m^+
                                     - {sigma_m^+ sigma_j^-, rho} / 2)

with Delta and Gamma read off the free-space Green's tensor (k = 1,
hbar = 1).  Two decay-rate conventions are shipped:

  "literal":  Gamma_jj = 1/2, the self-term of the tensor as written,
              so a lone excited atom's population lives for 2/Gamma;
  "standard": the whole tensor is doubled, Gamma_jj = 1, and a lone
              excited population decays as exp(-Gamma t).

Ratios (superradiant enhancement, mode lifetimes) are identical in both.

The right-hand side is evaluated as -i(H_eff rho - rho H_eff^dag) plus the
recycling term; sigma^+- applications are index shuffles, never matmuls,
so one evaluation costs two dense products for H_eff and O(N^2 4^N) copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from .geometry import AtomConfig, Direction, in_plane_angle
from .qstate import DensityMatrix, SIGMA_MINUS, SIGMA_PLUS, check_atom_count, dim
from .witness import WitnessReport, witness_report

CONVENTIONS = ("standard", "literal")


class IntegrationError(RuntimeError):
    """Integrator breakdown: step underflow or positivity-floor breach."""


@dataclass
class GreensCouplings:
    """Coherent shifts delta (zero diagonal) and decay-rate matrix gamma."""

    delta: np.ndarray
    gamma: np.ndarray
    convention: str = "standard"

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.delta.shape != self.gamma.shape or self.delta.ndim != 2:
            raise ValueError("delta and gamma must be matching square matrices")

    @property
    def n_atoms(self) -> int:
        return self.gamma.shape[0]

    def validate(self) -> None:
        if np.abs(self.delta - self.delta.T).max() > 1e-10:
            raise ValueError("delta must be symmetric within 1e-10")
        if np.abs(np.diag(self.delta)).max() > 0.0:
            raise ValueError("delta diagonal must be zero")
        if np.abs(self.gamma - self.gamma.T).max() > 1e-10:
            raise ValueError("gamma must be symmetric")
        lam = np.linalg.eigvalsh(0.5 * (self.gamma + self.gamma.T))[0]
        if lam < -1e-9:
            raise ValueError(f"gamma minimum eigenvalue {lam:.3e} < -1e-9")


@dataclass
class Trajectory:
    """Sampled density matrices plus per-sample diagnostics."""

    times: np.ndarray
    states: list[DensityMatrix]
    trace_drift: np.ndarray
    min_eig: np.ndarray


def greens_tensor(r) -> np.ndarray:
    """Free-space propagator between two dipoles separated by r (units 1/k):

    G(r) = (3/4) e^{ix}/x^3 [(x^2 + ix - 1) I - (x^2 + 3ix - 3) rhat rhat^T]

    with x = |r|.  The r -> 0 limit of the imaginary part is (1/2) I,
    matching the self-term handled in couplings(); the zero vector itself
    is rejected.
    """
    r = np.asarray(r, dtype=float)
    x = np.linalg.norm(r)
    if x == 0.0:
        raise ValueError("Green's tensor is singular at r = 0; self-terms "
                         "are handled by couplings()")
    rhat = r / x
    proj = np.outer(rhat, rhat)
    pref = 0.75 * np.exp(1j * x) / x**3
    return pref * ((x**2 + 1j * x - 1.0) * np.eye(3)
                   - (x**2 + 3j * x - 3.0) * proj)


def couplings(config: AtomConfig, convention: str = "standard") -> GreensCouplings:
    """Delta_jm = -eps_j . Re G(r_jm) . eps_m and Gamma_jm = eps_j . Im G . eps_m,
    with the self-terms Gamma_jj from Im G(0) = (1/2) I and delta_jj = 0."""
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    n = config.n_atoms
    scale = 2.0 if convention == "standard" else 1.0
    delta = np.zeros((n, n))
    gamma = np.zeros((n, n))
    for j in range(n):
        gamma[j, j] = scale * 0.5
        for m in range(j + 1, n):
            g = greens_tensor(config.positions[j] - config.positions[m])
            ej, em = config.polarizations[j], config.polarizations[m]
            delta[j, m] = delta[m, j] = -scale * float(ej @ g.real @ em)
            gamma[j, m] = gamma[m, j] = scale * float(ej @ g.imag @ em)
    return GreensCouplings(delta, gamma, convention)


class _Liouvillian:
    """Precomputed dense H_eff (non-Hermitian) plus the recycling map
    sum_jm Gamma_jm sigma_j^- rho sigma_m^+, organized per target atom m as
    a sparse collective lowering followed by a column shuffle."""

    def __init__(self, c: GreensCouplings, n_atoms: int):
        from scipy.sparse import csr_matrix

        check_atom_count(n_atoms)
        if c.n_atoms != n_atoms:
            raise ValueError(f"couplings for {c.n_atoms} atoms, state has {n_atoms}")
        self.n = n_atoms
        d = dim(n_atoms)
        eye = np.eye(2, dtype=complex)
        pm = SIGMA_PLUS @ SIGMA_MINUS  # |up><up|

        def site_product(singles: dict[int, np.ndarray]) -> np.ndarray:
            factors = [singles.get(site, eye) for site in range(1, n_atoms + 1)]
            term = factors[0]
            for f in factors[1:]:
                term = np.kron(term, f)
            return term

        heff = np.zeros((d, d), dtype=complex)
        for j in range(1, n_atoms + 1):
            for m in range(1, n_atoms + 1):
                coeff = -c.delta[j - 1, m - 1] - 0.5j * c.gamma[j - 1, m - 1]
                if coeff == 0.0:
                    continue
                if j == m:
                    heff += coeff * site_product({j: pm})
                else:
                    heff += coeff * site_product({j: SIGMA_PLUS, m: SIGMA_MINUS})
        self.heff = heff
        self.heff_dag = heff.conj().T.copy()

        lowers = [site_product({j: SIGMA_MINUS}) for j in range(1, n_atoms + 1)]
        self.collective_lowers = []
        for m in range(n_atoms):
            a_m = np.zeros((d, d), dtype=complex)
            for j in range(n_atoms):
                a_m += c.gamma[j, m] * lowers[j]
            self.collective_lowers.append(csr_matrix(a_m))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = self.heff @ rho
        out -= rho @ self.heff_dag
        out *= -1j
        for m in range(1, self.n + 1):
            u = self.collective_lowers[m - 1] @ rho
            d_post = 1 << (self.n - m)
            out.reshape(-1, 2, d_post)[:, 1, :] += u.reshape(-1, 2, d_post)[:, 0, :]
        return out


def lindblad_rhs(rho: DensityMatrix, c: GreensCouplings) -> np.ndarray:
    """drho/dt for one state; traceless and Hermiticity-preserving."""
    return _Liouvillian(c, rho.n_atoms).apply(rho.entries)


def integrate(
    rho0: DensityMatrix,
    c: GreensCouplings,
    t_grid,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> Trajectory:
    """Adaptive RK5(4) evolution sampled on t_grid.

    The accepted state is re-symmetrized ((rho + rho^dag)/2) after every
    step; the trace is never renormalized, its drift is reported as a
    diagnostic.  A sampled minimum eigenvalue below -1e-6 aborts.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a nonempty 1-d array")
    if np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly increasing")
    n = rho0.n_atoms
    d = dim(n)
    liou = _Liouvillian(c, n)

    def rhs_flat(_t, y):
        return liou.apply(y.reshape(d, d)).ravel()

    times, states, drifts, floors = [], [], [], []

    def take_sample(t: float, mat: np.ndarray) -> None:
        mat = 0.5 * (mat + mat.conj().T)
        dm = DensityMatrix(mat, n)
        lam = dm.min_eigenvalue()
        if lam < -1e-6:
            raise IntegrationError(
                f"minimum eigenvalue {lam:.3e} below -1e-6 at t = {t:.6g} "
                f"(trace drift {abs(mat.trace() - 1.0):.3e})"
            )
        times.append(t)
        states.append(dm)
        drifts.append(abs(mat.trace() - 1.0))
        floors.append(lam)

    take_sample(t_grid[0], rho0.entries.copy())
    if t_grid.size > 1:
        solver = RK45(rhs_flat, t_grid[0], rho0.entries.ravel(),
                      t_bound=t_grid[-1], rtol=rtol, atol=atol)
        next_idx = 1
        while next_idx < t_grid.size:
            if solver.status != "running":
                raise IntegrationError(
                    f"integrator stopped ({solver.status}) at t = {solver.t:.6g} "
                    f"before reaching the sample grid end"
                )
            message = solver.step()
            if solver.status == "failed":
                raise IntegrationError(
                    f"step-size underflow at t = {solver.t:.6g}: {message}"
                )
            ymat = solver.y.reshape(d, d)
            solver.y = (0.5 * (ymat + ymat.conj().T)).ravel()
            interp = solver.dense_output()
            while next_idx < t_grid.size and t_grid[next_idx] <= solver.t + 1e-12:
                take_sample(t_grid[next_idx],
                            interp(t_grid[next_idx]).reshape(d, d))
                next_idx += 1
    return Trajectory(
        times=np.array(times),
        states=states,
        trace_drift=np.array(drifts),
        min_eig=np.array(floors),
    )


def excited_population(state: DensityMatrix) -> float:
    """sum_j <sigma_j^+ sigma_j^-> = (N + <Z>)/2."""
    from .qstate import collective_z

    zdiag = collective_z(state.n_atoms)
    mean_z = float(np.real(zdiag @ np.diag(state.entries)))
    return 0.5 * (state.n_atoms + mean_z)


def witness_reports_series(
    traj: Trajectory, config: AtomConfig, directions: list[Direction]
) -> list[list[WitnessReport]]:
    """reports[s][d]: witness report at sample s, direction d.

    Quadrature operators and their squares are built once per direction and
    contracted against every sampled state in one pass.
    """
    from .field import OperatorMoments, optical_phases
    from .qstate import collective_z, pauli_embed

    n = config.n_atoms
    d = dim(n)
    n_samp = len(traj.states)
    stacked = np.stack([dm.entries for dm in traj.states])          # (S, D, D)
    rho_t_flat = stacked.transpose(0, 2, 1).reshape(n_samp, d * d)  # rows: rho^T
    rho_diag = stacked.diagonal(axis1=1, axis2=2).real              # (S, D)
    zdiag = collective_z(n)
    mean_z = rho_diag @ zdiag
    second_z = rho_diag @ zdiag**2

    plus_ops = [pauli_embed(j, "plus", n).entries for j in range(1, n + 1)]
    reports: list[list[WitnessReport]] = [[] for _ in range(n_samp)]
    for direction in directions:
        phases = optical_phases(config, direction) + direction.chi
        e_plus = np.zeros((d, d), dtype=complex)
        for j in range(n):
            e_plus += np.exp(1j * phases[j]) * plus_ops[j]
        x = e_plus + e_plus.conj().T
        y = 1j * (e_plus - e_plus.conj().T)
        ops = np.stack([x, x @ x, y, y @ y]).reshape(4, d * d)
        vals = (rho_t_flat @ ops.T).real                            # (S, 4)
        for s in range(n_samp):
            m = OperatorMoments(
                mean_x=float(vals[s, 0]), mean_y=float(vals[s, 2]),
                mean_z=float(mean_z[s]),
                second_x=float(vals[s, 1]), second_y=float(vals[s, 3]),
                second_z=float(second_z[s]),
                n_atoms=n, direction=direction,
            )
            reports[s].append(witness_report(m))
    return reports


def witness_min_series(
    traj: Trajectory, config: AtomConfig, directions: list[Direction]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample minimum of W over the direction list and the sweep angle
    of the minimizing direction."""
    reports = witness_reports_series(traj, config, directions)
    w_min = np.empty(len(reports))
    theta_argmin = np.empty(len(reports))
    for s, row in enumerate(reports):
        idx = int(np.argmin([r.w_min for r in row]))
        w_min[s] = row[idx].w_min
        theta_argmin[s] = in_plane_angle(directions[idx])
    return w_min, theta_argmin


def first_crossing(times, values, threshold: float) -> float | None:
    """Earliest (linearly interpolated) time at which values drops below
    threshold; None if it never does."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    below = np.nonzero(values < threshold)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(times[0])
    t0, t1 = times[i - 1], times[i]
    v0, v1 = values[i - 1], values[i]
    return float(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))


def detect_t_ent(
    traj: Trajectory,
    config: AtomConfig,
    directions: list[Direction],
    epsilon: float,
) -> float | None:
    """First time the direction-minimized witness drops below -epsilon."""
    if not traj.states:
        raise ValueError("empty trajectory")
    w_min, _ = witness_min_series(traj, config, directions)
    return first_crossing(traj.times, w_min, -epsilon)
