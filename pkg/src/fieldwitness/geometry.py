"""Emitter arrangements and observation directions.

Natural units throughout: lengths in 1/k (so k = 1) and times in 1/Gamma
(so Gamma = 1).  Chains run along x-hat and are centered on the origin;
the default dipole polarization is z-hat, perpendicular to both the chain
axis and the in-plane observation sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PackingError(RuntimeError):
    """Cloud sampling could not satisfy the minimum pair separation."""

    def __init__(self, attempts: int, n: int, radius: float, min_separation: float):
        self.attempts = attempts
        super().__init__(
            f"failed to pack {n} atoms in a ball of radius {radius} with "
            f"pair separation >= {min_separation} after {attempts} attempts"
        )


@dataclass
class AtomConfig:
    """Positions (units 1/k) and unit polarizations of the ensemble."""

    positions: np.ndarray
    polarizations: np.ndarray
    n_atoms: int

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        self.polarizations = np.atleast_2d(np.asarray(self.polarizations, dtype=float))
        if self.positions.shape != (self.n_atoms, 3):
            raise ValueError(f"positions shape {self.positions.shape} != ({self.n_atoms}, 3)")
        if self.polarizations.shape != (self.n_atoms, 3):
            raise ValueError(
                f"polarizations shape {self.polarizations.shape} != ({self.n_atoms}, 3)"
            )
        norms = np.linalg.norm(self.polarizations, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ValueError("polarization vectors must be unit norm within 1e-12")
        for j in range(self.n_atoms):
            for m in range(j + 1, self.n_atoms):
                if np.linalg.norm(self.positions[j] - self.positions[m]) == 0.0:
                    raise ValueError(f"atoms {j + 1} and {m + 1} coincide")

    def translated(self, offset) -> "AtomConfig":
        return AtomConfig(self.positions + np.asarray(offset, dtype=float),
                          self.polarizations.copy(), self.n_atoms)


@dataclass
class Direction:
    """Observation direction (unit k-hat, |k| = 1) plus a global quadrature
    rotation angle chi applied to the field quadratures."""

    khat: np.ndarray
    chi: float = 0.0

    def __post_init__(self):
        self.khat = np.asarray(self.khat, dtype=float)
        if self.khat.shape != (3,):
            raise ValueError(f"khat must be a 3-vector, got shape {self.khat.shape}")
        if abs(np.linalg.norm(self.khat) - 1.0) > 1e-12:
            raise ValueError("khat must be unit norm within 1e-12")
        self.chi = float(self.chi)

    def with_chi(self, chi: float) -> "Direction":
        return Direction(self.khat.copy(), chi)


def chain(n: int, spacing: float, polarization=(0.0, 0.0, 1.0)) -> AtomConfig:
    """Regular chain along x-hat, centered at the origin: x_j = (j - (N+1)/2) d."""
    if n < 1:
        raise ValueError(f"need at least one atom, got {n}")
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    pos = np.zeros((n, 3))
    pos[:, 0] = (np.arange(1, n + 1) - (n + 1) / 2.0) * spacing
    pol = np.tile(np.asarray(polarization, dtype=float), (n, 1))
    return AtomConfig(pos, pol, n)


def spherical_cloud(
    n: int,
    radius: float,
    rng_seed: int,
    min_separation: float = 0.05,
    polarization=(0.0, 0.0, 1.0),
    max_attempts: int = 10000,
) -> AtomConfig:
    """Uniform positions in a ball of the given radius, redrawn as a whole
    until every pair is at least min_separation apart.  Deterministic in the
    seed."""
    if n < 1:
        raise ValueError(f"need at least one atom, got {n}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(rng_seed)
    for attempt in range(1, max_attempts + 1):
        vecs = rng.normal(size=(n, 3))
        vecs /= np.linalg.norm(vecs, axis=1)[:, None]
        radii = radius * rng.random(n) ** (1.0 / 3.0)
        pos = vecs * radii[:, None]
        diffs = pos[:, None, :] - pos[None, :, :]
        dists = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(dists, np.inf)
        if n == 1 or dists.min() >= min_separation:
            pol = np.tile(np.asarray(polarization, dtype=float), (n, 1))
            return AtomConfig(pos, pol, n)
    raise PackingError(max_attempts, n, radius, min_separation)


def sphere_grid(n_theta: int, n_phi: int, chi: float = 0.0) -> list[Direction]:
    """Polar/azimuthal grid with midpoint polar angles, so poles never repeat."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError("grid counts must be >= 1")
    out = []
    for i in range(n_theta):
        theta = np.pi * (i + 0.5) / n_theta
        for j in range(n_phi):
            phi = 2.0 * np.pi * j / n_phi
            khat = np.array(
                [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
            )
            out.append(Direction(khat / np.linalg.norm(khat), chi))
    return out


def plane_sweep(n_angles: int, chi: float = 0.0) -> list[Direction]:
    """theta in [0, pi] in the xy-plane, khat = (cos theta, sin theta, 0).

    With n_angles = 20 m + 1 the grid lands exactly on theta = 0.45 pi.
    """
    if n_angles < 1:
        raise ValueError("need at least one angle")
    if n_angles == 1:
        thetas = np.array([0.0])
    else:
        thetas = np.linspace(0.0, np.pi, n_angles)
    out = []
    for theta in thetas:
        khat = np.array([np.cos(theta), np.sin(theta), 0.0])
        out.append(Direction(khat / np.linalg.norm(khat), chi))
    return out


def direction_grid(kind: str, **params) -> list[Direction]:
    """Dispatch: kind = "sphere" (n_theta, n_phi) or "plane_sweep" (n_angles)."""
    if kind == "sphere":
        return sphere_grid(**params)
    if kind == "plane_sweep":
        return plane_sweep(**params)
    raise ValueError(f"unknown direction grid kind {kind!r}")


def in_plane_angle(direction: Direction) -> float:
    """Label a direction by its sweep angle: atan2(k_y, k_x) for in-plane
    directions, the polar angle otherwise."""
    kx, ky, kz = direction.khat
    if abs(kz) < 1e-12:
        angle = np.arctan2(ky, kx)
        return float(angle if angle >= 0 else angle + 2.0 * np.pi)
    return float(np.arccos(np.clip(kz, -1.0, 1.0)))
