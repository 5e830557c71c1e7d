"""Randomized separable states and the fuzz harness certifying the witness
bounds empirically.

Every separable state is a convex mixture of product states, so sampling
Dirichlet weights over Haar-random product terms and confirming that no
witness ever goes below -1e-9 exercises the separability bounds directly.
A deliberately entangled Bell control can be injected to prove the harness
would catch a violation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .field import moments
from .geometry import AtomConfig, Direction, chain, spherical_cloud
from .qstate import DensityMatrix, check_atom_count, dim, product_state
from .witness import witness_report


@dataclass
class SeparableSpec:
    """Mixture weights and per-term, per-atom Bloch angles."""

    n_atoms: int
    weights: np.ndarray
    bloch_angles: np.ndarray  # (n_terms, n_atoms, 2)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bloch_angles = np.asarray(self.bloch_angles, dtype=float)
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ValueError("need at least one mixture term")
        if np.any(self.weights < 0.0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a probability vector within 1e-12")
        expected = (self.weights.size, self.n_atoms, 2)
        if self.bloch_angles.shape != expected:
            raise ValueError(
                f"bloch_angles shape {self.bloch_angles.shape} != {expected}"
            )

    @property
    def n_terms(self) -> int:
        return self.weights.size


def separable_density(spec: SeparableSpec) -> DensityMatrix:
    """Assemble sum_l p_l |prod_l><prod_l| exactly."""
    d = dim(spec.n_atoms)
    rho = np.zeros((d, d), dtype=complex)
    for p, angles in zip(spec.weights, spec.bloch_angles):
        vec = product_state([tuple(a) for a in angles]).amplitudes
        rho += p * np.outer(vec, vec.conj())
    return DensityMatrix(rho, spec.n_atoms)


def random_separable(
    n_atoms: int, n_terms: int, rng_seed
) -> tuple[SeparableSpec, DensityMatrix]:
    """Symmetric-Dirichlet weights over Haar-uniform product terms."""
    check_atom_count(n_atoms)
    if n_terms < 1:
        raise ValueError("need at least one mixture term")
    rng = np.random.default_rng(rng_seed)
    weights = rng.dirichlet(np.ones(n_terms))
    # theta = arccos(1 - 2u) is uniform on the sphere
    theta = np.arccos(1.0 - 2.0 * rng.random((n_terms, n_atoms)))
    phi = 2.0 * np.pi * rng.random((n_terms, n_atoms))
    spec = SeparableSpec(n_atoms, weights, np.stack([theta, phi], axis=-1))
    return spec, separable_density(spec)


@dataclass
class FuzzReport:
    """Outcome of a separable-state fuzzing run."""

    min_value: float
    argmin: dict
    n_trials: int
    n_evaluations: int
    histogram_counts: list[int]
    histogram_edges: list[float]
    control_min: float | None = None
    violations: int = 0
    threshold: float = -1e-9

    def to_json(self, indent: int | None = 2) -> str:
        payload = {
            "min_value": self.min_value,
            "argmin": self.argmin,
            "n_trials": self.n_trials,
            "n_evaluations": self.n_evaluations,
            "violations": self.violations,
            "threshold": self.threshold,
            "histogram": {
                "counts": self.histogram_counts,
                "edges": self.histogram_edges,
            },
            "control_min": self.control_min,
        }
        return json.dumps(payload, indent=indent)


def _random_direction(rng) -> np.ndarray:
    vec = rng.normal(size=3)
    return vec / np.linalg.norm(vec)


def _random_geometry(rng, n_atoms: int) -> AtomConfig:
    if rng.random() < 0.5:
        return chain(n_atoms, spacing=float(rng.uniform(0.1, np.pi)))
    return spherical_cloud(
        n_atoms,
        radius=float(rng.uniform(0.5, 2.5)),
        rng_seed=int(rng.integers(0, 2**63 - 1)),
    )


def _one_trial(seed_pair, n_range, n_terms_max, dirs_per_trial, chi_per_trial):
    rng = np.random.default_rng(np.random.SeedSequence(seed_pair))
    n_atoms = int(rng.choice(n_range))
    n_terms = int(rng.integers(1, n_terms_max + 1))
    spec, rho = random_separable(n_atoms, n_terms,
                                 np.random.SeedSequence(seed_pair + (1,)))
    config = _random_geometry(rng, n_atoms)
    trial_min = np.inf
    trial_arg: dict = {}
    for _ in range(dirs_per_trial):
        khat = _random_direction(rng)
        for _ in range(chi_per_trial):
            chi = float(rng.uniform(0.0, 2.0 * np.pi))
            direction = Direction(khat, chi)
            report = witness_report(moments(rho, config, direction))
            if report.w_min < trial_min:
                trial_min = report.w_min
                trial_arg = {
                    "n_atoms": n_atoms,
                    "n_terms": n_terms,
                    "witness": report.argmin,
                    "khat": [float(v) for v in khat],
                    "chi": chi,
                }
    return trial_min, trial_arg


def _seeded_trial(i, rng_seed, n_range, n_terms_max, dirs_per_trial, chi_per_trial):
    return _one_trial((rng_seed, i), n_range, n_terms_max,
                      dirs_per_trial, chi_per_trial)


def fuzz_witnesses(
    n_range,
    trials: int,
    dirs_per_trial: int,
    chi_per_trial: int,
    rng_seed: int,
    n_terms_max: int = 4,
    bell_control: bool = False,
    threshold: float = -1e-9,
    max_workers: int = 1,
) -> FuzzReport:
    """Evaluate all eight witnesses on random separable states at random
    geometries, directions, and quadrature angles.

    Trials are seeded as (rng_seed, trial_index), so the report is identical
    regardless of execution order or worker count.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    n_range = [int(n) for n in n_range]
    if max_workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        runner = partial(
            _seeded_trial, rng_seed=rng_seed, n_range=n_range,
            n_terms_max=n_terms_max, dirs_per_trial=dirs_per_trial,
            chi_per_trial=chi_per_trial,
        )
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(runner, range(trials),
                                     chunksize=max(1, trials // (8 * max_workers))))
    else:
        outcomes = [
            _one_trial((rng_seed, i), n_range, n_terms_max,
                       dirs_per_trial, chi_per_trial)
            for i in range(trials)
        ]
    minima = np.empty(trials)
    global_min = np.inf
    global_arg: dict = {}
    for i, (trial_min, trial_arg) in enumerate(outcomes):
        minima[i] = trial_min
        if trial_min < global_min:
            global_min = trial_min
            global_arg = dict(trial_arg, trial=i)
    counts, edges = np.histogram(minima, bins=20)
    control_min = None
    if bell_control:
        # (|up down> + |down up>)/sqrt(2) at zero optical path: w3[Z] = -4
        bell_vec = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
        bell = DensityMatrix(np.outer(bell_vec, bell_vec.conj()), 2)
        config = chain(2, spacing=1.0)
        direction = Direction(np.array([0.0, 0.0, 1.0]))  # perpendicular: k.r = 0
        control_min = witness_report(moments(bell, config, direction)).w_min
    return FuzzReport(
        min_value=float(global_min),
        argmin=global_arg,
        n_trials=trials,
        n_evaluations=trials * dirs_per_trial * chi_per_trial,
        histogram_counts=[int(v) for v in counts],
        histogram_edges=[float(v) for v in edges],
        control_min=None if control_min is None else float(control_min),
        violations=int((minima < threshold).sum()),
        threshold=threshold,
    )
