import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldwitness.dicke import (
    DickeSpec,
    chebyshev_delta,
    chebyshev_interior_roots,
    chebyshev_phases,
    dicke_moments,
    dicke_state,
    s_k,
)
from fieldwitness.field import moments
from fieldwitness.geometry import Direction, chain, plane_sweep, spherical_cloud
from fieldwitness.witness import detection_epsilon, witness_report


def test_two_atom_symmetric_dicke_is_bell():
    state = dicke_state(DickeSpec(np.zeros(2), 2))
    assert np.allclose(state.amplitudes, np.array([0, 1, 1, 0]) / np.sqrt(2))


def test_two_atom_antisymmetric_dicke():
    state = dicke_state(DickeSpec(np.array([0.0, np.pi]), 2))
    target = np.array([0, 1, -1, 0]) / np.sqrt(2)
    overlap = abs(np.vdot(state.amplitudes, target))
    assert overlap == pytest.approx(1.0)


def test_three_atom_dicke_amplitudes():
    spec = DickeSpec(np.arange(1, 4) * np.pi / 3, 3)
    state = dicke_state(spec)
    # single-excitation basis indices: site1 up -> 011, site2 -> 101, site3 -> 110
    assert state.amplitudes[0b011] == pytest.approx(np.exp(1j * np.pi / 3) / np.sqrt(3))
    assert state.amplitudes[0b101] == pytest.approx(np.exp(2j * np.pi / 3) / np.sqrt(3))
    assert state.amplitudes[0b110] == pytest.approx(np.exp(1j * np.pi) / np.sqrt(3))


def test_four_atom_moments_closed_form():
    spec = DickeSpec(np.zeros(4), 4)
    cfg = chain(4, 0.7)
    m = dicke_moments(spec, cfg, Direction([0.0, 0.0, 1.0]))
    assert (m.mean_x, m.mean_y, m.mean_z) == (0.0, 0.0, -2.0)
    assert (m.second_x, m.second_y, m.second_z) == (10.0, 10.0, 4.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_analytic_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    spec = DickeSpec(rng.uniform(0, 2 * np.pi, n), n)
    cfg = spherical_cloud(n, 2.0, rng_seed=int(rng.integers(2**31)))
    khat = rng.normal(size=3)
    khat /= np.linalg.norm(khat)
    direction = Direction(khat)
    analytic = dicke_moments(spec, cfg, direction)
    brute = moments(dicke_state(spec), cfg, direction)
    for attr in ("mean_x", "mean_y", "mean_z", "second_x", "second_y", "second_z"):
        assert getattr(analytic, attr) == pytest.approx(
            getattr(brute, attr), abs=1e-10
        )


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_w2_equals_s_k_and_w3z_cancellation(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    spec = DickeSpec(rng.uniform(0, 2 * np.pi, n), n)
    cfg = chain(n, float(rng.uniform(0.2, 2.0)))
    khat = rng.normal(size=3)
    khat /= np.linalg.norm(khat)
    direction = Direction(khat)
    rep = witness_report(dicke_moments(spec, cfg, direction))
    s = s_k(spec, cfg, direction)
    assert abs(rep.w2 - s) < 1e-10 * max(1.0, abs(s))
    assert abs(rep.w2 + rep.w3["Z"]) < 1e-10 * max(1.0, abs(s))


def test_s_k_two_atom_values():
    cfg = chain(2, 1.0)
    perp = Direction([0.0, 0.0, 1.0])  # k.(r1 - r2) = 0
    assert s_k(DickeSpec(np.array([0.0, np.pi / 2]), 2), cfg, perp) == pytest.approx(
        0.0, abs=1e-12
    )
    assert s_k(DickeSpec(np.zeros(2), 2), cfg, perp) == pytest.approx(4.0)


def test_chebyshev_two_atoms():
    delta = chebyshev_delta(2)
    assert abs(delta) <= 1e-12
    phases = chebyshev_phases(2, delta)
    assert np.allclose(phases, [np.pi / 2, np.pi])  # {0, pi/2} up to a global phase


def test_chebyshev_hundred_atoms():
    delta = chebyshev_delta(100)
    assert 0.996 <= delta <= 0.999
    phases = chebyshev_phases(100, delta)
    coherent = np.exp(1j * phases).sum()
    assert abs(abs(coherent) ** 2 - 100) <= 1e-6


def test_chebyshev_residual_is_polynomial_root():
    for n in (2, 5, 17, 100):
        delta = chebyshev_delta(n)
        residual = np.cos(n * np.arccos(delta)) - n * delta + (n - 1)
        assert abs(residual) <= 1e-12


def test_chebyshev_interior_roots_sorted_and_valid():
    roots = chebyshev_interior_roots(12)
    assert np.all(np.diff(roots) < 0)
    for delta in roots:
        assert -1.0 < delta < 1.0
        assert abs(np.cos(12 * np.arccos(delta)) - 12 * delta + 11) < 1e-9


def test_chebyshev_zero_kills_s_at_perpendicular():
    n = 100
    spec = DickeSpec(chebyshev_phases(n), n)
    cfg = chain(n, np.pi / 2)
    perp = Direction([0.0, 1.0, 0.0])
    assert abs(s_k(spec, cfg, perp)) <= 1e-6


def test_measure_zero_blindness_along_sweep():
    # the Chebyshev-phase chain hides only at theta = pi/2
    n = 100
    spec = DickeSpec(chebyshev_phases(n), n)
    cfg = chain(n, np.pi / 2)
    eps = detection_epsilon(n)
    for direction in plane_sweep(257):
        theta = np.arctan2(direction.khat[1], direction.khat[0])
        rep = witness_report(dicke_moments(spec, cfg, direction))
        if abs(theta - np.pi / 2) < 0.01:
            continue
        assert rep.w_min < -eps, f"not detected at theta = {theta}"
    mid = witness_report(dicke_moments(spec, cfg, Direction([0.0, 1.0, 0.0])))
    assert abs(mid.w2) <= 1e-6
    assert abs(mid.w3["Z"]) <= 1e-6


def test_dicke_spec_shape_guard():
    with pytest.raises(ValueError):
        DickeSpec(np.zeros(3), 4)
