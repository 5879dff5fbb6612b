import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pens import spectral as sp
from pens.heat import (
    GaussianProfile,
    calibrate_decay_constant,
    gaussian_heat_exact,
    heat_decay_bound,
    periodized_heat_exact,
    spectral_heat_evolve,
    split_spectral_energy,
    splitting_radius,
)


def test_exact_at_t0_is_initial_profile():
    prof = GaussianProfile(2.0, (0.5, -1.0), 1.5, 2)
    x = np.array([[0.5, 1.5], [-1.0, 0.0]])
    out = gaussian_heat_exact(prof, 0.0, x)
    assert out[0] == 2.0
    assert out[1] == pytest.approx(2.0 * np.exp(-2.0 / 3.0), rel=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_l1_conserved_by_quadrature(d):
    prof = GaussianProfile(1.0, (0.0,) * d, 1.0, d)
    grid = sp.Grid(d, 64, 40.0)
    for t in (0.0, 1.0, 4.0):
        vals = gaussian_heat_exact(prof, t, np.stack(grid.coords) - 20.0)
        assert grid.sum(vals) == pytest.approx(prof.l1, rel=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_l2_ratio_at_half_variance(d):
    prof = GaussianProfile(3.0, (0.0,) * d, 2.0, d)
    assert prof.l2_squared(1.0) / prof.l2_squared(0.0) == pytest.approx(2 ** (-d / 2), rel=1e-15)
    assert prof.l2_squared(0.0) == pytest.approx(9.0 * (2 * np.pi) ** (d / 2), rel=1e-15)


def test_profile_validation():
    with pytest.raises(ValueError):
        GaussianProfile(1.0, (0.0,), 0.0, 1)
    with pytest.raises(ValueError):
        GaussianProfile(1.0, (0.0,), 1.0, 2)
    with pytest.raises(ValueError):
        gaussian_heat_exact(GaussianProfile(1.0, (0.0,), 1.0, 1), -1.0, np.zeros((1, 1)))


def test_decay_bound_examples():
    assert heat_decay_bound(0.0, 3, 2.0, 1.0, 0.5) == pytest.approx(0.5 * 5.0)
    assert heat_decay_bound(3.0, 3, 2.0, 1.0, 0.5) == pytest.approx(0.5 * 5.0 / 8.0)
    with pytest.raises(ValueError):
        heat_decay_bound(1.0, 3, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        heat_decay_bound(-1.0, 3, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_single_constant_dominates_whole_trajectory(d):
    prof = GaussianProfile(1.0, (0.0,) * d, 2.25, d)
    times = np.linspace(0.0, 1000.0, 4001)
    C = calibrate_decay_constant(prof, times)
    l2 = np.sqrt(prof.l2_squared(0.0))
    assert np.all(prof.l2_squared(times) <= heat_decay_bound(times, d, prof.l1, l2, C) * (1 + 1e-14))
    # (1 + t) / (s2 + 2 t) increases for s2 > 2, so the ratio peaks at the last time
    s2, T = 2.25, 1000.0
    expected = (np.pi * s2) ** (d / 2) * (s2 * (1 + T) / (s2 + 2 * T)) ** (d / 2)
    expected /= (np.pi * s2) ** (d / 2) + (2 * np.pi * s2) ** d
    assert C == pytest.approx(expected, rel=1e-12)


def test_spectral_evolve_identity_and_semigroup():
    grid = sp.Grid(2, 32, 10.0)
    rng = np.random.default_rng(7)
    v0 = rng.standard_normal(grid.shape)
    assert np.max(np.abs(spectral_heat_evolve(v0, grid, 0.0) - v0)) < 1e-13
    two = spectral_heat_evolve(spectral_heat_evolve(v0, grid, 0.3), grid, 0.5)
    assert np.max(np.abs(two - spectral_heat_evolve(v0, grid, 0.8))) < 1e-13
    with pytest.raises(ValueError):
        spectral_heat_evolve(v0, grid, -0.1)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_spectral_evolve_matches_periodized_gaussian(d):
    sigma = 1.5
    grid = sp.Grid(d, 64 if d == 3 else 256, 20 * sigma)
    prof = GaussianProfile(1.0, (grid.length / 2,) * d, sigma**2, d)
    num = spectral_heat_evolve(prof.on_grid(grid), grid, sigma**2)
    images = periodized_heat_exact(prof, sigma**2, grid)
    assert np.linalg.norm(num - images) / np.linalg.norm(images) < 1e-13


@pytest.mark.parametrize("d", [1, 2])
def test_spectral_evolve_matches_whole_space_on_wider_box(d):
    # at L = 22 sigma the periodic images carry less than 1e-8 of the norm
    sigma = 1.5
    grid = sp.Grid(d, 256, 22 * sigma)
    prof = GaussianProfile(1.0, (grid.length / 2,) * d, sigma**2, d)
    for t in (0.5 * sigma**2, sigma**2):
        num = spectral_heat_evolve(prof.on_grid(grid), grid, t)
        exact = prof.on_grid(grid, t)
        assert np.linalg.norm(num - exact) / np.linalg.norm(exact) < 1e-8


def test_splitting_radius_and_energy_split():
    assert splitting_radius(0.0, 2) == pytest.approx(1.0)
    assert splitting_radius(3.0, 2) == pytest.approx(0.5)
    grid = sp.Grid(2, 32, 20.0)
    prof = GaussianProfile(1.0, (10.0, 10.0), 2.0, 2)
    f = prof.on_grid(grid)
    low, high = split_spectral_energy(f, grid, 1.0)
    assert low + high == pytest.approx(sp.l2_grid(f, grid) ** 2, rel=1e-12)
    assert low > high > 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(0.0, 50.0), st.integers(1, 3))
def test_exact_l2_decays_monotonically(var, t, d):
    prof = GaussianProfile(1.0, (0.0,) * d, var, d)
    assert prof.l2_squared(t + 1.0) < prof.l2_squared(t)
