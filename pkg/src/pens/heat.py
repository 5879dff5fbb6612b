"""Exact Gaussian heat solutions and the polynomial L2 decay bound.

Heat equation ``V_t = lap V`` on R^d (unit diffusivity), isotropic
Gaussian data ``A exp(-|x - x0|^2 / (2 sigma^2))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral as sp


@dataclass(frozen=True)
class GaussianProfile:
    amplitude: float
    center: tuple
    variance: float
    dim: int

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        if len(self.center) != self.dim:
            raise ValueError("center must have one coordinate per dimension")

    @property
    def l1(self):
        return abs(self.amplitude) * (2 * np.pi * self.variance) ** (self.dim / 2)

    def l2_squared(self, t=0.0):
        s2 = self.variance
        return self.amplitude**2 * (np.pi * s2) ** (self.dim / 2) * (s2 / (s2 + 2 * np.asarray(t))) ** (self.dim / 2)

    def on_grid(self, grid, t=0.0):
        """Sample the solution at time ``t`` on a periodic grid (nearest image)."""
        offsets = []
        for x, c in zip(grid.coords, self.center):
            dx = x - c
            offsets.append(dx - grid.length * np.round(dx / grid.length))
        return gaussian_heat_exact(self, t, np.stack(offsets) + np.reshape(self.center, (-1,) + (1,) * grid.dim))


def gaussian_heat_exact(profile, t, x):
    """Closed-form heat flow of a Gaussian at time ``t``; ``x`` has shape ``(d, ...)``."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    x = np.asarray(x, dtype=float)
    s2 = profile.variance + 2.0 * t
    amp = profile.amplitude * (profile.variance / s2) ** (profile.dim / 2)
    r2 = sum((x[i] - profile.center[i]) ** 2 for i in range(profile.dim))
    return amp * np.exp(-r2 / (2.0 * s2))


def periodized_heat_exact(profile, t, grid, images=1):
    """Heat flow of the periodized Gaussian: the sum over ``2 images + 1`` copies per axis."""
    offsets = np.arange(-images, images + 1) * grid.length
    x = np.stack(grid.coords)
    out = np.zeros(grid.shape)
    for shift in np.stack(np.meshgrid(*([offsets] * profile.dim), indexing="ij"), -1).reshape(-1, profile.dim):
        copy = GaussianProfile(profile.amplitude, tuple(np.add(profile.center, shift)), profile.variance, profile.dim)
        out += gaussian_heat_exact(copy, t, x)
    return out


def heat_decay_bound(t, d, l1, l2, C):
    """``C (l2^2 + l1^2) / (1 + t)^(d/2)``."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be nonnegative")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    return C * (l2**2 + l1**2) / (1.0 + np.asarray(t)) ** (d / 2)


def calibrate_decay_constant(profile, times):
    """Smallest ``C`` for which the bound dominates the exact L2^2 trajectory on ``times``."""
    times = np.asarray(times, dtype=float)
    exact = profile.l2_squared(times)
    l2 = np.sqrt(profile.l2_squared(0.0))
    unit = heat_decay_bound(times, profile.dim, profile.l1, l2, 1.0)
    return float(np.max(exact / unit))


def spectral_heat_evolve(v0, grid, t):
    """Exact periodic heat flow: multiply each mode by ``exp(-|2 pi k / L|^2 t)``."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return sp.inverse(sp.forward(v0, grid) * np.exp(-grid.k2 * t), grid)


def splitting_radius(t, d):
    """Fourier-splitting radius ``(d / (2 (1 + t)))^(1/2)``."""
    return np.sqrt(d / (2.0 * (1.0 + t)))


def split_spectral_energy(field, grid, t):
    """``(low, high)`` parts of ``||field||^2`` inside/outside the splitting radius."""
    coeffs = sp.forward(field, grid)
    inside = np.sqrt(grid.k2) <= splitting_radius(t, grid.dim)
    low = sp.l2_spectral(coeffs, grid, inside.astype(float)) ** 2
    high = sp.l2_spectral(coeffs, grid, (~inside).astype(float)) ** 2
    return low, high
