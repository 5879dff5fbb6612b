"""Initial data for the coupled solver."""
from __future__ import annotations

import numpy as np

from . import spectral as sp
from .coupler import FluidState


def _normalize(field, amp):
    """Scale a vector field so that ``max |field| = amp``."""
    peak = float(np.max(np.sqrt(np.sum(field**2, axis=0))))
    return field * (amp / peak) if peak > 0 else field


def _solenoidal_from_potential(psi, grid):
    """Divergence-free field built spectrally from a scalar potential."""
    phat = sp.forward(psi, grid)
    if grid.dim == 1:
        return np.zeros((1,) + grid.shape)
    if grid.dim == 2:
        g = sp.gradient(phat, grid)
        vhat = np.stack([g[1], -g[0]])
    else:
        vhat = sp.curl(np.stack([phat, phat, phat]), grid)
    return sp.inverse(sp.leray_project(vhat, grid), grid)


def gaussian(grid, rho_bar, rho_amp, u_amp, v_amp, width):
    """Bumps centred in the box.

    The density bump is even about the centre and both velocities are odd,
    so total momentum vanishes and the decay is not masked by a drifting
    mean flow.  ``u`` combines a radial and a swirling part; ``v`` is the
    curl of a Gaussian potential.
    """
    c = grid.length / 2
    dx = [x - c for x in grid.coords]
    g = np.exp(-sum(a * a for a in dx) / (2 * width**2))
    rho = rho_bar + rho_amp * g
    u = np.stack([a / width * g for a in dx])
    if grid.dim >= 2:
        u[0] -= dx[1] / width * g
        u[1] += dx[0] / width * g
    u = _normalize(u, u_amp)
    v = _normalize(_solenoidal_from_potential(width * g, grid), v_amp)
    return rho, u, v


def taylor_green(grid, rho_bar, amp):
    k = 2 * np.pi / grid.length
    if grid.dim == 2:
        x, y = grid.coords
        v = amp * np.stack([np.cos(k * x) * np.sin(k * y), -np.sin(k * x) * np.cos(k * y)])
    elif grid.dim == 3:
        x, y, z = grid.coords
        v = amp * np.stack(
            [
                np.sin(k * x) * np.cos(k * y) * np.cos(k * z),
                -np.cos(k * x) * np.sin(k * y) * np.cos(k * z),
                np.zeros(grid.shape),
            ]
        )
    else:
        raise ValueError("Taylor-Green data needs dim 2 or 3")
    return np.full(grid.shape, float(rho_bar)), np.zeros((grid.dim,) + grid.shape), v


def uniform(grid, rho_bar, u_amp, v_amp):
    u = np.zeros((grid.dim,) + grid.shape)
    v = np.zeros_like(u)
    u[0] = u_amp
    v[0] = v_amp
    return np.full(grid.shape, float(rho_bar)), u, v


def sine(grid, rho_bar, rho_amp, u_amp):
    """One-dimensional wave along the first axis; ``v = 0``."""
    s = np.sin(2 * np.pi * grid.coords[0] / grid.length)
    u = np.zeros((grid.dim,) + grid.shape)
    u[0] = u_amp * s
    return rho_bar + rho_amp * s, u, np.zeros_like(u)


def random_smooth(grid, rho_bar, rho_amp, u_amp, v_amp, seed, kmax=4):
    """Band-limited random data (integer wavenumbers ``|k_i| <= kmax``)."""
    rng = np.random.default_rng(seed)

    def smooth(ncomp):
        noise = rng.standard_normal((ncomp,) + grid.shape)
        coeffs = sp.forward(noise, grid)
        keep = np.ones(grid.spectral_shape, dtype=bool)
        for k in grid.integer_wavenumbers:
            keep &= np.abs(k) <= kmax
        coeffs = np.where(keep, coeffs, 0.0)
        coeffs[(slice(None),) + grid.mean_index()] = 0.0
        return coeffs

    r = sp.inverse(smooth(1), grid)[0]
    rho = rho_bar + rho_amp * r / max(float(np.max(np.abs(r))), 1e-300)
    u = _normalize(sp.inverse(smooth(grid.dim), grid), u_amp)
    v = _normalize(sp.inverse(sp.leray_project(smooth(grid.dim), grid), grid), v_amp)
    return rho, u, v


def build_state(config):
    """``FluidState`` at ``t = 0`` from a :class:`pens.config.RunConfig`."""
    g = config.grid
    ic = config.initial
    grid = sp.Grid(g.dim, g.n, g.length)
    s = ic.scale
    if ic.kind == "gaussian":
        rho, u, v = gaussian(grid, ic.rho_bar, s * ic.rho_amp, s * ic.u_amp, s * ic.v_amp, ic.width)
    elif ic.kind == "taylor_green":
        rho, u, v = taylor_green(grid, ic.rho_bar, s * ic.v_amp)
    elif ic.kind == "uniform":
        rho, u, v = uniform(grid, ic.rho_bar, s * ic.u_amp, s * ic.v_amp)
    elif ic.kind == "sine":
        rho, u, v = sine(grid, ic.rho_bar, s * ic.rho_amp, s * ic.u_amp)
    else:
        rho, u, v = random_smooth(grid, ic.rho_bar, s * ic.rho_amp, s * ic.u_amp, s * ic.v_amp, config.run.seed)
    if np.any(rho < 0):
        raise ValueError("initial density is negative somewhere; reduce initial.rho_amp")
    return FluidState(grid, rho, rho * u, sp.forward(v, grid), 0.0)


def sample_points(config, count=None):
    """Deterministic sample points around the box centre for density tracking."""
    g = config.grid
    count = config.output.sample_points if count is None else count
    rng = np.random.default_rng(config.run.seed + 7919)
    c = g.length / 2
    half = min(1.5 * config.initial.width, g.length / 2)
    return c + rng.uniform(-half, half, size=(g.dim, count))
