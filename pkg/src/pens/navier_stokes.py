"""Pseudo-spectral incompressible Navier-Stokes phase.

The velocity is carried as half-spectrum coefficients ``vhat`` of shape
``(d, *grid.spectral_shape)``.  Viscosity is applied exactly through the
integrating factor; :func:`ns_tendency` returns only the projected
nonlinear and drag terms.
"""
from __future__ import annotations

import numpy as np

from . import spectral as sp


def advection_term(vhat, grid):
    """Dealiased coefficients of ``(v . grad) v`` with the mean mode set to 0.

    The mean of ``(v . grad) v = div(v (x) v)`` vanishes for solenoidal
    ``v``; zeroing it removes FFT roundoff from the momentum budget.
    """
    d = grid.dim
    v = sp.inverse(vhat, grid)
    adv = np.zeros((d,) + grid.shape)
    for j in range(d):
        dvj = sp.inverse(sp.gradient(vhat[j], grid), grid)
        for i in range(d):
            adv[j] += v[i] * dvj[i]
    nhat = sp.dealias(sp.forward(adv, grid), grid)
    nhat[(slice(None),) + grid.mean_index()] = 0.0
    return nhat


def source_coefficients(source, grid):
    """Dealiased transform of a physical source; the mean mode is the plain cell sum.

    Using the same summation as the Euler side keeps the exchanged total
    momentum exact.
    """
    sp.check_finite(source, "drag source")
    shat = sp.dealias(sp.forward(source, grid), grid)
    mean = np.sum(source, axis=grid.axes) / grid.n**grid.dim
    shat[(slice(None),) + grid.mean_index()] = mean
    return shat


def ns_tendency(vhat, drag_source, grid):
    """``P[-(v . grad) v + drag]`` in spectral space (viscous term excluded)."""
    rhs = source_coefficients(drag_source, grid) - advection_term(vhat, grid)
    return sp.leray_project(rhs, grid)


def viscous_integrating_factor(vhat, grid, dt, mu=1.0):
    """Exact heat-flow step: multiply each mode by ``exp(-mu |k|^2 dt)``."""
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    return vhat * np.exp(-mu * grid.k2 * dt)


def pressure_diagnostic(vhat, drag_source, grid):
    """Solve ``-lap p = div[(v . grad) v - drag]`` spectrally; mean of p is 0."""
    rhs = source_coefficients(drag_source, grid) - advection_term(vhat, grid)
    kap = [np.broadcast_to(k, grid.spectral_shape) for k in grid.derivative_wavenumbers]
    kk = sum(k * k for k in kap)
    safe = np.where(kk == 0.0, 1.0, kk)
    phat = -1j * sum(k * rhs[i] for i, k in enumerate(kap)) / safe
    phat[grid.mean_index()] = 0.0
    return sp.inverse(phat, grid)


def spectral_divergence_max(vhat, grid):
    """Largest modulus of the spectral divergence, scaled by the largest coefficient."""
    div = sp.divergence(vhat, grid)
    scale = max(float(np.max(np.abs(vhat))), 1e-300)
    kmax = max(float(np.max(np.abs(k))) for k in grid.derivative_wavenumbers)
    return float(np.max(np.abs(div))) / (scale * max(kmax, 1.0))
