"""Finite-volume update of the pressureless Euler phase ``(rho, rho u)``.

Second-order central-upwind (Kurganov-Tadmor) fluxes on the collocated
periodic grid, dimension by dimension, with generalized-minmod
reconstruction of the conserved variables.  Drag is not handled here.
"""
from __future__ import annotations

import logging

import numpy as np

from .spectral import check_finite

logger = logging.getLogger(__name__)

DEFAULT_THETA = 1.3


def velocity_from_momentum(rho, m, rho_floor):
    """``u = m / max(rho, rho_floor)``; finite in vacuum cells."""
    if not rho_floor > 0:
        raise ValueError(f"rho_floor must be positive, got {rho_floor}")
    return np.asarray(m) / np.maximum(rho, rho_floor)


def _minmod3(a, b, c):
    same = (np.sign(a) == np.sign(b)) & (np.sign(b) == np.sign(c))
    mag = np.minimum(np.minimum(np.abs(a), np.abs(b)), np.abs(c))
    return np.where(same, np.sign(a) * mag, 0.0)


def limited_slope(q, axis, theta=DEFAULT_THETA):
    """Undivided generalized-minmod slope of ``q`` along ``axis`` (periodic)."""
    qm = np.roll(q, 1, axis=axis)
    qp = np.roll(q, -1, axis=axis)
    return _minmod3(theta * (q - qm), 0.5 * (qp - qm), theta * (qp - q))


def minmod_reconstruct(q, axis, theta=DEFAULT_THETA):
    """Interface values at ``i + 1/2`` along ``axis``.

    Returns ``(left, right)``: ``left[i]`` is the value reconstructed from
    cell ``i`` and ``right[i]`` the value from cell ``i + 1``.
    """
    if not 1.0 <= theta <= 2.0:
        raise ValueError(f"theta must lie in [1, 2], got {theta}")
    s = limited_slope(q, axis, theta)
    left = q + 0.5 * s
    right = np.roll(q - 0.5 * s, -1, axis=axis)
    return left, right


def interface_fluxes(rho, m, axis, theta=DEFAULT_THETA, rho_floor=1e-12):
    """Numerical fluxes of ``(rho, m)`` through the ``i + 1/2`` faces of ``axis``.

    ``axis`` counts spatial axes (0..d-1).  The local speed is the larger of
    ``|u_axis|`` on the two sides of the face, the repeated eigenvalue of
    the pressureless flux Jacobian.
    """
    d = m.shape[0]
    ax = axis
    rl, rr = minmod_reconstruct(rho, ax, theta)
    ml, mr = zip(*(minmod_reconstruct(m[c], ax, theta) for c in range(d)))
    ml = np.stack(ml)
    mr = np.stack(mr)
    ul = ml[axis] / np.maximum(rl, rho_floor)
    ur = mr[axis] / np.maximum(rr, rho_floor)
    a = np.maximum(np.abs(ul), np.abs(ur))

    h_rho = 0.5 * (ml[axis] + mr[axis]) - 0.5 * a * (rr - rl)
    h_m = 0.5 * (ml * ul + mr * ur) - 0.5 * a * (mr - ml)
    return h_rho, h_m


def euler_flux_divergence(rho, m, h, theta=DEFAULT_THETA, rho_floor=1e-12):
    """Advective tendencies ``(-div(rho u), -div(rho u (x) u))``.

    ``rho`` has the grid shape, ``m`` shape ``(d, *grid_shape)``.  The
    result telescopes: summed over cells each component vanishes up to
    roundoff.
    """
    check_finite(rho, "rho")
    check_finite(m, "momentum")
    d = m.shape[0]
    drho = np.zeros_like(rho)
    dm = np.zeros_like(m)
    for axis in range(d):
        h_rho, h_m = interface_fluxes(rho, m, axis, theta, rho_floor)
        drho -= (h_rho - np.roll(h_rho, 1, axis=axis)) / h
        dm -= (h_m - np.roll(h_m, 1, axis=axis + 1)) / h
    return drho, dm


def clip_negative_density(rho):
    """Zero negative roundoff in ``rho`` in place; returns the number clipped."""
    neg = rho < 0.0
    count = int(np.count_nonzero(neg))
    if count:
        scale = float(np.max(np.abs(rho)))
        worst = float(rho.min())
        if worst < -1e-15 * scale:
            logger.warning("clipping %d cells with rho down to %.3e", count, worst)
        rho[neg] = 0.0
    return count
