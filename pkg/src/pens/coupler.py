"""Time advancement of the coupled pressureless-Euler / Navier-Stokes system.

One SSP-RK3 step advances ``(rho, m = rho u)`` with the finite-volume
fluxes and ``vhat`` with the integrating-factor form of the same
Shu-Osher stages.  Drag enters both phases at every stage from one array
(negated for the Euler side) so the exchanged momentum cancels exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectral as sp
from .euler import DEFAULT_THETA, clip_negative_density, euler_flux_divergence, velocity_from_momentum
from .navier_stokes import ns_tendency, source_coefficients, viscous_integrating_factor

logger = logging.getLogger(__name__)

TINY_SPEED = 1e-300
# largest mu |k|^2 dt on retained modes; the stage-two backward factor then
# magnifies roundoff by at most exp(VISCOUS_LIMIT / 2), about 400
VISCOUS_LIMIT = 12.0


class StepError(RuntimeError):
    """A step produced non-finite values; carries the stage and field."""

    def __init__(self, t, stage, name):
        self.t = t
        self.stage = stage
        self.name = name
        super().__init__(f"non-finite {name} at RK stage {stage} of the step from t={t!r}")


class CFLViolation(ValueError):
    pass


@dataclass
class FluidState:
    grid: sp.Grid
    rho: np.ndarray
    m: np.ndarray
    vhat: np.ndarray
    t: float = 0.0
    clipped: int = 0

    def velocity(self, rho_floor):
        return velocity_from_momentum(self.rho, self.m, rho_floor)

    def v(self):
        return sp.inverse(self.vhat, self.grid)

    def copy(self):
        return replace(self, rho=self.rho.copy(), m=self.m.copy(), vhat=self.vhat.copy())


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.4
    dt_max: float = 0.1
    t_end: float = 1.0
    diag_every: int = 10
    energy_dt: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if not self.dt_max > 0.0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.diag_every < 1:
            raise ValueError(f"diag_every must be >= 1, got {self.diag_every}")
        if self.energy_dt < 0.0:
            raise ValueError(f"energy_dt must be nonnegative, got {self.energy_dt}")


@dataclass(frozen=True)
class Physics:
    """Model switches shared by every step of a run."""

    mu: float = 1.0
    drag: str = "explicit"  # explicit | exact | off
    theta: float = DEFAULT_THETA
    rho_floor: float = 1e-10
    evolve_euler: bool = True
    evolve_ns: bool = True

    def __post_init__(self):
        if self.drag not in ("explicit", "exact", "off"):
            raise ValueError(f"unknown drag mode {self.drag!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")


def drag_exchange(rho, u, v):
    """Pointwise drag sources ``(-rho (u - v), +rho (u - v))``.

    The Euler source is the exact negation of the NS source array, so
    their cell sums cancel to the last bit.
    """
    rho = np.asarray(rho)
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.shape[1:] != rho.shape:
        raise ValueError(f"grid mismatch: rho {rho.shape}, u {u.shape}, v {v.shape}")
    ns_source = rho * (u - v)
    return -ns_source, ns_source


def exchange_exact(rho, u, v, dt):
    """Solve ``u' = -(u - v)``, ``v' = rho (u - v)`` exactly over ``dt`` per cell.

    ``rho u + v`` is invariant and ``u - v`` decays like ``exp(-(1 + rho) dt)``.
    """
    p = rho * u + v
    w = (u - v) * np.exp(-(1.0 + rho) * dt)
    return (p + w) / (1.0 + rho), (p - rho * w) / (1.0 + rho)


def cfl_dt(state, control, rho_floor=1e-10, mu=1.0):
    """``cfl * h / max(|u|, |v|)`` capped by ``dt_max``.

    With ``mu > 0`` the step also obeys ``mu |k|^2 dt <= VISCOUS_LIMIT`` on
    the retained modes; pass ``mu = 0`` when the NS phase is frozen.  With ``control.energy_dt > 0`` the step is further limited to
    ``energy_dt * E / D``, a fraction of the current energy-decay time,
    which keeps fast drag transients resolved.
    """
    grid = state.grid
    u = state.velocity(rho_floor)
    v = state.v()
    speed = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))), TINY_SPEED)
    dt = min(control.cfl * grid.h / speed, control.dt_max)
    if mu > 0.0:
        k2_max = float(np.max(np.where(grid.dealias_mask, grid.k2, 0.0)))
        if k2_max > 0.0:
            dt = min(dt, VISCOUS_LIMIT / (mu * k2_max))
    if control.energy_dt > 0.0:
        e = 0.5 * grid.sum(state.rho * np.sum(u * u, axis=0)) + 0.5 * grid.sum(np.sum(v * v, axis=0))
        diss = mu * sp.l2_spectral(state.vhat, grid, grid.k2) ** 2
        diss += grid.sum(state.rho * np.sum((u - v) ** 2, axis=0))
        if diss > 0.0:
            dt = min(dt, control.energy_dt * e / diss)
    return dt


def _tendencies(state_grid, rho, m, vhat, physics):
    grid = state_grid
    d_rho = np.zeros_like(rho)
    d_m = np.zeros_like(m)
    d_v = np.zeros_like(vhat)
    u = velocity_from_momentum(rho, m, physics.rho_floor)
    v = sp.inverse(vhat, grid)
    if physics.evolve_euler:
        d_rho, d_m = euler_flux_divergence(rho, m, grid.h, physics.theta, physics.rho_floor)
    if physics.drag == "explicit":
        euler_src, ns_src = drag_exchange(rho, u, v)
        if physics.evolve_euler:
            d_m = d_m + euler_src
    else:
        ns_src = np.zeros_like(m)
    if physics.evolve_ns:
        d_v = ns_tendency(vhat, ns_src, grid)
    return d_rho, d_m, d_v


def _check_stage(t, stage, rho, m, vhat):
    for name, arr in (("rho", rho), ("momentum", m), ("vhat", vhat)):
        if not np.all(np.isfinite(arr)):
            raise StepError(t, stage, name)


def _rk3(state, dt, physics):
    grid = state.grid
    mu = physics.mu
    rho0, m0, v0 = state.rho, state.m, state.vhat
    ns = physics.evolve_ns
    keep = grid.dealias_mask

    def ifac(vhat, tau):
        if not ns:
            return vhat
        if tau >= 0:
            return viscous_integrating_factor(vhat, grid, tau, mu)
        # backward factor only on retained modes, where tendencies live
        return np.where(keep, vhat * np.exp(np.where(keep, mu * grid.k2 * -tau, 0.0)), 0.0)

    dr, dm, dv0 = _tendencies(grid, rho0, m0, v0, physics)
    rho1 = rho0 + dt * dr
    m1 = m0 + dt * dm
    v1 = ifac(v0 + dt * dv0, dt)
    _check_stage(state.t, 1, rho1, m1, v1)

    dr, dm, dv = _tendencies(grid, rho1, m1, v1, physics)
    rho2 = 0.75 * rho0 + 0.25 * (rho1 + dt * dr)
    m2 = 0.75 * m0 + 0.25 * (m1 + dt * dm)
    # E(-dt/2) v1 = E(dt/2) (v0 + dt N(v0)) is formed directly so that only
    # the dealiased tendency is propagated backwards
    v2 = 0.75 * ifac(v0, 0.5 * dt) + 0.25 * (ifac(v0 + dt * dv0, 0.5 * dt) + ifac(dt * dv, -0.5 * dt))
    _check_stage(state.t, 2, rho2, m2, v2)

    dr, dm, dv = _tendencies(grid, rho2, m2, v2, physics)
    rho3 = rho0 / 3.0 + 2.0 / 3.0 * (rho2 + dt * dr)
    m3 = m0 / 3.0 + 2.0 / 3.0 * (m2 + dt * dm)
    v3 = ifac(v0, dt) / 3.0 + 2.0 / 3.0 * ifac(v2 + dt * dv, 0.5 * dt)
    _check_stage(state.t, 3, rho3, m3, v3)

    if not physics.evolve_euler:
        rho3, m3 = rho0.copy(), m0.copy()
    if not ns:
        v3 = v0.copy()
    return rho3, m3, v3


def _exchange_half(state, dt, physics):
    """Exact drag exchange over ``dt`` applied as a state update (Strang half-step)."""
    grid = state.grid
    u = state.velocity(physics.rho_floor)
    v = state.v()
    u_new, v_new = exchange_exact(state.rho, u, v, dt)
    m = state.m
    vhat = state.vhat
    if physics.evolve_euler:
        m = state.rho * u_new
    if physics.evolve_ns:
        dv = source_coefficients(v_new - v, grid)
        vhat = vhat + sp.leray_project(dv, grid)
    return replace(state, m=m, vhat=vhat)


def step(state, dt, physics=Physics(), control=None):
    """Advance ``state`` by ``dt`` with one coupled SSP-RK3 step.

    With ``control`` given, ``dt`` is checked against :func:`cfl_dt`.
    """
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    if control is not None:
        limit = cfl_dt(state, control, physics.rho_floor, physics.mu if physics.evolve_ns else 0.0)
        if dt > limit * (1.0 + 1e-12):
            raise CFLViolation(f"dt={dt!r} exceeds the CFL limit {limit!r}")
    if physics.drag == "exact":
        state = _exchange_half(state, 0.5 * dt, physics)
        rho, m, vhat = _rk3(state, dt, physics)
        state = replace(state, rho=rho, m=m, vhat=vhat)
        state = _exchange_half(state, 0.5 * dt, physics)
        rho, m, vhat = state.rho, state.m, state.vhat
    else:
        rho, m, vhat = _rk3(state, dt, physics)
    clipped = clip_negative_density(rho) if physics.evolve_euler else 0
    return FluidState(state.grid, rho, m, vhat, state.t + dt, state.clipped + clipped)
