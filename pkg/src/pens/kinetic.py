"""One-dimensional kinetic model with strong local alignment.

Phase-space density ``f(x, xi, t)`` on a periodic ``x`` grid and a
truncated velocity grid ``[-Xi, Xi]`` obeys::

    f_t + xi f_x + d_xi((v - xi) f) + (1/eps) d_xi((u_f - xi) f) = 0

where ``v(x, t)`` is a prescribed carrier velocity and
``u_f = int xi f / int f`` the local mean velocity.  Its first two moments
formally satisfy pressureless Euler with drag toward ``v`` as
``eps -> 0``; :func:`limit_comparison` measures that convergence against
the finite-volume Euler solver.

Velocity integrals use the cell-centred midpoint rule, which coincides
with the trapezoid rule whenever the boundary cells are empty (the
truncation invariant guarantees they are, to 1e-8).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .euler import euler_flux_divergence, velocity_from_momentum

logger = logging.getLogger(__name__)

BOUNDARY_MASS_TOL = 1e-8
RHO_FLOOR = 1e-12


class TruncationError(RuntimeError):
    """Mass reached the edge of the velocity grid."""


@dataclass
class KineticState:
    f: np.ndarray
    eps: float
    length: float
    xi_max: float
    v: object
    t: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.f.ndim != 2:
            raise ValueError(f"f must be 2-D (nx, nxi), got shape {self.f.shape}")

    @property
    def nx(self):
        return self.f.shape[0]

    @property
    def nxi(self):
        return self.f.shape[1]

    @property
    def dx(self):
        return self.length / self.nx

    @property
    def dxi(self):
        return 2.0 * self.xi_max / self.nxi

    @property
    def x(self):
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def xi(self):
        return -self.xi_max + (np.arange(self.nxi) + 0.5) * self.dxi

    @property
    def xi_faces(self):
        return -self.xi_max + np.arange(1, self.nxi) * self.dxi

    def mass(self):
        return float(np.sum(self.f)) * self.dx * self.dxi

    def velocity_field(self, t=None):
        return np.broadcast_to(np.asarray(self.v(self.x, self.t if t is None else t), dtype=float), (self.nx,))


def velocity_bound(u0_max, v_max, thermal_width):
    """Truncation ``Xi = 5 (max|u0| + max|v| + thermal width)``."""
    xi = 5.0 * (abs(u0_max) + abs(v_max) + thermal_width)
    if not xi > 0:
        raise ValueError("velocity bound is zero; give nonzero velocities or a thermal width")
    return xi


def deposit(columns, positions, weights, xi0, dxi, nxi):
    """Cloud-in-cell deposit of point masses onto the cell centres of each row.

    ``positions`` and ``weights`` have shape ``(nx, k)``.  Mass and first
    moment are preserved exactly for positions inside the centre range.
    """
    nx = positions.shape[0]
    s = np.clip((positions - xi0) / dxi, 0.0, nxi - 1.0)
    j0 = np.minimum(np.floor(s).astype(np.int64), nxi - 2)
    w = s - j0
    rows = np.broadcast_to(np.arange(nx)[:, None] * nxi, positions.shape)
    out = np.bincount((rows + j0).ravel(), (weights * (1.0 - w)).ravel(), minlength=nx * nxi)
    out += np.bincount((rows + j0 + 1).ravel(), (weights * w).ravel(), minlength=nx * nxi)
    return out.reshape(nx, nxi) if columns is None else columns + out.reshape(nx, nxi)


def initial_state(rho0, u0, v, eps, length, nxi, thermal_width=0.0, xi_max=None):
    """Kinetic data with moments ``(rho0, rho0 u0)``.

    With ``thermal_width = 0`` each column is a discrete monokinetic profile
    (mass split between the two cells around ``u0``); otherwise a Maxwellian
    of that width, renormalized column by column to the exact density.
    """
    rho0 = np.asarray(rho0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    nx = rho0.shape[0]
    x = (np.arange(nx) + 0.5) * length / nx
    if xi_max is None:
        v_max = float(np.max(np.abs(v(x, 0.0))))
        xi_max = velocity_bound(float(np.max(np.abs(u0))), v_max, thermal_width)
    dxi = 2.0 * xi_max / nxi
    xi = -xi_max + (np.arange(nxi) + 0.5) * dxi
    if thermal_width > 0:
        g = np.exp(-((xi[None, :] - u0[:, None]) ** 2) / (2.0 * thermal_width**2))
        f = g * (rho0 / (np.sum(g, axis=1) * dxi))[:, None]
    else:
        f = deposit(None, u0[:, None], (rho0 / dxi)[:, None], xi[0], dxi, nxi)
    state = KineticState(f, eps, length, xi_max, v)
    check_truncation(state)
    return state


def moments(f, dxi, xi):
    """``(rho, m, variance)`` per ``x`` cell; variance is 0 where ``rho`` is below the floor."""
    rho = np.sum(f, axis=1) * dxi
    m = f @ xi * dxi
    u = m / np.maximum(rho, RHO_FLOOR)
    second = f @ (xi * xi) * dxi
    var = np.where(rho > RHO_FLOOR, second / np.maximum(rho, RHO_FLOOR) - u * u, 0.0)
    return rho, m, np.maximum(var, 0.0)


def state_moments(state):
    return moments(state.f, state.dxi, state.xi)


def monokinetic_deviation(state):
    """Global kinetic temperature ``int int (xi - u_f(x))^2 f dxi dx``."""
    xi = state.xi
    rho, m, _ = state_moments(state)
    u = m / np.maximum(rho, RHO_FLOOR)
    return float(np.sum(state.f * (xi[None, :] - u[:, None]) ** 2)) * state.dxi * state.dx


def check_truncation(state):
    edge = float(np.sum(state.f[:, 0]) + np.sum(state.f[:, -1])) * state.dx * state.dxi
    total = state.mass()
    if edge > BOUNDARY_MASS_TOL * total:
        raise TruncationError(
            f"mass fraction {edge / total:.3e} in the outermost velocity cells at t={state.t!r}; "
            f"increase the velocity bound (currently {state.xi_max!r})"
        )


def stable_dt(state, cfl, alignment="upwind"):
    """Largest step meeting the transport CFL in ``x`` and ``xi``."""
    xi_max = state.xi_max
    v = state.velocity_field()
    dt = cfl * state.dx / xi_max
    if alignment == "upwind":
        drift = float(np.max(np.abs(v))) + xi_max + 2.0 * xi_max / state.eps
        dt = min(dt, cfl * state.dxi / drift, state.eps)
    return dt


def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def transport_x(f, xi, dx, dt, order=2):
    """Conservative upwind transport along ``x`` with speed ``xi`` per column.

    ``order=2`` adds a minmod-limited, time-centred slope to the upwind
    state (TVD, hence positivity preserving, for Courant numbers <= 1).
    """
    a = xi[None, :]
    nu = np.abs(a) * dt / dx
    if order == 1:
        left, right = f, np.roll(f, -1, axis=0)
    else:
        s = _minmod(f - np.roll(f, 1, axis=0), np.roll(f, -1, axis=0) - f)
        left = f + 0.5 * (1.0 - nu) * s
        right = np.roll(f - 0.5 * (1.0 - nu) * s, -1, axis=0)
    flux = np.maximum(a, 0.0) * left + np.minimum(a, 0.0) * right
    return f - dt / dx * (flux - np.roll(flux, 1, axis=0))


def transport_xi(f, face_speed, dxi, dt):
    """Conservative upwind transport in ``xi`` given speeds on interior faces.

    The outer faces carry no flux, so each column keeps its mass.
    """
    flux = np.maximum(face_speed, 0.0) * f[:, :-1] + np.minimum(face_speed, 0.0) * f[:, 1:]
    out = f.copy()
    out[:, :-1] -= dt / dxi * flux
    out[:, 1:] += dt / dxi * flux
    return out


def _column_mean(f, xi, dxi):
    rho = np.sum(f, axis=1) * dxi
    return (f @ xi) * dxi / np.maximum(rho, RHO_FLOOR)


def align_exact(f, xi, dxi, dt, eps):
    """Exact alignment flow ``xi -> u + (xi - u) exp(-dt/eps)`` with a conservative remap.

    The map leaves ``u`` unchanged, so the remapped columns keep both mass
    and mean velocity.
    """
    u = _column_mean(f, xi, dxi)
    pos = u[:, None] + (xi[None, :] - u[:, None]) * np.exp(-dt / eps)
    return deposit(None, pos, f, xi[0], dxi, f.shape[1])


def drift_exact(f, xi, dxi, dt, eps, v):
    """Exact velocity-space flow of drag plus alignment over ``dt``.

    Along a characteristic ``xi - u`` decays like ``exp(-(1 + 1/eps) t)``
    while ``u`` relaxes to ``v`` like ``exp(-t)``, so::

        xi(dt) = v + (u - v) exp(-dt) + (xi - u) exp(-(1 + 1/eps) dt)

    The cloud-in-cell remap reproduces the new mean velocity exactly.
    """
    u = _column_mean(f, xi, dxi)[:, None]
    v = np.asarray(v, dtype=float)[:, None]
    pos = v + (u - v) * np.exp(-dt) + (xi[None, :] - u) * np.exp(-(1.0 + 1.0 / eps) * dt)
    return deposit(None, pos, f, xi[0], dxi, f.shape[1])


def _drift_faces(state, f, t, alignment):
    faces = state.xi_faces[None, :]
    v = state.velocity_field(t)[:, None]
    speed = v - faces
    if alignment == "upwind":
        u = _column_mean(f, state.xi, state.dxi)
        speed = speed + (u[:, None] - faces) / state.eps
    return speed


def kinetic_step(state, dt, alignment="upwind", cfl=0.9):
    """Strang step: half ``x`` transport, full velocity step, half ``x`` transport.

    With ``alignment="exact"`` the velocity step is :func:`drift_exact`,
    which removes the ``dt <= eps`` restriction.
    """
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    limit = stable_dt(state, cfl, alignment)
    if dt > limit * (1.0 + 1e-12):
        raise ValueError(f"dt={dt!r} exceeds the stable step {limit!r} for alignment={alignment!r}")
    xi, dxi, dx = state.xi, state.dxi, state.dx
    tm = state.t + 0.5 * dt
    f = transport_x(state.f, xi, dx, 0.5 * dt)
    if alignment == "upwind":
        f = transport_xi(f, _drift_faces(state, f, tm, alignment), dxi, dt)
    elif alignment == "exact":
        f = drift_exact(f, xi, dxi, dt, state.eps, state.velocity_field(tm))
    else:
        raise ValueError(f"unknown alignment {alignment!r}")
    f = transport_x(f, xi, dx, 0.5 * dt)
    new = replace(state, f=f, t=state.t + dt)
    check_truncation(new)
    return new


@dataclass
class EulerLine:
    """Pressureless Euler with drag toward a prescribed ``v`` on a periodic line."""

    rho: np.ndarray
    m: np.ndarray
    length: float
    v: object
    t: float = 0.0

    @property
    def x(self):
        n = self.rho.shape[0]
        return (np.arange(n) + 0.5) * self.length / n

    @property
    def u(self):
        return velocity_from_momentum(self.rho, self.m, RHO_FLOOR)


def _euler_rhs(rho, m, x, h, v, t):
    drho, dm = euler_flux_divergence(rho, m[None, :], h, rho_floor=RHO_FLOOR)
    u = velocity_from_momentum(rho, m, RHO_FLOOR)
    return drho, dm[0] + rho * (v(x, t) - u)


def euler_line_step(state, dt):
    """SSP-RK3 step of :class:`EulerLine`."""
    x = state.x
    h = state.length / state.rho.shape[0]
    r0, m0, t = state.rho, state.m, state.t
    dr, dm = _euler_rhs(r0, m0, x, h, state.v, t)
    r1, m1 = r0 + dt * dr, m0 + dt * dm
    dr, dm = _euler_rhs(r1, m1, x, h, state.v, t + dt)
    r2, m2 = 0.75 * r0 + 0.25 * (r1 + dt * dr), 0.75 * m0 + 0.25 * (m1 + dt * dm)
    dr, dm = _euler_rhs(r2, m2, x, h, state.v, t + 0.5 * dt)
    r3 = r0 / 3.0 + 2.0 / 3.0 * (r2 + dt * dr)
    m3 = m0 / 3.0 + 2.0 / 3.0 * (m2 + dt * dm)
    return replace(state, rho=r3, m=m3, t=t + dt)


@dataclass
class KineticRun:
    eps: float
    times: np.ndarray
    deviation: np.ndarray
    mass: np.ndarray
    rho: list = field(default_factory=list)
    u: list = field(default_factory=list)
    final: KineticState = None
    steps: int = 0


def run_kinetic(state, t_end, output_dt, alignment="upwind", cfl=0.4):
    """Integrate to ``t_end`` recording moments every ``output_dt``."""
    times, dev, mass, rhos, us = [], [], [], [], []

    def record(st):
        rho, m, _ = state_moments(st)
        times.append(st.t)
        dev.append(monokinetic_deviation(st))
        mass.append(st.mass())
        rhos.append(rho)
        us.append(m / np.maximum(rho, RHO_FLOOR))

    record(state)
    n_out = int(round(t_end / output_dt))
    steps = 0
    for k in range(1, n_out + 1):
        target = min(k * output_dt, t_end) if k < n_out else t_end
        while state.t < target * (1.0 - 1e-14):
            dt = min(stable_dt(state, cfl, alignment), target - state.t)
            state = kinetic_step(state, dt, alignment, cfl=1.0)
            steps += 1
        state.t = target
        record(state)
    return KineticRun(state.eps, np.array(times), np.array(dev), np.array(mass), rhos, us, state, steps)


def run_euler_line(rho0, u0, v, length, t_end, output_dt, cfl=0.4):
    """Matched Euler run; returns ``(times, rho list, u list)`` at the kinetic output times."""
    state = EulerLine(np.array(rho0, dtype=float), np.asarray(rho0) * np.asarray(u0), length, v)
    h = length / state.rho.shape[0]
    times, rhos, us = [0.0], [state.rho.copy()], [state.u.copy()]
    n_out = int(round(t_end / output_dt))
    for k in range(1, n_out + 1):
        target = min(k * output_dt, t_end) if k < n_out else t_end
        while state.t < target * (1.0 - 1e-14):
            speed = max(float(np.max(np.abs(state.u))), float(np.max(np.abs(v(state.x, state.t)))), 1e-12)
            dt = min(cfl * h / speed, target - state.t)
            state = euler_line_step(state, dt)
        state.t = target
        times.append(target)
        rhos.append(state.rho.copy())
        us.append(state.u.copy())
    return np.array(times), rhos, us


def limit_comparison(kinetic_run, euler_times, euler_rho, euler_u, length):
    """L2-in-``x`` differences of density and velocity at each common output time."""
    if len(kinetic_run.times) != len(euler_times) or not np.allclose(kinetic_run.times, euler_times, atol=1e-12):
        raise ValueError("kinetic and Euler runs have different output times")
    if kinetic_run.rho[0].shape != euler_rho[0].shape:
        raise ValueError(f"grid mismatch: kinetic {kinetic_run.rho[0].shape} vs Euler {euler_rho[0].shape}")
    dx = length / kinetic_run.rho[0].shape[0]
    err_rho = np.array([np.sqrt(np.sum((a - b) ** 2) * dx) for a, b in zip(kinetic_run.rho, euler_rho)])
    err_u = np.array([np.sqrt(np.sum((a - b) ** 2) * dx) for a, b in zip(kinetic_run.u, euler_u)])
    return err_rho, err_u
