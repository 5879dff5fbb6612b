"""Conserved quantities, energy/dissipation, norms, decay fits and density tracking."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import spectral as sp
from .euler import velocity_from_momentum


def mass(state):
    return float(state.grid.sum(state.rho))


def momentum(state):
    """Euler momentum plus NS momentum, one entry per axis."""
    grid = state.grid
    euler = grid.sum(state.m)
    ns = grid.volume * state.vhat[(slice(None),) + grid.mean_index()].real
    return euler + ns


def momentum_scale(state):
    """L1 size of both momenta; the denominator for relative momentum drift."""
    grid = state.grid
    v = state.v()
    return float(grid.sum(np.abs(state.m)).sum() + grid.sum(np.abs(v)).sum())


def energy(state, rho_floor=1e-10, euler_weight=0.5, mu=1.0, drag=True):
    """Total kinetic energy ``E`` and dissipation rate ``D``.

    ``E = euler_weight * sum(rho |u|^2) h^d + 1/2 sum(|v|^2) h^d`` and
    ``D = mu ||grad v||^2 + sum(rho |u - v|^2) h^d``.  With the default
    weight of one half ``dE/dt = -D`` holds for smooth solutions.  The
    gradient term is evaluated spectrally; ``drag=False`` drops the drag
    part (runs with the exchange switched off).
    """
    grid = state.grid
    u = velocity_from_momentum(state.rho, state.m, rho_floor)
    v = state.v()
    e = euler_weight * grid.sum(state.rho * np.sum(u * u, axis=0))
    e += 0.5 * grid.sum(np.sum(v * v, axis=0))
    grad_v2 = sp.l2_spectral(state.vhat, grid, grid.k2) ** 2
    drag_part = grid.sum(state.rho * np.sum((u - v) ** 2, axis=0)) if drag else 0.0
    return float(e), float(mu * grad_v2 + drag_part)


def dissipation_split(state, rho_floor=1e-10):
    """``(viscous, drag)`` parts of ``D``."""
    grid = state.grid
    u = velocity_from_momentum(state.rho, state.m, rho_floor)
    v = state.v()
    grad_v2 = sp.l2_spectral(state.vhat, grid, grid.k2) ** 2
    drag = grid.sum(state.rho * np.sum((u - v) ** 2, axis=0))
    return float(grad_v2), float(drag)


def energy_balance_residual(times, E, D):
    """``R(t) = E(t) + int_0^t D - E(0)`` by the trapezoid rule.

    Negative values mean the scheme dissipates more than the continuous law.
    """
    times = np.asarray(times, dtype=float)
    E = np.asarray(E, dtype=float)
    D = np.asarray(D, dtype=float)
    if times.size < 1:
        raise ValueError("need at least one record")
    if np.any(np.diff(times) < 0):
        bad = int(np.argmax(np.diff(times) < 0)) + 1
        raise ValueError(f"times are not sorted: t[{bad}]={times[bad]!r} < t[{bad - 1}]={times[bad - 1]!r}")
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (D[1:] + D[:-1]) * np.diff(times))])
    return E + integral - E[0]


@dataclass(frozen=True)
class DecayFit:
    field: str
    window: tuple
    alpha: float
    constant: float
    residual: float
    npoints: int


def fit_decay(times, values, window=None, field="value"):
    """Least-squares fit of ``log(value) = log(C) - alpha * log(1 + t)``.

    ``window = (t0, t1)`` restricts the fit to ``t0 <= t <= t1``.  The
    residual is the RMS misfit in log space.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(times.min()), float(times.max()))
    t0, t1 = window
    if not t1 > t0:
        raise ValueError(f"empty fit window {window}")
    if t0 < times.min() - 1e-12 or t1 > times.max() + 1e-12:
        raise ValueError(f"window {window} outside the series range [{times.min()}, {times.max()}]")
    sel = (times >= t0) & (times <= t1)
    if np.count_nonzero(sel) < 2:
        raise ValueError(f"fewer than two samples in window {window}")
    ts, vs = times[sel], values[sel]
    if np.any(vs <= 0):
        bad = ts[np.argmax(vs <= 0)]
        raise ValueError(f"nonpositive {field} at t={bad!r}; cannot fit a power law")
    X = np.column_stack([np.ones_like(ts), np.log1p(ts)])
    y = np.log(vs)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return DecayFit(
        field=field,
        window=(float(t0), float(t1)),
        alpha=float(-coef[1]),
        constant=float(np.exp(coef[0])),
        residual=float(np.sqrt(np.mean(resid**2))),
        npoints=int(ts.size),
    )


def weighted_norm_table(state, orders, exponents, rho_floor=1e-10):
    """``{(field, k, r): (1 + t)^r ||grad^k field||_{L2}}`` for ``field`` in u, v."""
    grid = state.grid
    fields = {"u": velocity_from_momentum(state.rho, state.m, rho_floor), "v": state.v()}
    table = {}
    for name, f in fields.items():
        coeffs = sp.forward(f, grid)
        for k in orders:
            sym = None if k == 0 else grid.k2**k
            base = sp.l2_spectral(coeffs, grid, sym)
            for r in exponents:
                table[(name, int(k), float(r))] = (1.0 + state.t) ** r * base
    return table


def sobolev_table(state, s, rho_floor=1e-10):
    """Norms bounded uniformly in time for small data.

    ``rho - mean(rho)`` in ``H^s``, ``u`` in ``H^(s+2)``, ``v`` in
    ``H^(s+1)``, plus ``X``, the sum of their squares.
    """
    grid = state.grid
    u = velocity_from_momentum(state.rho, state.m, rho_floor)
    drho = state.rho - np.mean(state.rho)
    table = {
        ("rho", s): sp.sobolev_norm(drho, grid, s),
        ("u", s + 2): sp.sobolev_norm(u, grid, s + 2),
        ("v", s + 1): sp.l2_spectral(state.vhat, grid, (1.0 + grid.k2) ** (s + 1)),
    }
    table[("X", s)] = sum(val**2 for val in list(table.values()))
    return table


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: tuple
    E: float
    D: float
    E_balance_residual: float
    sobolev: dict
    weighted: dict
    rho_min: float
    rho_max: float
    char_lower_bound: float
    extras: dict = field(default_factory=dict)


def divergence_sup(u, grid):
    """``max |div u|`` computed spectrally."""
    div = sp.inverse(sp.divergence(sp.forward(u, grid), grid), grid)
    return float(np.max(np.abs(div)))


class Monitor:
    """Builds :class:`DiagnosticsRecord` rows along a run.

    Keeps the running integral of ``D`` for the balance residual and of
    ``max |div u|`` for the characteristic lower bound on the density.
    """

    def __init__(self, s=2, orders=None, exponents=(0.0, 0.5), rho_floor=1e-10, euler_weight=0.5, mu=1.0, drag=True):
        self.s = s
        self.orders = tuple(range(0, s + 2)) if orders is None else tuple(orders)
        self.exponents = tuple(exponents)
        self.rho_floor = rho_floor
        self.euler_weight = euler_weight
        self.mu = mu
        self.drag = drag
        self._last = None
        self._D_integral = 0.0
        self._div_integral = 0.0
        self._E0 = None
        self._rho0_min = None

    def __call__(self, state):
        grid = state.grid
        E, D = energy(state, self.rho_floor, self.euler_weight, self.mu, self.drag)
        u = velocity_from_momentum(state.rho, state.m, self.rho_floor)
        div_sup = divergence_sup(u, grid)
        if self._last is None:
            self._E0 = E
            self._rho0_min = float(state.rho.min())
        else:
            t_prev, D_prev, div_prev = self._last
            dt = state.t - t_prev
            self._D_integral += 0.5 * (D + D_prev) * dt
            self._div_integral += 0.5 * (div_sup + div_prev) * dt
        self._last = (state.t, D, div_sup)
        return DiagnosticsRecord(
            t=float(state.t),
            mass=mass(state),
            momentum=tuple(float(x) for x in momentum(state)),
            E=E,
            D=D,
            E_balance_residual=E + self._D_integral - self._E0,
            sobolev=sobolev_table(state, self.s, self.rho_floor),
            weighted=weighted_norm_table(state, self.orders, self.exponents, self.rho_floor),
            rho_min=float(state.rho.min()),
            rho_max=float(state.rho.max()),
            char_lower_bound=self._rho0_min * float(np.exp(-self._div_integral)),
            extras={"clipped": state.clipped, "div_u_sup": div_sup},
        )


class VelocityHistory:
    """Pressureless velocity and its divergence sampled at increasing times.

    Stored in ``dtype`` (float32 by default) to bound memory on 3D runs.
    """

    def __init__(self, grid, dtype=np.float32):
        self.grid = grid
        self.dtype = dtype
        self.times = []
        self.u = []
        self.div = []

    def append(self, t, u):
        if self.times and t <= self.times[-1]:
            raise ValueError(f"history times must increase: {t!r} after {self.times[-1]!r}")
        div = sp.inverse(sp.divergence(sp.forward(u, self.grid), self.grid), self.grid)
        self.times.append(float(t))
        self.u.append(np.asarray(u, dtype=self.dtype))
        self.div.append(np.asarray(div, dtype=self.dtype))

    def __len__(self):
        return len(self.times)


def sample(field, grid, points):
    """Multilinear periodic interpolation of ``field`` at ``points`` (shape ``(d, npts)``)."""
    idx = np.mod(np.asarray(points, dtype=float), grid.length) / grid.h
    return ndimage.map_coordinates(np.asarray(field, dtype=float), idx, order=1, mode="grid-wrap")


@dataclass
class DensityTrack:
    t: float
    points: np.ndarray
    foot: np.ndarray
    log_compression: np.ndarray
    predicted: np.ndarray
    observed: np.ndarray

    @property
    def max_error(self):
        return float(np.max(np.abs(self.predicted - self.observed)))


def density_bound_track(history, rho0, points, rho_now=None, index=-1, substeps=1):
    """Density along backward characteristics.

    From each sample point at ``history.times[index]`` integrate
    ``d eta/ds = u(eta, s)`` back to ``s = 0`` with Heun's method (velocity
    multilinear in space, linear in time) while accumulating
    ``int div u`` along the path.  Returns
    ``rho0(eta(0)) * exp(-int div u)`` and, when ``rho_now`` is given, the
    grid density interpolated at the same points.
    """
    grid = history.grid
    times = history.times
    if not times or times[0] != 0.0:
        raise ValueError("history must start at t = 0")
    index = range(len(times))[index]
    pts = np.mod(np.atleast_2d(np.asarray(points, dtype=float)), grid.length)
    if pts.shape[0] != grid.dim:
        pts = pts.T
    eta = pts.copy()
    integral = np.zeros(eta.shape[1])

    def vel(j, frac, x):
        """velocity at time times[j] + frac * (times[j+1] - times[j])"""
        if frac == 0.0:
            return np.stack([sample(c, grid, x) for c in history.u[j]]), sample(history.div[j], grid, x)
        a = np.stack([sample(c, grid, x) for c in history.u[j]])
        b = np.stack([sample(c, grid, x) for c in history.u[j + 1]])
        da = sample(history.div[j], grid, x)
        db = sample(history.div[j + 1], grid, x)
        return (1 - frac) * a + frac * b, (1 - frac) * da + frac * db

    for j in range(index - 1, -1, -1):
        span = times[j + 1] - times[j]
        dt = span / substeps
        for sub in range(substeps, 0, -1):
            f_hi = sub / substeps
            f_lo = (sub - 1) / substeps
            if f_hi == 1.0:
                u_hi, d_hi = vel(j + 1, 0.0, eta)
            else:
                u_hi, d_hi = vel(j, f_hi, eta)
            pred = eta - dt * u_hi
            u_lo, _ = vel(j, f_lo, pred)
            eta_new = eta - 0.5 * dt * (u_hi + u_lo)
            _, d_lo = vel(j, f_lo, eta_new)
            integral += 0.5 * dt * (d_hi + d_lo)
            eta = np.mod(eta_new, grid.length)

    predicted = sample(rho0, grid, eta) * np.exp(-integral)
    observed = sample(rho_now, grid, pts) if rho_now is not None else np.full_like(predicted, np.nan)
    return DensityTrack(times[index], pts, eta, integral, predicted, observed)
