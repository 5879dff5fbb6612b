"""Run orchestration: integrate a configuration to ``t_end`` and collect diagnostics."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft

from . import fileio, kinetic
from .config import dump
from .coupler import CFLViolation, Physics, StepControl, StepError, cfl_dt, step
from .diagnostics import Monitor, VelocityHistory
from .initial import build_state
from .spectral import NonFiniteFieldError

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: object
    records: list
    columns: list
    final_state: object = None
    initial_state: object = None
    history: object = None
    snapshots: list = field(default_factory=list)
    error: dict = None
    steps: int = 0

    def csv_text(self):
        return fileio.timeseries_text(self.records, self.columns)

    def series(self, name):
        """One CSV column as an array, e.g. ``series("E")``."""
        rows = [fileio.record_row(r) for r in self.records]
        return np.array([row[name] for row in rows], dtype=float)

    @property
    def times(self):
        return np.array([r.t for r in self.records])


def physics_from(config, rho_max):
    phase = config.run.phase
    p = config.physics
    floor = p.rho_floor_rel * rho_max if rho_max > 0 else p.rho_floor_rel
    return Physics(
        mu=p.mu,
        drag=p.drag,
        theta=p.theta,
        rho_floor=floor,
        evolve_euler=phase in ("coupled", "euler"),
        evolve_ns=phase in ("coupled", "ns"),
    )


def make_monitor(config, physics):
    out = config.output
    return Monitor(
        s=out.sobolev_s,
        orders=range(0, out.sobolev_s + 2),
        exponents=out.weighted_r,
        rho_floor=physics.rho_floor,
        mu=physics.mu if physics.evolve_ns else 0.0,
        drag=physics.drag != "off",
    )


def run(config, out_dir=None):
    """Integrate ``config`` from its initial data to ``time.t_end``.

    Diagnostics are recorded at ``t = 0``, every ``output.diag_every``
    steps and at ``t_end``.  A failing step ends the run early; the records
    gathered so far are kept and ``result.error`` describes the failure.
    With ``out_dir`` the time series (``timeseries.csv``), snapshots and
    any error record (``error.json``) are written there.
    """
    if config.run.phase == "kinetic":
        raise ValueError("kinetic configurations run through run_kinetic_config or kinetic_sweep")
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    with scipy.fft.set_workers(config.run.workers):
        state = build_state(config)
        physics = physics_from(config, float(state.rho.max()))
        control = StepControl(
            config.time.cfl, config.time.dt_max, config.time.t_end, config.output.diag_every, config.time.energy_dt
        )
        monitor = make_monitor(config, physics)
        first = monitor(state)
        columns = fileio.columns_for(state.grid.dim, first.sobolev, first.weighted)
        result = RunResult(config, [first], columns, initial_state=state.copy())

        history = None
        if config.output.history_every:
            history = VelocityHistory(state.grid)
            history.append(0.0, state.velocity(physics.rho_floor))
        result.history = history

        snap_every = config.output.snapshot_every

        def snapshot(st, n):
            if out_dir is not None and snap_every and n % snap_every == 0:
                path = out_dir / f"snapshot_{n:06d}.bin"
                fileio.write_snapshot(path, st)
                result.snapshots.append(path)

        snapshot(state, 0)
        t_end = control.t_end
        n = 0
        try:
            while state.t < t_end:
                dt = cfl_dt(state, control, physics.rho_floor, physics.mu if physics.evolve_ns else 0.0)
                last = state.t + dt >= t_end * (1.0 - 1e-12)
                if last:
                    dt = t_end - state.t
                state = step(state, dt, physics)
                n += 1
                if last:
                    state.t = t_end
                if n % control.diag_every == 0 or last:
                    result.records.append(monitor(state))
                if history is not None and (n % config.output.history_every == 0 or last):
                    history.append(state.t, state.velocity(physics.rho_floor))
                snapshot(state, n)
        except (StepError, NonFiniteFieldError, CFLViolation, FloatingPointError) as exc:
            logger.error("run aborted at t=%r: %s", state.t, exc)
            result.error = {"t": float(state.t), "step": n, "type": type(exc).__name__, "message": str(exc)}
        result.final_state = state
        result.steps = n

    if out_dir is not None:
        fileio.write_timeseries(out_dir / "timeseries.csv", result.records, result.columns)
        (out_dir / "config.txt").write_text(dump(config))
        if result.error is not None:
            (out_dir / "error.json").write_text(json.dumps(result.error, indent=2, sort_keys=True) + "\n")
    return result



KINETIC_COLUMNS = ["t", "mass", "deviation", "err_rho", "err_u"]


@dataclass
class KineticResult:
    eps: float
    times: np.ndarray
    deviation: np.ndarray
    mass: np.ndarray
    err_rho: np.ndarray
    err_u: np.ndarray
    final_state: object = None
    steps: int = 0

    def csv_text(self):
        rows = zip(self.times, self.mass, self.deviation, self.err_rho, self.err_u)
        return fileio.table_text(KINETIC_COLUMNS, rows)


def kinetic_data(config):
    """``(rho0, u0, v)`` of a kinetic configuration on its ``x`` grid.

    ``v(x, t) = v_amp cos(v_omega t) + v_shear sin(2 pi x / L)``.
    """
    k = config.kinetic
    x = (np.arange(k.nx) + 0.5) * k.length / k.nx
    wave = np.sin(2 * np.pi * x / k.length)
    rho0 = 1.0 + k.rho_amp * wave
    u0 = k.u_amp * wave

    def v(xs, t):
        return k.v_amp * np.cos(k.v_omega * t) + k.v_shear * np.sin(2 * np.pi * np.asarray(xs) / k.length)

    return rho0, u0, v


def run_kinetic_config(config, eps=None, euler_reference=None, out_dir=None):
    """Kinetic run at ``eps`` (default ``kinetic.eps``) compared with the matched Euler run."""
    k = config.kinetic
    eps = k.eps if eps is None else eps
    t_end = config.time.t_end
    rho0, u0, v = kinetic_data(config)
    with scipy.fft.set_workers(config.run.workers):
        if euler_reference is None:
            euler_reference = kinetic.run_euler_line(rho0, u0, v, k.length, t_end, k.output_dt, cfl=k.cfl)
        state = kinetic.initial_state(rho0, u0, v, eps, k.length, k.nxi, k.thermal_width)
        kr = kinetic.run_kinetic(state, t_end, k.output_dt, k.alignment, k.cfl)
    err_rho, err_u = kinetic.limit_comparison(kr, *euler_reference, k.length)
    result = KineticResult(eps, kr.times, kr.deviation, kr.mass, err_rho, err_u, kr.final, kr.steps)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"kinetic_eps{eps:g}.csv").write_text(result.csv_text())
        fileio.write_kinetic_snapshot(out_dir / f"kinetic_eps{eps:g}.bin", kr.final)
    return result


def kinetic_sweep(config, out_dir=None):
    """One kinetic run per ``kinetic.eps_sweep`` entry, sharing the Euler reference."""
    k = config.kinetic
    rho0, u0, v = kinetic_data(config)
    reference = kinetic.run_euler_line(rho0, u0, v, k.length, config.time.t_end, k.output_dt, cfl=k.cfl)
    results = [run_kinetic_config(config, eps, reference, out_dir) for eps in k.eps_sweep]
    if out_dir is not None:
        (Path(out_dir) / "config.txt").write_text(dump(config))
    return results
