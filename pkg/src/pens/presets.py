"""Named configurations, one per acceptance run.

``pens run <preset>`` and ``pens check <preset>`` accept these names
anywhere a config path is expected.
"""
from __future__ import annotations

from .config import parse

COUPLED = """\
# small Gaussian data in a 3D periodic box
[run]
phase = coupled
[grid]
dim = 3
n = 64
length = 50.0
[initial]
kind = gaussian
rho_bar = 1.0
rho_amp = 0.05
u_amp = 0.05
v_amp = 0.05
width = 3.0
[time]
t_end = 40.0
dt_max = 0.2
energy_dt = 0.03
[output]
diag_every = 1
history_every = 5
sobolev_s = 2
weighted_r = 0.0, 1.0
sample_points = 10
fit_windows = 5:35
"""

TAYLOR_GREEN = """\
[run]
phase = ns
[grid]
dim = 2
n = 64
length = 6.283185307179586
[initial]
kind = taylor_green
v_amp = 1.0
[physics]
drag = off
[time]
t_end = 1.0
dt_max = 0.001
[output]
diag_every = 100
"""

EULER_ORACLE = """\
# smooth 1D data, drag off, ends at about half the shock time
[run]
phase = euler
[grid]
dim = 1
n = 512
length = 1.0
[initial]
kind = sine
rho_amp = 0.05
u_amp = 0.05
[physics]
drag = off
theta = 2.0
[time]
t_end = 1.5
dt_max = 1.0
[output]
diag_every = 8
"""

KINETIC = """\
[run]
phase = kinetic
[kinetic]
nx = 128
nxi = 128
length = 10.0
eps_sweep = 0.2, 0.1, 0.05
rho_amp = 0.5
u_amp = 0.0
v_amp = 1.0
v_omega = 6.283185307179586
alignment = exact
output_dt = 0.1
[time]
t_end = 1.0
"""

HEAT = """\
# analytic Gaussian heat flow; the solver is not run
[run]
phase = ns
[time]
t_end = 1000.0
"""

DETERMINISM = """\
[run]
phase = coupled
[grid]
dim = 3
n = 32
length = 50.0
[initial]
kind = gaussian
[time]
t_end = 2.0
dt_max = 0.2
energy_dt = 0.03
[output]
diag_every = 1
"""

PRESETS = {
    "coupled": COUPLED,
    "taylor_green": TAYLOR_GREEN,
    "euler_oracle": EULER_ORACLE,
    "kinetic": KINETIC,
    "heat": HEAT,
    "determinism": DETERMINISM,
}


def preset_text(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


def load_preset(name):
    return parse(preset_text(name))
