"""Two-phase pressureless Euler / incompressible Navier-Stokes solver with drag coupling."""
from .config import RunConfig, parse
from .coupler import FluidState, Physics, StepControl, step
from .runner import run
from .spectral import Grid

__all__ = ["FluidState", "Grid", "Physics", "RunConfig", "StepControl", "parse", "run", "step"]
__version__ = "0.1.0"
