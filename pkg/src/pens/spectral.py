"""Periodic grid, real-to-complex transforms and spectral operators.

Fields are plain numpy arrays: a scalar field has shape ``grid.shape``, a
vector field ``(d, *grid.shape)``.  Spectral fields use the half-spectrum
layout of :func:`scipy.fft.rfftn` (last axis truncated to ``N//2 + 1``).

Normalization: the forward transform carries ``1/N**d``, so the ``k=0``
coefficient is the mean of the field and

    sum(f**2) * h**d == L**d * sum_{full k} |c_k|**2

which is what :func:`l2_spectral` evaluates from the half spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class NonFiniteFieldError(ValueError):
    """Raised when a field handed to a transform contains NaN or Inf."""

    def __init__(self, name, index, value):
        self.index = tuple(int(i) for i in index)
        self.value = value
        super().__init__(f"{name} is not finite at index {self.index}: {value!r}")


def check_finite(field, name="field"):
    field = np.asarray(field)
    if not np.all(np.isfinite(field)):
        bad = np.argwhere(~np.isfinite(field))[0]
        raise NonFiniteFieldError(name, bad, field[tuple(bad)])
    return field


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per axis on ``[0, length)**dim``."""

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def h(self):
        return self.length / self.n

    @property
    def cell_volume(self):
        return self.h**self.dim

    @property
    def volume(self):
        return self.length**self.dim

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def axes(self):
        return tuple(range(-self.dim, 0))

    @cached_property
    def x1d(self):
        return np.arange(self.n) * self.h

    @cached_property
    def coords(self):
        """Tuple of ``dim`` coordinate arrays (``ij`` indexing)."""
        return np.meshgrid(*([self.x1d] * self.dim), indexing="ij")

    @cached_property
    def integer_wavenumbers(self):
        """Integer wavevector components, each broadcastable to ``spectral_shape``."""
        out = []
        for axis in range(self.dim):
            if axis == self.dim - 1:
                k = np.arange(self.n // 2 + 1)
            else:
                k = np.fft.fftfreq(self.n, 1.0 / self.n).round().astype(int)
            shape = [1] * self.dim
            shape[axis] = k.size
            out.append(k.reshape(shape))
        return tuple(out)

    @cached_property
    def wavenumbers(self):
        """Physical wavenumbers ``2*pi*k/L`` per axis (Nyquist included)."""
        return tuple(2 * np.pi * k / self.length for k in self.integer_wavenumbers)

    @cached_property
    def derivative_wavenumbers(self):
        """Wavenumbers used for differentiation; the Nyquist entry is zero."""
        out = []
        for k, kap in zip(self.integer_wavenumbers, self.wavenumbers):
            out.append(np.where(np.abs(k) == self.n // 2, 0.0, kap))
        return tuple(out)

    @cached_property
    def k2(self):
        """``|2*pi*k/L|**2`` on the half spectrum, full wavenumbers."""
        return sum(np.broadcast_to(kap, self.spectral_shape) ** 2 for kap in self.wavenumbers)

    @cached_property
    def half_weights(self):
        """Multiplicity of each stored coefficient in the full spectrum."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        shape = [1] * self.dim
        shape[-1] = w.size
        return np.broadcast_to(w.reshape(shape), self.spectral_shape)

    @cached_property
    def dealias_mask(self):
        keep = np.ones(self.spectral_shape, dtype=bool)
        for k in self.integer_wavenumbers:
            keep &= np.abs(k) <= self.n / 3
        return keep

    def mean_index(self):
        return (0,) * self.dim

    def sum(self, field):
        """Cell-volume weighted integral over the box (scalar or per component)."""
        axes = self.axes
        return np.sum(field, axis=axes) * self.cell_volume


def forward(field, grid):
    """Real field (scalar or vector) -> half-spectrum coefficients."""
    check_finite(field)
    return sfft.rfftn(field, axes=grid.axes, norm="forward")


def inverse(coeffs, grid):
    return sfft.irfftn(coeffs, s=grid.shape, axes=grid.axes, norm="forward")


def l2_spectral(coeffs, grid, weight=None):
    """Physical L2 norm evaluated from half-spectrum coefficients.

    ``weight`` is an optional real multiplier on ``|c_k|**2`` (e.g. a
    Sobolev symbol).  Vector coefficients are summed over components.
    """
    c2 = np.abs(coeffs) ** 2
    if c2.ndim > grid.dim:
        c2 = c2.sum(axis=0)
    w = grid.half_weights if weight is None else grid.half_weights * weight
    return float(np.sqrt(grid.volume * np.sum(w * c2)))


def l2_grid(field, grid):
    return float(np.sqrt(np.sum(np.asarray(field) ** 2) * grid.cell_volume))


def gradient(s, grid):
    """Spectral gradient: returns ``(d, *spectral_shape)`` coefficients."""
    return np.stack([1j * kap * s for kap in grid.derivative_wavenumbers])


def divergence(vhat, grid):
    return sum(1j * kap * vhat[i] for i, kap in enumerate(grid.derivative_wavenumbers))


def laplacian_symbol(grid):
    return -grid.k2


def leray_project(vhat, grid):
    """Apply ``I - k k^T / |k|^2`` mode by mode; the mean mode is untouched.

    In one dimension only constants are solenoidal, so every other mode is
    set to exactly zero instead of to a roundoff residue.
    """
    if grid.dim == 1:
        out = np.zeros_like(vhat)
        out[(slice(None),) + grid.mean_index()] = vhat[(slice(None),) + grid.mean_index()]
        return out
    kap = [np.broadcast_to(k, grid.spectral_shape) for k in grid.derivative_wavenumbers]
    kk = sum(k * k for k in kap)
    safe = np.where(kk == 0.0, 1.0, kk)
    kdotv = sum(k * vhat[i] for i, k in enumerate(kap)) / safe
    return np.stack([vhat[i] - kap[i] * kdotv for i in range(grid.dim)])


def dealias(s, grid):
    """2/3 rule: zero every coefficient with some ``|k_i| > N/3``."""
    return np.where(grid.dealias_mask, s, 0.0)


def sobolev_norm(field, grid, order):
    """Discrete ``H^order`` norm with symbol ``(1 + |2 pi k / L|^2)**order``."""
    if int(order) != order or order < 0:
        raise ValueError(f"Sobolev order must be a nonnegative integer, got {order}")
    coeffs = forward(field, grid)
    return l2_spectral(coeffs, grid, (1.0 + grid.k2) ** order)


def seminorm(field, grid, order):
    """``||grad^order f||_{L2}`` computed spectrally (symbol ``|2 pi k / L|^(2 order)``)."""
    if int(order) != order or order < 0:
        raise ValueError(f"derivative order must be a nonnegative integer, got {order}")
    coeffs = forward(field, grid)
    if order == 0:
        return l2_spectral(coeffs, grid)
    return l2_spectral(coeffs, grid, grid.k2**order)


def curl(vhat, grid):
    """Spectral curl of a 3D vector field (used to build solenoidal data)."""
    if grid.dim != 3:
        raise ValueError("curl is defined for dim == 3 only")
    k = grid.derivative_wavenumbers
    return np.stack(
        [
            1j * (k[1] * vhat[2] - k[2] * vhat[1]),
            1j * (k[2] * vhat[0] - k[0] * vhat[2]),
            1j * (k[0] * vhat[1] - k[1] * vhat[0]),
        ]
    )
