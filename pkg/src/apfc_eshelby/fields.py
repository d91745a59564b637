"""Periodic grid, inclusion geometry and spectral derivatives.

Transform normalization: forward FFT unscaled, inverse scaled by 1/(nx*ny)
(the numpy/scipy default), so that ``sum |f|^2 == sum |fft(f)|^2 / (nx*ny)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from .model import InvalidParameterError, ModelParams, ReciprocalModeSet


class ShapeMismatchError(ValueError):
    pass


def fft2(a):
    return sfft.fft2(a, workers=-1)


def ifft2(a):
    return sfft.ifft2(a, workers=-1)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid. Arrays on it have shape ``(nx, ny)``, index ``[ix, iy]``."""

    lx: float
    ly: float
    nx: int
    ny: int

    def __post_init__(self):
        for n in (self.nx, self.ny):
            if n < 8 or n % 2:
                raise InvalidParameterError(f"grid counts must be even and >= 8, got {n}")
        if not (self.lx > 0 and self.ly > 0):
            raise InvalidParameterError("domain lengths must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable ``(kx[:, None], ky[None, :])``."""
        kx = 2 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        ky = 2 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)
        return kx[:, None], ky[None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        return kx**2 + ky**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kx, ky = self.wavenumbers
        kxmax = np.pi / self.dx
        kymax = np.pi / self.dy
        return (np.abs(kx) < 2.0 / 3.0 * kxmax) & (np.abs(ky) < 2.0 / 3.0 * kymax)

    @classmethod
    def square(cls, length: float, n: int) -> "Grid2D":
        return cls(length, length, n, n)

    def check(self, *arrays: np.ndarray) -> None:
        for a in arrays:
            if np.shape(a)[-2:] != self.shape:
                raise ShapeMismatchError(f"array shape {np.shape(a)} does not match grid {self.shape}")


@dataclass(frozen=True)
class InclusionSpec:
    center: tuple[float, float]
    radius: float
    width: float
    eigenstrain: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameterError("inclusion radius must be positive")
        if not self.width > 0:
            raise InvalidParameterError("interface width must be positive")
        if not self.eigenstrain > -1:
            raise InvalidParameterError("eigenstrain must exceed -1")

    @property
    def beta_inside(self) -> float:
        return 1.0 / (1.0 + self.eigenstrain)


def signed_distance_circle(point, inc: InclusionSpec, grid: Grid2D | None = None):
    """``|point - center| - R``; negative inside. Minimum image if ``grid`` is given."""
    px, py = point
    dx = np.asarray(px, dtype=float) - inc.center[0]
    dy = np.asarray(py, dtype=float) - inc.center[1]
    if grid is not None:
        dx = dx - grid.lx * np.round(dx / grid.lx)
        dy = dy - grid.ly * np.round(dy / grid.ly)
    return np.hypot(dx, dy) - inc.radius


def chi_w(d, w: float):
    """Smoothed indicator: 1 deep inside (d < 0), 0 in the matrix."""
    if not w > 0:
        raise InvalidParameterError(f"interface width must be positive, got {w}")
    return 0.5 * (1.0 - np.tanh(np.asarray(d) / w))


def beta_field(grid: Grid2D, inc: InclusionSpec) -> np.ndarray:
    d = signed_distance_circle(grid.coords, inc, grid)
    return 1.0 + (inc.beta_inside - 1.0) * chi_w(d, inc.width)


def spectral_gradient(f: np.ndarray, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    grid.check(f)
    kx, ky = grid.wavenumbers
    fh = fft2(f)
    gx, gy = ifft2(1j * kx * fh), ifft2(1j * ky * fh)
    if np.isrealobj(f):
        return gx.real, gy.real
    return gx, gy


def spectral_laplacian(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    grid.check(f)
    out = ifft2(-grid.k2 * fft2(f))
    return out.real if np.isrealobj(f) else out


def spectral_divergence(fx: np.ndarray, fy: np.ndarray, grid: Grid2D) -> np.ndarray:
    kx, ky = grid.wavenumbers
    out = ifft2(1j * kx * fft2(fx) + 1j * ky * fft2(fy))
    return out.real if np.isrealobj(fx) and np.isrealobj(fy) else out


@dataclass
class AmplitudeState:
    """Complex amplitudes ``etas`` of shape ``(N, nx, ny)`` plus the beta field."""

    grid: Grid2D
    etas: np.ndarray
    beta: np.ndarray
    params: ModelParams
    modes: ReciprocalModeSet
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.etas = np.asarray(self.etas, dtype=complex)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.etas.shape != (self.modes.n, *self.grid.shape):
            raise ShapeMismatchError(
                f"etas shape {self.etas.shape} != {(self.modes.n, *self.grid.shape)}"
            )
        self.grid.check(self.beta)
        if not np.all(self.beta > 0):
            raise InvalidParameterError("beta must be positive everywhere")

    def with_etas(self, etas: np.ndarray, time: float | None = None) -> "AmplitudeState":
        return replace(self, etas=etas, time=self.time if time is None else time)

    @classmethod
    def uniform(
        cls,
        grid: Grid2D,
        amplitude: complex,
        params: ModelParams,
        modes: ReciprocalModeSet,
        beta: np.ndarray | float = 1.0,
    ) -> "AmplitudeState":
        etas = np.full((modes.n, *grid.shape), amplitude, dtype=complex)
        beta = np.broadcast_to(np.asarray(beta, dtype=float), grid.shape).copy()
        return cls(grid, etas, beta, params, modes)


def default_grid_for(box_cells: float, a0: float, points_per_a0: int = 4) -> Grid2D:
    """Square grid of side ``box_cells * a0`` with spacing ``a0 / points_per_a0``."""
    n = int(round(box_cells * points_per_a0))
    n += n % 2
    return Grid2D.square(box_cells * a0, n)
