"""Post-processing of amplitude states: stress, density, displacement, profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import _apply_G_all, _potential, mode_symbols
from .fields import AmplitudeState, Grid2D, fft2, ifft2, spectral_divergence
from .model import equilibrium_amplitude

# Each listed mode q_j has a conjugate partner -q_j contributing the complex
# conjugate of its summand, so the physical stress is 2 Re of the three-mode sum.
# The factor is pinned by the uniform-strain calibration (lambda = mu = 3 phi^2).
CONJUGATE_MODE_FACTOR = 2.0


class DegenerateAmplitudeError(ValueError):
    pass


@dataclass
class StressField:
    sxx: np.ndarray
    sxy: np.ndarray
    syy: np.ndarray

    def components(self) -> dict[str, np.ndarray]:
        return {"sxx": self.sxx, "sxy": self.sxy, "syy": self.syy}

    def max_abs(self) -> float:
        return float(max(np.abs(c).max() for c in self.components().values()))

    def divergence(self, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
        return (
            spectral_divergence(self.sxx, self.sxy, grid),
            spectral_divergence(self.sxy, self.syy, grid),
        )


@dataclass
class Profile:
    coordinates: np.ndarray
    values: np.ndarray


def stress_from_amplitudes(state: AmplitudeState) -> StressField:
    grid = state.grid
    kx, ky = grid.wavenumbers
    q = state.modes.modes
    etas = state.etas
    g = _apply_G_all(etas, mode_symbols(state), _potential(state))
    g_hat = fft2(g)
    eta_hat = fft2(etas)
    qx = q[:, 0, None, None]
    qy = q[:, 1, None, None]
    # (d_l + i q_l) G eta  and  (d_m - i q_m) eta^*  for l, m in {x, y}
    ag_x = ifft2(1j * kx * g_hat) + 1j * qx * g
    ag_y = ifft2(1j * ky * g_hat) + 1j * qy * g
    be_x = np.conj(ifft2(1j * kx * eta_hat) + 1j * qx * etas)
    be_y = np.conj(ifft2(1j * ky * eta_hat) + 1j * qy * etas)

    def comp(a_l, b_m, a_m, b_l):
        return CONJUGATE_MODE_FACTOR * (a_l * b_m + a_m * b_l).sum(axis=0).real

    return StressField(
        sxx=comp(ag_x, be_x, ag_x, be_x),
        sxy=comp(ag_x, be_y, ag_y, be_x),
        syy=comp(ag_y, be_y, ag_y, be_y),
    )


def density_reconstruct(
    state: AmplitudeState,
    window: tuple[float, float, float, float] | None = None,
    oversample: int = 4,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Density ``n0 + sum_j eta_j exp(i q_j.r) + c.c.`` on a refined window.

    ``window`` is ``(x0, x1, y0, y1)``; amplitudes are Fourier-interpolated
    onto a grid ``oversample`` times finer. Returns ``(x, y, n)``.
    """
    if oversample < 4:
        raise ValueError("oversample must be >= 4 to resolve the atomic scale")
    grid = state.grid
    if window is None:
        window = (0.0, grid.lx, 0.0, grid.ly)
    x0, x1, y0, y1 = window
    if not (0 <= x0 < x1 <= grid.lx and 0 <= y0 < y1 <= grid.ly):
        raise IndexError(f"window {window} outside domain [0,{grid.lx}]x[0,{grid.ly}]")
    mx, my = grid.nx * oversample, grid.ny * oversample
    fine = _fourier_upsample(state.etas, mx, my)
    xf = np.arange(mx) * grid.lx / mx
    yf = np.arange(my) * grid.ly / my
    ix = np.nonzero((xf >= x0) & (xf <= x1))[0]
    iy = np.nonzero((yf >= y0) & (yf <= y1))[0]
    fine = fine[:, ix][:, :, iy]
    X, Y = np.meshgrid(xf[ix], yf[iy], indexing="ij")
    n = np.full(X.shape, state.params.n0, dtype=float)
    for (qx, qy), eta in zip(state.modes.modes, fine):
        n += 2.0 * (eta * np.exp(1j * (qx * X + qy * Y))).real
    return xf[ix], yf[iy], n


def _fourier_upsample(f: np.ndarray, mx: int, my: int) -> np.ndarray:
    nx, ny = f.shape[-2:]
    fh = np.fft.fftshift(fft2(f), axes=(-2, -1))
    padded = np.zeros(f.shape[:-2] + (mx, my), dtype=complex)
    ox, oy = mx // 2 - nx // 2, my // 2 - ny // 2
    padded[..., ox:ox + nx, oy:oy + ny] = fh
    scale = (mx * my) / (nx * ny)
    return ifft2(np.fft.ifftshift(padded, axes=(-2, -1))) * scale


def displacement_from_phases(state: AmplitudeState) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares ``u`` with ``q_j . u = arg(eta_j)``; no phase unwrapping."""
    phi = equilibrium_amplitude(state.params, 1.0)
    if np.abs(state.etas).min() < 1e-6 * phi:
        raise DegenerateAmplitudeError("amplitude vanishes somewhere; phases undefined")
    theta = np.angle(state.etas)
    q = state.modes.modes
    pinv = np.linalg.solve(q.T @ q, q.T)  # (2, N)
    u = np.tensordot(pinv, theta, axes=(1, 0))
    return u[0], u[1]


def inject_displacement(state: AmplitudeState, ux, uy) -> AmplitudeState:
    """Multiply each amplitude by ``exp(i q_j . u)``."""
    q = state.modes.modes
    phase = q[:, 0, None, None] * ux + q[:, 1, None, None] * uy
    return state.with_etas(state.etas * np.exp(1j * phase))


def line_profile(f: np.ndarray, grid: Grid2D, axis: str = "x", offset: float = 0.0) -> Profile:
    """Samples of ``f`` along the grid line parallel to ``axis`` nearest to ``offset``."""
    grid.check(f)
    if axis == "x":
        if not 0 <= offset < grid.ly:
            raise IndexError(f"offset {offset} outside [0, {grid.ly})")
        j = int(round(offset / grid.dy)) % grid.ny
        return Profile(grid.x.copy(), np.asarray(f[:, j]).copy())
    if axis == "y":
        if not 0 <= offset < grid.lx:
            raise IndexError(f"offset {offset} outside [0, {grid.lx})")
        i = int(round(offset / grid.dx)) % grid.nx
        return Profile(grid.y.copy(), np.asarray(f[i, :]).copy())
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
