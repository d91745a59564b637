"""APFC amplitude dynamics: mode operator, free energy and IMEX relaxation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .fields import AmplitudeState, Grid2D, fft2, ifft2
from .model import InvalidParameterError, equilibrium_amplitude, mismatch

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.1
    tol: float = 1e-6
    max_steps: int = 100_000
    energy_check_every: int = 100
    # Constant added to both the implicit and explicit side; 0 gives the plain scheme.
    stabilization: float = 0.0
    dealias: bool = False
    # "diagonal": constant-coefficient part of each mode implicit.
    # "linearized": full linearization about the relaxed crystal implicit.
    scheme: str = "diagonal"

    def __post_init__(self):
        if not (self.dt > 0 and self.tol > 0):
            raise InvalidParameterError("dt and tol must be positive")
        if self.max_steps < 0 or self.energy_check_every < 1:
            raise InvalidParameterError("max_steps >= 0 and energy_check_every >= 1 required")
        if self.stabilization < 0:
            raise InvalidParameterError("stabilization must be non-negative")
        if self.scheme not in ("diagonal", "linearized"):
            raise InvalidParameterError(f"unknown scheme {self.scheme!r}")


@dataclass
class RelaxationReport:
    steps_taken: int = 0
    final_residual: float = float("inf")
    converged: bool = False
    energy_history: list[tuple[float, float]] = field(default_factory=list)


@lru_cache(maxsize=16)
def _mode_symbols(grid: Grid2D, modes_key: tuple) -> np.ndarray:
    """Fourier symbols ``-|k|^2 - 2 q_j.k`` of ``lap + 2i q_j.grad``, shape (N, nx, ny)."""
    kx, ky = grid.wavenumbers
    return np.stack([-grid.k2 - 2.0 * (qx * kx + qy * ky) for qx, qy in modes_key])


def mode_symbols(state: AmplitudeState) -> np.ndarray:
    return _mode_symbols(state.grid, tuple(map(tuple, state.modes.modes)))


def apply_G(eta: np.ndarray, q_j, beta: np.ndarray, grid: Grid2D, params=None) -> np.ndarray:
    """``(lap + 2i q.grad + q0^2 (beta^2 - 1)) eta`` for a single mode."""
    grid.check(eta, beta)
    q0 = 1.0 if params is None else params.q0
    sym = _mode_symbols(grid, (tuple(q_j),))[0]
    return ifft2(sym * fft2(eta)) + q0**2 * (beta**2 - 1.0) * eta


def _apply_G_all(etas: np.ndarray, symbols: np.ndarray, pot: np.ndarray) -> np.ndarray:
    return ifft2(symbols * fft2(etas)) + pot * etas


def _potential(state: AmplitudeState) -> np.ndarray:
    return mismatch(state.params, state.beta)


def _resonant_derivative(etas: np.ndarray, tau: float) -> np.ndarray:
    """d f_tri / d eta_j^* for f_tri = -2 tau (e1 e2 e3 + c.c.)."""
    c = np.conj(etas)
    return -2.0 * tau * np.stack([c[1] * c[2], c[2] * c[0], c[0] * c[1]])


def energy_density(state: AmplitudeState) -> np.ndarray:
    p = state.params
    etas = state.etas
    g = _apply_G_all(etas, mode_symbols(state), _potential(state))
    mod2 = np.abs(etas) ** 2
    phi = 2.0 * mod2.sum(axis=0)
    return (
        (p.b0x * np.abs(g) ** 2 - 1.5 * p.v * mod2**2).sum(axis=0)
        + 0.5 * p.delta_b0 * phi
        + 0.75 * p.v * phi**2
        - 4.0 * p.tau * (etas[0] * etas[1] * etas[2]).real
    )


def free_energy(state: AmplitudeState) -> float:
    """Rectangle-rule integral of the APFC energy density over the periodic cell."""
    return float(energy_density(state).sum() * state.grid.cell_area)


def rhs(state: AmplitudeState) -> np.ndarray:
    """Time derivative of each amplitude, shape (N, nx, ny)."""
    p = state.params
    etas = state.etas
    symbols = mode_symbols(state)
    pot = _potential(state)
    g2 = _apply_G_all(_apply_G_all(etas, symbols, pot), symbols, pot)
    mod2 = np.abs(etas) ** 2
    phi = 2.0 * mod2.sum(axis=0)
    out = -(p.delta_b0 * etas + p.b0x * g2 + 3.0 * p.v * (phi - mod2) * etas)
    out -= _resonant_derivative(etas, p.tau)
    qnorm = np.linalg.norm(state.modes.modes, axis=1)
    return qnorm[:, None, None] * out


def _implicit_coefficient(state: AmplitudeState, cfg: SolverConfig) -> np.ndarray:
    p = state.params
    return p.delta_b0 + cfg.stabilization + p.b0x * mode_symbols(state) ** 2


def linearized_operator(state: AmplitudeState) -> np.ndarray:
    """Minus the Jacobian of ``rhs`` about the relaxed crystal at beta = 1.

    Acts on ``[eta_hat_j(k), conj(eta_hat_j(-k))]``; shape ``(nx, ny, 2N, 2N)``.
    """
    return _linearized_operator(state.grid, state.params, tuple(map(tuple, state.modes.modes)))


@lru_cache(maxsize=4)
def _linearized_operator(grid: Grid2D, p, modes_key: tuple) -> np.ndarray:
    n = len(modes_key)
    if n != 3:
        raise InvalidParameterError("linearized scheme supports the three-mode set only")
    phi = equilibrium_amplitude(p, 1.0)
    kx, ky = grid.wavenumbers
    plus = _mode_symbols(grid, modes_key)
    # symbol at -k
    minus = np.stack([-grid.k2 + 2.0 * (qx * kx + qy * ky) for qx, qy in modes_key])
    quad = 3.0 * p.v * phi**2
    res = 2.0 * p.tau * phi
    couple = quad * (2.0 - np.eye(n))
    cross = couple - res * (1.0 - np.eye(n))
    m = np.zeros(grid.shape + (2 * n, 2 * n))
    m[..., :n, :n] = couple
    m[..., :n, n:] = cross
    m[..., n:, :n] = cross
    m[..., n:, n:] = couple
    for j in range(n):
        base = p.delta_b0 + 5.0 * quad
        m[..., j, j] += base + p.b0x * plus[j] ** 2
        m[..., n + j, n + j] += base + p.b0x * minus[j] ** 2
    qnorm = np.linalg.norm(np.asarray(modes_key), axis=1)
    return np.concatenate([qnorm, qnorm])[:, None] * m


@lru_cache(maxsize=4)
def _linearized_propagator(grid: Grid2D, p, modes_key: tuple, dt: float) -> np.ndarray:
    m = _linearized_operator(grid, p, modes_key)
    eye = np.eye(m.shape[-1])
    n = len(modes_key)
    return dt * np.linalg.inv(eye + dt * m)[..., :n, :]


def _reflect(a: np.ndarray) -> np.ndarray:
    """``a[..., -k]`` on FFT index layout."""
    return np.roll(np.flip(a, axis=(-2, -1)), 1, axis=(-2, -1))


def imex_step(state: AmplitudeState, cfg: SolverConfig) -> AmplitudeState:
    """One first-order semi-implicit Fourier step.

    With the diagonal scheme ``delta_b0 + b0x * L_j^2`` (plus the optional
    stabilization constant) is implicit and the beta cross-terms, nonlinear
    and resonant terms are explicit. Both schemes are written as
    ``(1 + dt M) d_eta = dt * rhs`` so exact steady states are fixed points.
    """
    eta_hat = fft2(state.etas)
    rhs_hat = fft2(rhs(state))
    if cfg.scheme == "diagonal":
        qnorm = np.linalg.norm(state.modes.modes, axis=1)[:, None, None]
        implicit = qnorm * _implicit_coefficient(state, cfg)
        new_hat = eta_hat + cfg.dt * rhs_hat / (1.0 + cfg.dt * implicit)
    else:
        prop = _linearized_propagator(
            state.grid, state.params, tuple(map(tuple, state.modes.modes)), cfg.dt
        )
        z = np.concatenate([rhs_hat, np.conj(_reflect(rhs_hat))])
        new_hat = eta_hat + np.einsum("xyab,bxy->axy", prop, z, optimize=True)
    if cfg.dealias:
        new_hat *= state.grid.dealias_mask
    new = ifft2(new_hat)
    if not np.all(np.isfinite(new)):
        raise DivergenceError(f"non-finite amplitudes at t={state.time:.4g}; reduce dt (now {cfg.dt})")
    return state.with_etas(new, state.time + cfg.dt)


def initial_state(state_like: AmplitudeState) -> AmplitudeState:
    """Amplitudes set to the relaxed value at beta = 1 everywhere."""
    phi = equilibrium_amplitude(state_like.params, 1.0)
    return state_like.with_etas(np.full_like(state_like.etas, phi), 0.0)


def relax(
    state: AmplitudeState,
    cfg: SolverConfig = SolverConfig(),
    callback: Callable[[int, AmplitudeState], None] | None = None,
) -> tuple[AmplitudeState, RelaxationReport]:
    """Step until ``max_j |d eta_j|_inf / dt < tol`` or ``cfg.max_steps``."""
    report = RelaxationReport()
    report.energy_history.append((state.time, free_energy(state)))
    for step in range(1, cfg.max_steps + 1):
        new = imex_step(state, cfg)
        residual = float(np.abs(new.etas - state.etas).max() / cfg.dt)
        state = new
        report.steps_taken = step
        report.final_residual = residual
        done = residual < cfg.tol
        if done or step % cfg.energy_check_every == 0:
            report.energy_history.append((state.time, free_energy(state)))
            log.debug("step %d t=%.4g residual=%.3e", step, state.time, residual)
        if callback is not None:
            callback(step, state)
        if done:
            report.converged = True
            break
    if not report.converged:
        log.warning("relaxation not converged after %d steps (residual %.3e)",
                    report.steps_taken, report.final_residual)
    return state, report
