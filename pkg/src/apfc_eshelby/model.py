"""Thermodynamic and lattice-level scalars of the one-mode triangular APFC model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class InvalidParameterError(ValueError):
    pass


class NoRealSolutionError(ValueError):
    """Raised when only the disordered (liquid) state exists."""


class EquilibriumBranch(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class ModelParams:
    b0x: float = 1.0
    delta_b0: float = 0.04
    tau: float = 0.5
    v: float = 1.0 / 3.0
    q0: float = 1.0
    n0: float = 0.0

    def __post_init__(self):
        if not (self.v > 0 and self.b0x > 0 and self.q0 > 0):
            raise InvalidParameterError("require v > 0, b0x > 0, q0 > 0")
        if self.tau <= 0:
            # The phi_+ branch selection assumes a positive cubic coefficient.
            raise InvalidParameterError("require tau > 0")
        if self.n0 != 0:
            raise InvalidParameterError("only n0 = 0 is supported")


@dataclass(frozen=True)
class ReciprocalModeSet:
    modes: np.ndarray  # shape (N, 2)
    a0: float

    @property
    def n(self) -> int:
        return len(self.modes)

    @property
    def q0(self) -> float:
        return float(np.linalg.norm(self.modes[0]))


def triangular_mode_set(q0: float = 1.0) -> ReciprocalModeSet:
    """Shortest reciprocal vectors of the 2D triangular lattice, scaled by ``q0``."""
    if not q0 > 0:
        raise InvalidParameterError(f"q0 must be positive, got {q0}")
    s = math.sqrt(3.0) / 2.0
    modes = q0 * np.array([[-s, -0.5], [0.0, 1.0], [s, -0.5]])
    return ReciprocalModeSet(modes=modes, a0=4.0 * math.pi / (math.sqrt(3.0) * q0))


def mismatch(p: ModelParams, beta):
    """Constant part ``q0^2 (beta^2 - 1)`` of the mode operator."""
    return p.q0**2 * (np.asarray(beta) ** 2 - 1.0)


def _discriminant(p: ModelParams, beta: float) -> float:
    return p.tau**2 - 15.0 * p.v * (p.delta_b0 + p.b0x * float(mismatch(p, beta)) ** 2)


def equilibrium_amplitude(
    p: ModelParams, beta: float = 1.0, branch: EquilibriumBranch = EquilibriumBranch.PLUS
) -> float:
    """Real amplitude of a relaxed crystal with all three amplitudes equal.

    Raises NoRealSolutionError when the discriminant is negative.
    """
    disc = _discriminant(p, beta)
    if disc < 0:
        raise NoRealSolutionError(
            f"discriminant {disc:.6g} < 0: no real amplitude (liquid-only regime)"
        )
    root = math.sqrt(disc)
    sign = 1.0 if EquilibriumBranch(branch) is EquilibriumBranch.PLUS else -1.0
    return (p.tau + sign * root) / (15.0 * p.v)


def phase_thresholds(p: ModelParams, beta: float = 1.0) -> tuple[float, float]:
    """Return ``(real_solution_bound, coexistence_bound)`` on delta_b0.

    Real amplitudes exist for ``delta_b0`` below the first value; the solid is
    favoured below the second.
    """
    m2 = p.b0x * float(mismatch(p, beta)) ** 2
    return (p.tau**2 / (15.0 * p.v) - m2, 8.0 * p.tau**2 / (135.0 * p.v) - m2)


def single_amplitude_energy_density(p: ModelParams, phi, beta: float = 1.0):
    """Energy density of the state with all amplitudes equal to ``phi``."""
    m2 = float(mismatch(p, beta)) ** 2
    return (
        3.0 * (p.delta_b0 + p.b0x * m2) * phi**2
        + 22.5 * p.v * phi**4
        - 4.0 * p.tau * phi**3
    )


# Plane-strain Poisson ratio of the triangular APFC lattice (lambda = mu).
PLANE_STRAIN_NU = 0.25


def lame_constants(phi: float) -> tuple[float, float]:
    lam = mu = 3.0 * phi**2
    return lam, mu


def youngs_modulus(lam: float, mu: float) -> float:
    if lam + mu == 0:
        return 0.0
    return mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
