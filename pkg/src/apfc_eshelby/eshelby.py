"""Closed-form elastic fields of a dilatational circular inclusion in an infinite plane.

Two independent routes are provided: the Eshelby-tensor contraction
``C : (S : eps* - chi eps*)`` and the axisymmetric Lame solution with
``u = A r`` inside and ``u = A a^2 / r`` outside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid2D
from .model import PLANE_STRAIN_NU, InvalidParameterError, lame_constants, youngs_modulus
from .stress import StressField

DELTA = np.eye(2)


class SingularPointError(ValueError):
    pass


@dataclass(frozen=True)
class IsotropicElasticity:
    lam: float
    mu: float
    nu: float = PLANE_STRAIN_NU

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameterError("shear modulus must be positive")

    @property
    def e_mod(self) -> float:
        return youngs_modulus(self.lam, self.mu)

    @classmethod
    def from_amplitude(cls, phi: float) -> "IsotropicElasticity":
        lam, mu = lame_constants(phi)
        return cls(lam, mu)


@dataclass(frozen=True)
class EshelbyProblem:
    radius: float
    eigenstrain: float
    elastic: IsotropicElasticity
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParameterError("inclusion radius must be positive")


def elasticity_tensor(el: IsotropicElasticity) -> np.ndarray:
    d = DELTA
    return (
        el.lam * np.einsum("ij,mn->ijmn", d, d)
        + el.mu * (np.einsum("im,jn->ijmn", d, d) + np.einsum("in,jm->ijmn", d, d))
    )


def eshelby_interior(nu: float) -> np.ndarray:
    """Uniform interior Eshelby tensor of a circular inclusion (plane strain)."""
    if not 0 < nu < 0.5:
        raise InvalidParameterError(f"Poisson ratio must lie in (0, 0.5), got {nu}")
    d = DELTA
    sym = np.einsum("im,jn->ijmn", d, d) + np.einsum("in,jm->ijmn", d, d)
    return ((4 * nu - 1) * np.einsum("ij,mn->ijmn", d, d) + (3 - 4 * nu) * sym) / (8 * (1 - nu))


def eshelby_exterior(nu: float, point, a: float) -> np.ndarray:
    """Exterior Eshelby tensor at ``point`` (relative to the centre), shape ``(..., 2, 2, 2, 2)``."""
    if not 0 < nu < 0.5:
        raise InvalidParameterError(f"Poisson ratio must lie in (0, 0.5), got {nu}")
    x = np.asarray(point, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise SingularPointError("exterior Eshelby tensor is singular at the centre")
    e = x / r[..., None]
    rho2 = (a / r)[..., None, None, None, None] ** 2
    d = DELTA
    dd = np.einsum("ij,mn->ijmn", d, d)
    sym = np.einsum("im,jn->ijmn", d, d) + np.einsum("in,jm->ijmn", d, d)
    d_ij_ee_mn = np.einsum("ij,...m,...n->...ijmn", d, e, e)
    d_mn_ee_ij = np.einsum("mn,...i,...j->...ijmn", d, e, e)
    mixed = (
        np.einsum("im,...j,...n->...ijmn", d, e, e)
        + np.einsum("in,...j,...m->...ijmn", d, e, e)
        + np.einsum("jm,...i,...n->...ijmn", d, e, e)
        + np.einsum("jn,...i,...m->...ijmn", d, e, e)
    )
    eeee = np.einsum("...i,...j,...m,...n->...ijmn", e, e, e, e)
    bracket = (
        (rho2 + 4 * nu - 2) * dd
        + 4 * (1 - rho2) * d_ij_ee_mn
        + (rho2 - 4 * nu + 2) * sym
        + 4 * (1 - 2 * nu - rho2) * d_mn_ee_ij
        + 4 * (nu - rho2) * mixed
        + 8 * (3 * rho2 - 2) * eeee
    )
    return rho2 / (8 * (1 - nu)) * bracket


def _relative(prob: EshelbyProblem, points) -> np.ndarray:
    return np.asarray(points, dtype=float) - np.asarray(prob.center, dtype=float)


def eshelby_stress(prob: EshelbyProblem, points) -> np.ndarray:
    """Stress ``(..., 2, 2)`` from the Eshelby-tensor route; boundary points count as interior."""
    x = _relative(prob, points)
    r = np.linalg.norm(x, axis=-1)
    inside = r <= prob.radius
    eps_star = prob.eigenstrain * DELTA
    c = elasticity_tensor(prob.elastic)
    out = np.zeros(x.shape[:-1] + (2, 2))
    s_in = eshelby_interior(prob.elastic.nu)
    sigma_in = np.einsum("ijkl,kl->ij", c, np.einsum("klpq,pq->kl", s_in, eps_star) - eps_star)
    out[inside] = sigma_in
    if np.any(~inside):
        s_out = eshelby_exterior(prob.elastic.nu, x[~inside], prob.radius)
        strain = np.einsum("...klpq,pq->...kl", s_out, eps_star)
        out[~inside] = np.einsum("ijkl,...kl->...ij", c, strain)
    return out


def lame_circular_reference(prob: EshelbyProblem, points) -> np.ndarray:
    """Axisymmetric Lame solution for the same problem, in Cartesian components."""
    lam, mu = prob.elastic.lam, prob.elastic.mu
    eps = prob.eigenstrain
    amp = (lam + mu) * eps / (lam + 2 * mu)
    x = _relative(prob, points)
    r = np.linalg.norm(x, axis=-1)
    inside = r <= prob.radius
    out = np.zeros(x.shape[:-1] + (2, 2))
    out[inside] = 2 * (lam + mu) * (amp - eps) * DELTA
    xo = x[~inside]
    ro = r[~inside]
    e = xo / ro[:, None]
    rho2 = (prob.radius / ro) ** 2
    # sigma_rr = -2 mu A rho^2, sigma_tt = +2 mu A rho^2
    out[~inside] = 2 * mu * amp * rho2[:, None, None] * (DELTA - 2 * np.einsum("pi,pj->pij", e, e))
    return out


def sample_stress_field(prob: EshelbyProblem, grid: Grid2D, route: str = "eshelby") -> StressField:
    """Analytic stress on a periodic grid, positions taken by minimum image about the centre."""
    X, Y = grid.coords
    dx = X - prob.center[0]
    dy = Y - prob.center[1]
    dx -= grid.lx * np.round(dx / grid.lx)
    dy -= grid.ly * np.round(dy / grid.ly)
    pts = np.stack([dx, dy], axis=-1)
    centred = EshelbyProblem(prob.radius, prob.eigenstrain, prob.elastic, (0.0, 0.0))
    fn = eshelby_stress if route == "eshelby" else lame_circular_reference
    sig = fn(centred, pts)
    return StressField(sxx=sig[..., 0, 0], sxy=sig[..., 0, 1], syy=sig[..., 1, 1])
