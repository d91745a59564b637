import math

import numpy as np
import pytest

from apfc_eshelby.dynamics import (
    DivergenceError,
    SolverConfig,
    apply_G,
    free_energy,
    imex_step,
    linearized_operator,
    relax,
    rhs,
    _reflect,
)
from apfc_eshelby.fields import AmplitudeState, Grid2D, InclusionSpec, beta_field, fft2
from apfc_eshelby.model import InvalidParameterError, equilibrium_amplitude

A0 = 4 * math.pi / math.sqrt(3)


@pytest.fixture
def grid():
    return Grid2D.square(8 * A0, 32)


def smooth_random_state(grid, params, modes, phi, seed=0, amp=0.02, kmax=3):
    rng = np.random.default_rng(seed)
    n = np.abs(np.fft.fftfreq(grid.nx) * grid.nx)
    mask = (n[:, None] <= kmax) & (n[None, :] <= kmax)
    noise = np.fft.ifft2((rng.standard_normal((3, *grid.shape)) + 1j * rng.standard_normal((3, *grid.shape))) * mask)
    noise *= amp * phi / np.abs(noise).max()
    return AmplitudeState(grid, phi + noise, np.ones(grid.shape), params, modes)


def inclusion_state(grid, params, modes, phi, eps=0.01, r_a0=2.0, w_a0=0.5):
    inc = InclusionSpec((grid.lx / 2, grid.ly / 2), r_a0 * A0, w_a0 * A0, eps)
    return AmplitudeState.uniform(grid, phi, params, modes, beta_field(grid, inc))


def test_apply_G_constant(grid, modes, params):
    c = np.full(grid.shape, 0.3 + 0.1j)
    assert np.abs(apply_G(c, modes.modes[0], np.ones(grid.shape), grid)).max() < 1e-14
    b0 = 0.98
    out = apply_G(c, modes.modes[1], np.full(grid.shape, b0), grid)
    np.testing.assert_allclose(out, (b0**2 - 1) * c, atol=1e-14)


def test_apply_G_fourier_symbol(grid, modes):
    X, Y = grid.coords
    k = np.array([2 * 2 * np.pi / grid.lx, -1 * 2 * np.pi / grid.ly])
    eta = np.exp(1j * (k[0] * X + k[1] * Y))
    for q in modes.modes:
        out = apply_G(eta, q, np.ones(grid.shape), grid)
        np.testing.assert_allclose(out, (-k @ k - 2 * q @ k) * eta, atol=1e-12)


def test_free_energy_zero_state(grid, params, modes):
    assert free_energy(AmplitudeState.uniform(grid, 0.0, params, modes)) == 0.0


def test_free_energy_uniform_closed_form(grid, params, modes, phi_plus):
    for phi in (phi_plus, 0.1, 0.2):
        state = AmplitudeState.uniform(grid, phi, params, modes)
        closed = grid.area * (
            3 * params.delta_b0 * phi**2 + 22.5 * params.v * phi**4 - 4 * params.tau * phi**3
        )
        assert free_energy(state) == pytest.approx(closed, rel=1e-12)


def test_free_energy_minimized_by_phi_plus(grid, params, modes, phi_plus):
    f0 = free_energy(AmplitudeState.uniform(grid, phi_plus, params, modes))
    for s in (0.9, 1.1):
        assert free_energy(AmplitudeState.uniform(grid, s * phi_plus, params, modes)) > f0


def test_rhs_zero_state(grid, params, modes):
    assert np.abs(rhs(AmplitudeState.uniform(grid, 0.0, params, modes))).max() == 0.0


@pytest.mark.parametrize("beta0", [1.0, 1 / 1.01, 1 / 0.98])
def test_rhs_vanishes_at_equilibrium(grid, params, modes, beta0):
    phi = equilibrium_amplitude(params, beta0)
    state = AmplitudeState.uniform(grid, phi, params, modes, beta=beta0)
    assert np.abs(rhs(state)).max() < 1e-15


def test_rhs_resonant_term(grid, params, modes, phi_plus):
    etas = np.zeros((3, *grid.shape), dtype=complex)
    etas[1] = etas[2] = phi_plus
    state = AmplitudeState(grid, etas, np.ones(grid.shape), params, modes)
    np.testing.assert_allclose(rhs(state)[0], 2 * params.tau * phi_plus**2, rtol=1e-14)


def test_translation_equivariance(grid, params, modes, phi_plus):
    state = inclusion_state(grid, params, modes, phi_plus)
    state = state.with_etas(smooth_random_state(grid, params, modes, phi_plus).etas)
    shifted = AmplitudeState(
        grid, np.roll(state.etas, 1, axis=1), np.roll(state.beta, 1, axis=0), params, modes
    )
    base = rhs(state)
    np.testing.assert_allclose(rhs(shifted), np.roll(base, 1, axis=1), atol=1e-14 * np.abs(base).max())


def test_gauge_invariance(grid, params, modes, phi_plus):
    state = smooth_random_state(grid, params, modes, phi_plus, seed=5, amp=0.1)
    state = AmplitudeState(grid, state.etas, np.full(grid.shape, 1 / 1.01), params, modes)
    u0 = np.array([0.7, -1.3])
    phase = np.exp(1j * modes.modes @ u0)[:, None, None]
    f1 = free_energy(state)
    f2 = free_energy(state.with_etas(state.etas * phase))
    assert f2 == pytest.approx(f1, rel=1e-13)


def test_variational_consistency(grid, params, modes, phi_plus):
    state = inclusion_state(grid, params, modes, phi_plus, eps=0.02)
    state = state.with_etas(state.etas + smooth_random_state(grid, params, modes, phi_plus, seed=1).etas - phi_plus)
    pert = smooth_random_state(grid, params, modes, 1.0, seed=2, amp=1.0).etas - 1.0
    directional = -2 * np.real(np.vdot(rhs(state), pert)) * grid.cell_area
    errs = []
    for eps in (1e-4, 1e-5):
        fd = (free_energy(state.with_etas(state.etas + eps * pert))
              - free_energy(state.with_etas(state.etas - eps * pert))) / (2 * eps)
        errs.append(abs(fd - directional) / abs(directional))
    assert errs[1] < 1e-6


def test_imex_fixed_point(grid, params, modes, phi_plus):
    state = AmplitudeState.uniform(grid, phi_plus, params, modes)
    for scheme in ("diagonal", "linearized"):
        new = imex_step(state, SolverConfig(scheme=scheme, dt=10.0))
        np.testing.assert_allclose(new.etas, state.etas, atol=1e-15)
    zero = AmplitudeState.uniform(grid, 0.0, params, modes)
    assert np.abs(imex_step(zero, SolverConfig()).etas).max() == 0.0


def test_imex_step_decreases_energy(grid, params, modes, phi_plus):
    state = AmplitudeState.uniform(grid, 0.9 * phi_plus, params, modes)
    new = imex_step(state, SolverConfig(dt=0.1))
    assert free_energy(new) < free_energy(state)
    assert new.time == pytest.approx(0.1)


def test_imex_divergence_error(grid, params, modes):
    state = AmplitudeState.uniform(grid, 1e120, params, modes)
    with np.errstate(all="ignore"), pytest.raises(DivergenceError):
        imex_step(state, SolverConfig())


def test_dealias_toggle_keeps_fixed_point(grid, params, modes, phi_plus):
    state = AmplitudeState.uniform(grid, phi_plus, params, modes)
    new = imex_step(state, SolverConfig(dealias=True))
    np.testing.assert_allclose(new.etas, state.etas, atol=1e-15)
    noisy = smooth_random_state(grid, params, modes, phi_plus, kmax=15, amp=0.05)
    out = imex_step(noisy, SolverConfig(dealias=True))
    spec = np.abs(fft2(out.etas))
    assert spec[:, ~grid.dealias_mask].max() < 1e-12 * spec.max()


def test_solver_config_validation():
    with pytest.raises(InvalidParameterError):
        SolverConfig(dt=0.0)
    with pytest.raises(InvalidParameterError):
        SolverConfig(scheme="rk4")
    with pytest.raises(InvalidParameterError):
        SolverConfig(stabilization=-1.0)


def test_relax_from_equilibrium(grid, params, modes, phi_plus):
    state = AmplitudeState.uniform(grid, phi_plus, params, modes)
    out, rep = relax(state, SolverConfig())
    assert rep.converged and rep.steps_taken <= 2 and rep.final_residual < 1e-6


def test_relax_zero_steps(grid, params, modes, phi_plus):
    state = inclusion_state(grid, params, modes, phi_plus)
    out, rep = relax(state, SolverConfig(max_steps=0))
    assert out is state
    assert not rep.converged and rep.steps_taken == 0


def test_relax_inclusion_lowers_energy(grid, params, modes, phi_plus):
    state = inclusion_state(grid, params, modes, phi_plus)
    out, rep = relax(state, SolverConfig(dt=5.0, tol=1e-9, max_steps=2000, scheme="linearized"))
    assert rep.converged
    assert rep.energy_history[-1][1] < rep.energy_history[0][1]


def test_energy_monotone_default_dt(grid, params, modes, phi_plus):
    state = inclusion_state(grid, params, modes, phi_plus, eps=0.02)
    state = state.with_etas(smooth_random_state(grid, params, modes, phi_plus, seed=7, amp=0.05).etas)
    _, rep = relax(state, SolverConfig(max_steps=400, energy_check_every=1, tol=1e-14))
    energies = np.array([e for _, e in rep.energy_history])
    assert np.all(np.diff(energies) <= 1e-12 * np.abs(energies[1:]))


def test_relax_records_callback(grid, params, modes, phi_plus):
    seen = []
    state = inclusion_state(grid, params, modes, phi_plus)
    relax(state, SolverConfig(max_steps=5, tol=1e-30), callback=lambda k, s: seen.append((k, s.time)))
    assert [k for k, _ in seen] == [1, 2, 3, 4, 5]
    assert seen[-1][1] == pytest.approx(0.5)


def test_linearized_operator_matches_jacobian(params, modes, phi_plus):
    grid = Grid2D.square(4 * A0, 16)
    state = AmplitudeState.uniform(grid, phi_plus, params, modes)
    rng = np.random.default_rng(0)
    d = (rng.standard_normal((3, 16, 16)) + 1j * rng.standard_normal((3, 16, 16))) * 1e-7
    jd = (rhs(state.with_etas(state.etas + d)) - rhs(state.with_etas(state.etas - d))) / 2
    dh = fft2(d)
    z = np.concatenate([dh, np.conj(_reflect(dh))])
    pred = -np.einsum("xyab,bxy->axy", linearized_operator(state)[..., :3, :], z)
    np.testing.assert_allclose(fft2(jd), pred, atol=1e-9 * np.abs(pred).max())


def test_schemes_share_steady_state(params, modes, phi_plus):
    grid = Grid2D.square(12 * A0, 48)
    state = inclusion_state(grid, params, modes, phi_plus, eps=0.02, r_a0=2.0, w_a0=0.5)
    a, ra = relax(state, SolverConfig(dt=0.5, tol=1e-11, max_steps=20000))
    b, rb = relax(state, SolverConfig(dt=5.0, tol=1e-11, max_steps=20000, scheme="linearized"))
    assert ra.converged and rb.converged
    assert rb.steps_taken < ra.steps_taken / 5
    np.testing.assert_allclose(a.etas, b.etas, atol=1e-8)
