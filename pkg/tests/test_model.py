import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apfc_eshelby.model import (
    PLANE_STRAIN_NU,
    EquilibriumBranch,
    InvalidParameterError,
    ModelParams,
    NoRealSolutionError,
    equilibrium_amplitude,
    lame_constants,
    phase_thresholds,
    single_amplitude_energy_density,
    triangular_mode_set,
    youngs_modulus,
)


def test_mode_set_unit():
    ms = triangular_mode_set(1.0)
    s = math.sqrt(3) / 2
    np.testing.assert_allclose(ms.modes, [[-s, -0.5], [0, 1], [s, -0.5]])
    assert ms.a0 == pytest.approx(4 * math.pi / math.sqrt(3))
    assert ms.a0 == pytest.approx(7.2552, abs=1e-4)
    np.testing.assert_allclose(ms.modes.sum(axis=0), 0, atol=1e-15)


def test_mode_set_scaling():
    ms = triangular_mode_set(2.0)
    np.testing.assert_allclose(np.linalg.norm(ms.modes, axis=1), 2.0)
    assert ms.a0 == pytest.approx(2 * math.pi / math.sqrt(3))


@pytest.mark.parametrize("q0", [0.0, -1.0])
def test_mode_set_rejects_nonpositive(q0):
    with pytest.raises(InvalidParameterError):
        triangular_mode_set(q0)


@pytest.mark.parametrize("q0", [0.5, 1.0, 3.0])
def test_mode_set_second_moment(q0):
    q = triangular_mode_set(q0).modes
    np.testing.assert_allclose(q.T @ q, 1.5 * q0**2 * np.eye(2), atol=1e-14)


def _quartic_minimizer_oracle(p, beta):
    # stationary points of the single-amplitude energy via polynomial roots
    m2 = (beta**2 - 1) ** 2
    deriv = [90 * p.v, -12 * p.tau, 6 * (p.delta_b0 + m2), 0.0]
    roots = np.roots(deriv)
    real = roots[np.abs(roots.imag) < 1e-12].real
    return max(real)


def test_equilibrium_amplitude_reference_value():
    p = ModelParams(tau=0.5, v=1 / 3, delta_b0=0.04)
    phi = equilibrium_amplitude(p, 1.0, EquilibriumBranch.PLUS)
    assert phi == pytest.approx((0.5 + math.sqrt(0.05)) / 5, rel=1e-14)
    assert phi == pytest.approx(0.144721, abs=1e-6)
    assert phi == pytest.approx(_quartic_minimizer_oracle(p, 1.0), rel=1e-12)


def test_equilibrium_amplitude_zero_discriminant():
    tau, v = 0.5, 1 / 3
    p = ModelParams(tau=tau, v=v, delta_b0=tau**2 / (15 * v))
    plus = equilibrium_amplitude(p, 1.0, "plus")
    minus = equilibrium_amplitude(p, 1.0, "minus")
    assert plus == pytest.approx(tau / (15 * v))
    assert minus == pytest.approx(plus)


def test_equilibrium_amplitude_liquid_only():
    with pytest.raises(NoRealSolutionError):
        equilibrium_amplitude(ModelParams(delta_b0=0.2), 1.0)


@given(
    dB=st.floats(-0.5, 0.06),
    beta=st.floats(0.9, 1.1),
)
def test_equilibrium_is_stationary_and_ordered(dB, beta):
    p = ModelParams(delta_b0=dB)
    try:
        plus = equilibrium_amplitude(p, beta, EquilibriumBranch.PLUS)
        minus = equilibrium_amplitude(p, beta, EquilibriumBranch.MINUS)
    except NoRealSolutionError:
        return
    assert plus >= minus
    m2 = (beta**2 - 1) ** 2
    for phi in (plus, minus):
        d = 6 * (dB + m2) * phi + 90 * p.v * phi**3 - 12 * p.tau * phi**2
        assert abs(d) < 1e-14


def test_phase_thresholds_reference():
    p = ModelParams(tau=0.5, v=1 / 3, delta_b0=0.04)
    real_bound, coexist = phase_thresholds(p, 1.0)
    assert coexist == pytest.approx(2 / 45)
    assert coexist == pytest.approx(0.044444, abs=1e-6)
    assert real_bound == pytest.approx(0.25 / 5)
    assert p.delta_b0 < coexist


def test_phase_thresholds_negative_for_large_mismatch():
    p = ModelParams()
    beta = math.sqrt(1 + 1.01 * math.sqrt(8 * p.tau**2 / (135 * p.v)))
    assert phase_thresholds(p, beta)[1] < 0


@given(st.floats(0.0, 0.3), st.floats(0.0, 0.3))
def test_phase_thresholds_monotone_in_mismatch(d1, d2):
    p = ModelParams()
    lo, hi = sorted((d1, d2))
    b_lo, b_hi = math.sqrt(1 + lo), math.sqrt(1 + hi)
    for k in range(2):
        assert phase_thresholds(p, b_hi)[k] <= phase_thresholds(p, b_lo)[k]


def test_single_amplitude_energy_minimum():
    p = ModelParams()
    phi = equilibrium_amplitude(p)
    f0 = single_amplitude_energy_density(p, phi)
    for scale in (0.9, 0.95, 1.05, 1.1):
        assert single_amplitude_energy_density(p, scale * phi) > f0


def test_lame_constants():
    lam, mu = lame_constants(0.144721)
    assert lam == mu == pytest.approx(0.062832, abs=1e-6)
    assert lame_constants(0.0) == (0.0, 0.0)
    assert youngs_modulus(1.0, 1.0) == pytest.approx(2.5)
    assert PLANE_STRAIN_NU == 0.25


@pytest.mark.parametrize(
    "kwargs", [{"v": 0.0}, {"b0x": -1.0}, {"q0": 0.0}, {"tau": 0.0}, {"n0": 0.1}]
)
def test_model_params_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        ModelParams(**kwargs)
