"""Amplitude phase-field-crystal simulator with an Eshelby-inclusion oracle."""

from .model import (
    ModelParams,
    ReciprocalModeSet,
    triangular_mode_set,
    equilibrium_amplitude,
    phase_thresholds,
    lame_constants,
)
from .fields import Grid2D, InclusionSpec, AmplitudeState, beta_field, chi_w
from .dynamics import SolverConfig, RelaxationReport, free_energy, rhs, imex_step, relax
from .stress import StressField, stress_from_amplitudes, line_profile
from .eshelby import IsotropicElasticity, EshelbyProblem, eshelby_stress, lame_circular_reference

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "ReciprocalModeSet", "triangular_mode_set", "equilibrium_amplitude",
    "phase_thresholds", "lame_constants",
    "Grid2D", "InclusionSpec", "AmplitudeState", "beta_field", "chi_w",
    "SolverConfig", "RelaxationReport", "free_energy", "rhs", "imex_step", "relax",
    "StressField", "stress_from_amplitudes", "line_profile",
    "IsotropicElasticity", "EshelbyProblem", "eshelby_stress", "lame_circular_reference",
]
