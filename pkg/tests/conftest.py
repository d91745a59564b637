import dataclasses

import pytest

from apfc_eshelby.config import RunConfig
from apfc_eshelby.dynamics import SolverConfig
from apfc_eshelby.experiment import run_single
from apfc_eshelby.model import ModelParams, equilibrium_amplitude, triangular_mode_set

ACCEPTANCE_LINES: list[str] = []

DESK = RunConfig(
    box_a0=64.0,
    points_per_a0=4,
    radius_a0=6.0,
    width_a0=1.0,
    eigenstrain=0.01,
    solver=SolverConfig(dt=50.0, tol=1e-9, max_steps=5000, energy_check_every=10, scheme="linearized"),
    tol_per_eigenstrain=1e-7,
    dump_fields=False,
    figures=False,
)

_RUNS = {}


def desk_run(width_a0=1.0, eigenstrain=0.01):
    """Relaxed desk-scale inclusion, cached for the whole session."""
    key = (width_a0, eigenstrain)
    if key not in _RUNS:
        cfg = dataclasses.replace(DESK, width_a0=width_a0, eigenstrain=eigenstrain)
        _RUNS[key] = run_single(cfg, write=False, label=f"w={width_a0} eps={eigenstrain}")
    return _RUNS[key]


@pytest.fixture(scope="session")
def params():
    return ModelParams()


@pytest.fixture(scope="session")
def modes():
    return triangular_mode_set(1.0)


@pytest.fixture(scope="session")
def phi_plus(params):
    return equilibrium_amplitude(params, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
