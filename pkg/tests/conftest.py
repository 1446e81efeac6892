import functools

import numpy as np
import pytest

from qbattery import dynamics, thermo
from qbattery.model import ScenarioConfig, build_model

COMBOS = [(s, e) for s in ("I", "II", "III") for e in ("a", "b")]

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def reference_run(scenario, example, g=None, t_max=60.0):
    """Trajectory and records at the reference parameters, cached per session."""
    cfg = ScenarioConfig.reference_defaults(scenario, example, g=g)
    traj = dynamics.integrate(build_model(cfg), t_max)
    return traj, thermo.evaluate_trajectory(traj)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, n_qubits, rank=None):
    d = 2**n_qubits
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
