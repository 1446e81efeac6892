"""Operators for the three reservoir/charger/battery coupling scenarios.

Subsystems are ordered ``S1, S2, C, B``; scenario I has no charger and uses
``S1, S2, B``.  Each qubit has ``H = omega |1><1|`` so the all-ground state
sits at zero energy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import qcore
from .errors import ConfigurationError
from .qcore import DensityMatrix, SIGMA_MINUS, SIGMA_PLUS


class Scenario(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"


class Example(str, enum.Enum):
    a = "a"  # incoherent: a single computational basis state
    b = "b"  # coherent reservoir pair and charger


RESONANCE_RTOL = 1e-12
COMMUTATOR_TOL = 1e-10

OMEGA_S1 = 5.0
OMEGA_S2 = 10.0
REFERENCE_G_FACTORS = (0.03, 0.05, 0.07, 0.09)


def reference_couplings(omega_S2=OMEGA_S2) -> tuple:
    """Reference coupling strengths, rounded so ``0.07 * 10`` prints as ``0.7``."""
    return tuple(round(f * omega_S2, 12) for f in REFERENCE_G_FACTORS)


def labels_for(scenario) -> tuple:
    return ("S1", "S2", "B") if Scenario(scenario) is Scenario.I else ("S1", "S2", "C", "B")


def default_frequencies(scenario, omega_S1=OMEGA_S1, omega_S2=OMEGA_S2):
    """Charger and battery frequencies that satisfy each scenario's resonance.

    Returns ``(omega_C, omega_B)``; ``omega_C`` is ``None`` for scenario I.
    In scenario II the flip ``|0110> <-> |1001>`` conserves free energy only
    when ``omega_B - omega_C = omega_S2 - omega_S1``, so the charger sits at
    ``omega_S1`` and the battery at ``omega_S2``.
    """
    gap = omega_S2 - omega_S1
    scenario = Scenario(scenario)
    if scenario is Scenario.I:
        return None, gap
    if scenario is Scenario.II:
        return omega_S1, omega_S1 + gap
    return gap, gap


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical parameters of one run (hbar = k_B = 1).

    :meth:`reference_defaults` fills everything from the reference parameter set;
    direct construction expects every relevant field to be given.
    """

    scenario: Scenario
    omega_S1: float
    omega_S2: float
    omega_B: float
    g: float
    gamma1: float
    gamma2: float
    T: float
    omega_C: float | None = None
    k: float = 0.0
    initial_example: Example = Example.a

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "initial_example", Example(self.initial_example))

    @classmethod
    def reference_defaults(cls, scenario, example="a", g=None, **overrides) -> ScenarioConfig:
        scenario = Scenario(scenario)
        omega_S1 = overrides.pop("omega_S1", OMEGA_S1)
        omega_S2 = overrides.pop("omega_S2", OMEGA_S2)
        omega_C, omega_B = default_frequencies(scenario, omega_S1, omega_S2)
        omega_C = overrides.pop("omega_C", omega_C)
        omega_B = overrides.pop("omega_B", omega_B)
        if scenario is Scenario.I:
            omega_C = None
        k = overrides.pop("k", None)
        if k is None:
            k = 0.03 * omega_C if scenario is Scenario.III else 0.0
        params = dict(
            scenario=scenario,
            omega_S1=omega_S1,
            omega_S2=omega_S2,
            omega_C=omega_C,
            omega_B=omega_B,
            g=0.05 * omega_S2 if g is None else g,
            k=k,
            gamma1=0.01 * omega_S1,
            gamma2=0.01 * omega_S2,
            T=omega_S1,
            initial_example=example,
        )
        unknown = set(overrides) - set(params)
        if unknown:
            raise ConfigurationError(f"unknown config fields {sorted(unknown)}")
        params.update(overrides)
        return cls(**params)

    def with_(self, **changes) -> ScenarioConfig:
        return replace(self, **changes)

    @property
    def labels(self) -> tuple:
        return labels_for(self.scenario)

    @property
    def dim(self) -> int:
        return 2 ** len(self.labels)

    def frequency(self, label: str) -> float:
        return {"S1": self.omega_S1, "S2": self.omega_S2, "C": self.omega_C, "B": self.omega_B}[label]


@dataclass(frozen=True)
class ResonanceReport:
    ok: bool
    failures: tuple = ()

    def __bool__(self):
        return self.ok


def _close(a, b):
    return math.isclose(a, b, rel_tol=RESONANCE_RTOL, abs_tol=0.0)


def validate_resonance(config: ScenarioConfig) -> ResonanceReport:
    failures = []
    gap = config.omega_S2 - config.omega_S1
    if not config.omega_S2 > config.omega_S1:
        failures.append("omega_S2 > omega_S1")
    if config.scenario is Scenario.I:
        if not _close(config.omega_B, gap):
            failures.append("omega_B == omega_S2 - omega_S1")
    elif config.scenario is Scenario.II:
        if config.omega_C is None or not _close(config.omega_B - config.omega_C, gap):
            failures.append("omega_S2 - omega_S1 == omega_B - omega_C")
        if config.omega_C is None or not config.omega_B > config.omega_C:
            failures.append("omega_B > omega_C")
    else:
        if config.omega_C is None or not _close(config.omega_C, gap):
            failures.append("omega_C == omega_S2 - omega_S1")
        if not _close(config.omega_B, gap):
            failures.append("omega_B == omega_S2 - omega_S1")
    return ResonanceReport(not failures, tuple(failures))


def check_config(config: ScenarioConfig) -> ScenarioConfig:
    """Raise :class:`ConfigurationError` naming the first violated field."""
    freqs = {"omega_S1": config.omega_S1, "omega_S2": config.omega_S2, "omega_B": config.omega_B}
    if config.scenario is not Scenario.I:
        if config.omega_C is None:
            raise ConfigurationError("omega_C is required for scenarios II and III")
        freqs["omega_C"] = config.omega_C
    for name, value in freqs.items():
        if not value > 0:
            raise ConfigurationError(f"{name} must be positive, got {value}")
    for name, gamma, omega in (("gamma1", config.gamma1, config.omega_S1),
                               ("gamma2", config.gamma2, config.omega_S2)):
        if gamma < 0 or gamma > 0.1 * omega:
            raise ConfigurationError(f"{name}={gamma} outside weak-dissipation range [0, 0.1*omega]")
    if config.g < 0 or config.g > 0.1 * config.omega_S2:
        raise ConfigurationError(f"g={config.g} outside weak-coupling range [0, 0.1*omega_S2]")
    if config.k < 0:
        raise ConfigurationError(f"k must be nonnegative, got {config.k}")
    if config.T < 0:
        raise ConfigurationError(f"T must be nonnegative, got {config.T}")
    report = validate_resonance(config)
    if not report:
        raise ConfigurationError(
            f"scenario {config.scenario.value} resonance violated: {'; '.join(report.failures)}"
        )
    return config


def bose_occupation(T: float, omega: float) -> float:
    if omega <= 0:
        raise ConfigurationError(f"frequency must be positive, got {omega}")
    if T < 0:
        raise ConfigurationError(f"temperature must be nonnegative, got {T}")
    if T == 0:
        return 0.0
    return 1.0 / math.expm1(omega / T)


def build_free_hamiltonian(config: ScenarioConfig) -> np.ndarray:
    labels = config.labels
    n = len(labels)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for pos, lab in enumerate(labels):
        h += config.frequency(lab) * qcore.embed(SIGMA_PLUS @ SIGMA_MINUS, pos, n)
    return h


def _flip(bits_from, bits_to):
    """``|to><from| + h.c.`` on the register spanned by ``len(bits_from)`` qubits."""
    ket_to = qcore.basis_ket(bits_to)
    ket_from = qcore.basis_ket(bits_from)
    op = np.outer(ket_to, ket_from.conj())
    return op + op.conj().T


def build_interaction(config: ScenarioConfig) -> np.ndarray:
    scenario = config.scenario
    if scenario is Scenario.I:
        return config.g * _flip((1, 0, 1), (0, 1, 0))
    if scenario is Scenario.II:
        return config.g * _flip((1, 0, 0, 1), (0, 1, 1, 0))
    reservoir_charger = qcore.kron(_flip((1, 0, 1), (0, 1, 0)), qcore.IDENTITY2)
    charger_battery = qcore.kron(np.eye(4), _flip((0, 1), (1, 0)))
    return config.g * reservoir_charger + config.k * charger_battery


@dataclass(frozen=True)
class JumpOperator:
    operator: np.ndarray
    rate: float
    name: str = ""


def build_dissipators(config: ScenarioConfig) -> list:
    """Thermal emission and absorption on each reservoir qubit.

    Rates are kept separate from the bare ladder operators:
    ``gamma (n + 1)`` for lowering and ``gamma n`` for raising.
    """
    n_qubits = len(config.labels)
    jumps = []
    for pos, (lab, gamma) in enumerate((("S1", config.gamma1), ("S2", config.gamma2))):
        nbar = bose_occupation(config.T, config.frequency(lab))
        jumps.append(JumpOperator(qcore.embed(SIGMA_MINUS, pos, n_qubits), gamma * (nbar + 1), f"{lab}-"))
        jumps.append(JumpOperator(qcore.embed(SIGMA_PLUS, pos, n_qubits), gamma * nbar, f"{lab}+"))
    return jumps


_PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def initial_state(config: ScenarioConfig) -> DensityMatrix:
    labels = config.labels
    has_charger = config.scenario is not Scenario.I
    if config.initial_example is Example.a:
        bits = (0, 1, 1, 0) if has_charger else (0, 1, 0)
        return DensityMatrix.from_ket(qcore.basis_ket(bits), labels)
    pair = (qcore.basis_ket((0, 1)) + qcore.basis_ket((1, 0))) / np.sqrt(2)
    factors = [pair, _PLUS] if has_charger else [pair]
    factors.append(qcore.basis_ket((0,)))
    return DensityMatrix.from_ket(qcore.kron(*[f.reshape(-1, 1) for f in factors]), labels)


@dataclass(frozen=True)
class LindbladModel:
    h_free: np.ndarray
    h_int: np.ndarray
    jump_ops: tuple
    labels: tuple
    config: ScenarioConfig | None

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h_free + self.h_int

    @property
    def dim(self) -> int:
        return self.h_free.shape[0]


def commutator_norm(a, b) -> float:
    """Spectral norm of ``[a, b]``."""
    return float(np.linalg.norm(a @ b - b @ a, 2))


def build_model(config: ScenarioConfig) -> LindbladModel:
    check_config(config)
    h_free = build_free_hamiltonian(config)
    h_int = build_interaction(config)
    c = commutator_norm(h_free, h_int)
    if c > COMMUTATOR_TOL:
        raise ConfigurationError(f"interaction does not commute with free Hamiltonian (norm {c:.3e})")
    return LindbladModel(h_free, h_int, tuple(build_dissipators(config)), config.labels, config)


def thermal_qubit_model(omega: float, gamma: float, T: float, label: str = "S1") -> LindbladModel:
    """A lone reservoir qubit coupled to its bath, with no scenario config.

    Pass an explicit ``rho0`` when integrating it.
    """
    nbar = bose_occupation(T, omega)
    h = omega * (SIGMA_PLUS @ SIGMA_MINUS)
    jumps = (JumpOperator(SIGMA_MINUS.copy(), gamma * (nbar + 1), f"{label}-"),
             JumpOperator(SIGMA_PLUS.copy(), gamma * nbar, f"{label}+"))
    return LindbladModel(h, np.zeros_like(h), jumps, (label,), None)


def gibbs_state(omega: float, T: float, label: str = "S1") -> DensityMatrix:
    p1 = 0.0 if T == 0 else 1.0 / (math.exp(omega / T) + 1.0)
    return DensityMatrix(np.diag([1.0 - p1, p1]), (label,))
