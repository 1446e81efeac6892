"""Battery charging observables evaluated along a trajectory.

Energies use ``k_B = 1`` and information quantities are in bits, so the
coherence free energy is simply ``T * C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .errors import ConfigurationError, NumericalContractError
from .dynamics import validate_state
from .qcore import DensityMatrix
from .model import Scenario

IDENTITY_TOL = 1e-9
BOUND_TOL = 1e-9


def _qubit(rho):
    m = qcore._as_array(rho)
    if m.shape != (2, 2):
        raise ConfigurationError(f"expected a single-qubit state, got shape {m.shape}")
    return m


def stored_energy(rho_B, omega_B: float) -> float:
    return omega_B * float(np.real(_qubit(rho_B)[1, 1]))


def passive_state(rho_B) -> DensityMatrix:
    """Diagonal state with the larger eigenvalue on the ground level."""
    w = qcore.hermitian_eig(_qubit(rho_B)).eigenvalues
    return DensityMatrix(np.diag([w[1], w[0]]), ("B",))


def ergotropy(rho_B, omega_B: float):
    """Return ``(ergotropy, passive_state)`` of a single qubit."""
    passive = passive_state(rho_B)
    e_passive = omega_B * float(np.real(passive.matrix[1, 1]))
    return stored_energy(rho_B, omega_B) - e_passive, passive


def ergotropy_split(rho_B, omega_B: float):
    """Split ergotropy into ``(population, coherence)`` parts.

    The population part is the ergotropy of the dephased state; the coherence
    part is the remainder and is not clamped.
    """
    m = _qubit(rho_B)
    total, _ = ergotropy(m, omega_B)
    pop, _ = ergotropy(qcore.dephase(m), omega_B)
    return pop, total - pop


def rel_entropy_coherence(rho) -> float:
    m = qcore._as_array(rho)
    return qcore.shannon_entropy(np.real(np.diag(m))) - qcore.von_neumann_entropy(m)


def free_energy(rho, hamiltonian, T: float) -> float:
    m = qcore._as_array(rho)
    energy = float(np.real(np.trace(np.asarray(hamiltonian) @ m)))
    return energy - T * qcore.von_neumann_entropy(m)


def coherence_free_energy(rho, T: float, hamiltonian=None) -> float:
    """``T * C(rho)``, cross-checked against ``F(rho) - F(dephased rho)``.

    ``hamiltonian`` must be diagonal in the computational basis; it defaults to
    the excitation-number operator on the state's qubits.
    """
    if T <= 0:
        raise ConfigurationError(f"temperature must be positive, got {T}")
    m = qcore._as_array(rho)
    if hamiltonian is None:
        n = int(np.log2(m.shape[0]))
        hamiltonian = np.diag([bin(i).count("1") for i in range(2**n)]).astype(float)
    w = T * rel_entropy_coherence(m)
    direct = free_energy(m, hamiltonian, T) - free_energy(qcore.dephase(m), hamiltonian, T)
    if abs(direct - w) > IDENTITY_TOL * max(1.0, T):
        raise NumericalContractError(f"free-energy routes disagree: {direct} vs {w}")
    return w


def _marginals(rho_S: DensityMatrix):
    return [qcore.partial_trace(rho_S, lab) for lab in rho_S.labels]


def _total_correlation(rho_S: DensityMatrix) -> float:
    return sum(qcore.von_neumann_entropy(r) for r in _marginals(rho_S)) - qcore.von_neumann_entropy(rho_S)


def mutual_information(rho_S: DensityMatrix):
    """Multipartite mutual information over single-qubit marginals.

    Returns ``(I, I_dephased)``; the second is the same quantity for the
    fully dephased state.
    """
    return _total_correlation(rho_S), _total_correlation(qcore.dephase(rho_S))


@dataclass(frozen=True)
class CorrelationExchange:
    delta_C: float
    from_coherences: float
    from_mutual_information: float
    I_S: float
    I_S_deph: float
    C_S: float
    local_coherences: dict


def correlation_exchange(rho_S: DensityMatrix) -> CorrelationExchange:
    """Global minus local coherence, computed two independent ways.

    Raises NumericalContractError when the two routes disagree beyond 1e-9.
    """
    c_total = rel_entropy_coherence(rho_S)
    local = {r.labels[0]: rel_entropy_coherence(r) for r in _marginals(rho_S)}
    lhs = c_total - sum(local.values())
    I_S, I_deph = mutual_information(rho_S)
    rhs = I_S - I_deph
    if abs(lhs - rhs) > IDENTITY_TOL:
        raise NumericalContractError(
            f"coherence/mutual-information identity violated: {lhs!r} vs {rhs!r}")
    return CorrelationExchange(lhs, lhs, rhs, I_S, I_deph, c_total, local)


def delta_coherence(rho_S: DensityMatrix) -> float:
    return correlation_exchange(rho_S).delta_C


def ergotropy_bounds(ergo_pop: float, C_B: float, T: float):
    """Lower and upper ergotropy bounds ``(ergo_pop, T*C_B + ergo_pop)``."""
    return ergo_pop, T * C_B + ergo_pop


def bound_violations(ergotropy_: float, ergo_pop: float, ergo_coh: float, C_B: float, T: float,
                     tol: float = BOUND_TOL) -> tuple:
    lo, hi = ergotropy_bounds(ergo_pop, C_B, T)
    found = []
    if ergo_coh < -tol:
        found.append("coherence ergotropy negative")
    if ergo_coh > T * C_B + tol:
        found.append("coherence ergotropy above T*C_B")
    if ergotropy_ < lo - tol:
        found.append("ergotropy below population ergotropy")
    if ergotropy_ > hi + tol:
        found.append("ergotropy above T*C_B + population ergotropy")
    return tuple(found)


def charging_power(ergotropy_: float, t: float) -> float:
    if t < 0:
        raise ConfigurationError(f"time must be nonnegative, got {t}")
    return 0.0 if t == 0 else ergotropy_ / t


@dataclass(frozen=True)
class ThermoRecord:
    t: float
    omega_B: float
    E_B: float
    ergotropy: float
    ergo_pop: float
    ergo_coh: float
    power: float
    C_S12: float
    C_C: float
    C_B: float
    C_S: float
    I_S: float
    I_S_deph: float
    delta_C: float
    W_B: float
    bound_lo: float
    bound_hi: float
    trace_err: float
    min_eig: float
    C_S1: float = 0.0
    C_S2: float = 0.0
    violations: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def normalized(self, name: str) -> float:
        return getattr(self, name) / self.omega_B


def evaluate_state(rho_S: DensityMatrix, t: float, omega_B: float, T: float,
                   scenario=Scenario.II) -> ThermoRecord:
    scenario = Scenario(scenario)
    rho_B = qcore.partial_trace(rho_S, "B").matrix
    E_B = stored_energy(rho_B, omega_B)
    erg, _ = ergotropy(rho_B, omega_B)
    pop, coh = ergotropy_split(rho_B, omega_B)
    C_B = rel_entropy_coherence(rho_B)
    ce = correlation_exchange(rho_S)
    C_C = ce.local_coherences["C"] if scenario is not Scenario.I else 0.0
    lo, hi = ergotropy_bounds(pop, C_B, T)

    violations = list(bound_violations(erg, pop, coh, C_B, T))
    if abs(erg - (pop + coh)) > IDENTITY_TOL:
        violations.append("ergotropy split does not add up")
    if erg > E_B + IDENTITY_TOL:
        violations.append("ergotropy exceeds stored energy")
    report = validate_state(rho_S)
    return ThermoRecord(
        t=float(t), omega_B=omega_B, E_B=E_B, ergotropy=erg, ergo_pop=pop, ergo_coh=coh,
        power=charging_power(erg, t),
        C_S12=rel_entropy_coherence(qcore.partial_trace(rho_S, ("S1", "S2"))),
        C_C=C_C, C_B=C_B, C_S=ce.C_S, I_S=ce.I_S, I_S_deph=ce.I_S_deph, delta_C=ce.delta_C,
        W_B=T * C_B, bound_lo=lo, bound_hi=hi,
        trace_err=report.trace_err, min_eig=report.min_eig,
        C_S1=ce.local_coherences["S1"], C_S2=ce.local_coherences["S2"],
        violations=tuple(violations),
    )


def evaluate_trajectory(traj, T: float | None = None) -> list:
    """One :class:`ThermoRecord` per sample of ``traj``.

    ``T`` defaults to the bath temperature of the generating config.
    Identity failures propagate as NumericalContractError carrying the time.
    """
    cfg = traj.model.config
    T = cfg.T if T is None else T
    records = []
    for t, rho in zip(traj.times, traj.states):
        try:
            records.append(evaluate_state(rho, t, cfg.omega_B, T, cfg.scenario))
        except NumericalContractError as exc:
            raise NumericalContractError(f"t={t:g}: {exc}") from exc
    return records
