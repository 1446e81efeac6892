"""Lindblad time evolution: adaptive Runge-Kutta integrator and exact oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import ConfigurationError, IntegratorError
from .model import LindbladModel, initial_state
from .qcore import DensityMatrix

DEFAULT_TOL = 1e-9
DEFAULT_SAMPLE_DT = 0.05
DEFAULT_T_MAX = 60.0
MAX_STEPS_PER_SAMPLE = 100_000


@dataclass(frozen=True)
class StateReport:
    trace_err: float
    hermitian_defect: float
    min_eig: float
    ok: bool


def validate_state(rho, trace_tol=qcore.TRACE_TOL, herm_tol=qcore.HERMITIAN_TOL,
                   psd_tol=qcore.PSD_TOL) -> StateReport:
    m = qcore._as_array(rho)
    trace_err = abs(complex(np.trace(m)) - 1.0)
    defect = qcore.hermitian_defect(m)
    min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
    ok = trace_err <= trace_tol and defect <= herm_tol and min_eig >= -psd_tol
    return StateReport(trace_err, defect, min_eig, ok)


class _Generator:
    """Matrix-free action of the Lindbladian.

    Writes ``L(rho) = K + K^dagger`` with
    ``K = -i H_eff rho + 1/2 sum_j r_j L_j rho L_j^dagger`` and
    ``H_eff = H - i/2 sum_j r_j L_j^dagger L_j``, so the output is exactly
    Hermitian for Hermitian ``rho``.
    """

    def __init__(self, model: LindbladModel):
        h = model.hamiltonian
        decay = np.zeros_like(h)
        jumps = []
        for j in model.jump_ops:
            if j.rate < 0:
                raise ConfigurationError(f"negative jump rate {j.rate} for {j.name}")
            if j.rate == 0:
                continue
            L = np.asarray(j.operator)
            decay += j.rate * (L.conj().T @ L)
            jumps.append((0.5 * j.rate, L, L.conj().T))
        self.minus_i_heff = -1j * (h - 0.5j * decay)
        self.jumps = jumps
        self.dim = h.shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        k = self.minus_i_heff @ rho
        for half_rate, L, Ld in self.jumps:
            k += half_rate * (L @ rho @ Ld)
        return k + k.conj().T


def rhs(model: LindbladModel, rho) -> np.ndarray:
    m = qcore._as_array(rho)
    if m.shape != (model.dim, model.dim):
        raise ConfigurationError(f"state shape {m.shape} does not match model dim {model.dim}")
    return _Generator(model)(m)


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Superoperator acting on column-stacked ``vec(rho)``.

    Uses ``vec(A X B) = (B^T kron A) vec(X)``.
    """
    d = model.dim
    eye = np.eye(d)
    h = model.hamiltonian
    sup = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for j in model.jump_ops:
        L = np.asarray(j.operator)
        LdL = L.conj().T @ L
        sup += j.rate * (np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye))
    return sup


def vec(m) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, d) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


class Propagator:
    """Exact propagation by exponentiating the Liouvillian (oracle route)."""

    def __init__(self, model: LindbladModel):
        self.model = model
        self.superop = liouvillian(model)

    def __call__(self, rho0: DensityMatrix, t: float) -> DensityMatrix:
        if t < 0:
            raise ConfigurationError(f"propagation time must be nonnegative, got {t}")
        d = self.model.dim
        if t == 0:
            return rho0
        try:
            prop = qcore.matrix_exp(self.superop * t)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise IntegratorError(f"Liouvillian exponential failed: {exc}", t) from exc
        return DensityMatrix(unvec(prop @ vec(rho0.matrix), d), rho0.labels)


def oracle_propagate(model: LindbladModel, rho0: DensityMatrix, t: float) -> DensityMatrix:
    return Propagator(model)(rho0, t)


# Dormand-Prince 5(4) tableau.
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(f, y, k1, h):
    """One Dormand-Prince step; returns (y_new, k_last, error_estimate)."""
    ks = [k1]
    for i in range(1, 7):
        yi = y.copy()
        for a, kj in zip(_A[i], ks):
            if a:
                yi += (h * a) * kj
        ks.append(f(yi))
    # Row 6 of the tableau equals the 5th-order weights, so stage 7 sees y_new.
    y_new = yi
    err = np.zeros_like(y)
    for e, kj in zip(_E, ks):
        if e:
            err += (h * e) * kj
    return y_new, ks[-1], float(np.max(np.abs(err)))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: tuple
    model: LindbladModel
    n_steps: int = 0

    def __len__(self):
        return len(self.times)

    def reduced(self, keep) -> list:
        return [qcore.partial_trace(s, keep) for s in self.states]


def sample_times(t_max: float, sample_dt: float) -> np.ndarray:
    n = int(math.floor(t_max / sample_dt + 1e-9))
    return np.arange(n + 1) * sample_dt


def integrate(model: LindbladModel, t_max: float = DEFAULT_T_MAX,
              sample_dt: float = DEFAULT_SAMPLE_DT, tol: float = DEFAULT_TOL,
              rho0: DensityMatrix | None = None) -> Trajectory:
    """Integrate the master equation and sample on a uniform grid.

    Steps are adaptive with a max-abs local error target ``tol``; each step is
    clipped so the grid points are hit exactly.  Every sample is checked with
    :func:`validate_state` (Hermiticity at 1e-10) and the run aborts with
    :class:`IntegratorError` at the first bad sample.  No renormalisation.
    """
    if t_max < 0:
        raise ConfigurationError(f"t_max must be nonnegative, got {t_max}")
    if sample_dt <= 0:
        raise ConfigurationError(f"sample_dt must be positive, got {sample_dt}")
    if not 1e-12 <= tol <= 1e-6:
        raise ConfigurationError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    if rho0 is None:
        rho0 = initial_state(model.config)
    if rho0.dim != model.dim:
        raise ConfigurationError(f"initial state dim {rho0.dim} does not match model dim {model.dim}")

    f = _Generator(model)
    times = sample_times(t_max, sample_dt)
    y = np.array(rho0.matrix)
    states = [rho0]
    k1 = f(y)
    h = sample_dt / 10
    t = 0.0
    n_steps = 0
    try:
        for target in times[1:]:
            y, k1, h, t, n_steps = _advance(f, y, k1, h, t, n_steps, target, sample_dt, tol)
            states.append(DensityMatrix(y, rho0.labels))
    except IntegratorError as exc:
        exc.partial = Trajectory(times[:len(states)], tuple(states), model, n_steps)
        raise
    return Trajectory(times, tuple(states), model, n_steps)


def _advance(f, y, k1, h, t, n_steps, target, sample_dt, tol):
    """Step from ``t`` exactly onto ``target`` and validate the state there."""
    steps_here = 0
    while t < target:
        h_try = min(h, sample_dt, target - t)
        y_new, k_new, err = _dp_step(f, y, k1, h_try)
        steps_here += 1
        if steps_here > MAX_STEPS_PER_SAMPLE or not np.isfinite(err):
            raise IntegratorError("step size control failed", t)
        if err <= tol:
            landing = target - t - h_try <= 1e-12 * max(1.0, target)
            t = float(target) if landing else t + h_try
            y, k1 = y_new, k_new
            n_steps += 1
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        # An accepted step that was clipped to land on the grid keeps h.
        if not (err <= tol and h_try < h):
            h = min(h_try * factor, sample_dt)
        if h < 1e-14:
            raise IntegratorError("step size underflow", t)
    report = validate_state(y, herm_tol=1e-10)
    if not report.ok:
        raise IntegratorError(
            f"invalid state at t={target:g}: trace error {report.trace_err:.3e}, "
            f"min eigenvalue {report.min_eig:.3e}", float(target))
    return y, k1, h, t, n_steps
