"""Dense linear algebra for small multi-qubit states.

Every subsystem is a qubit ordered ``(|0>, |1>)``; composite states use the
Kronecker convention where the first label is the most significant digit of
the basis index.  Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, NumericalContractError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
PSD_TOL = 1e-8
EIG_CLAMP = 1e-12

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.T.copy()  # |1><0|
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
IDENTITY2 = np.eye(2, dtype=complex)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A state on a labelled product of qubits.

    Construction only checks shapes and labels; use
    :func:`qbattery.dynamics.validate_state` for the trace, Hermiticity and
    positivity contract.
    """

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = _frozen(self.matrix)
        labels = tuple(self.labels)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError(f"density matrix must be square, got {m.shape}")
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate subsystem labels {labels}")
        if 2 ** len(labels) != m.shape[0]:
            raise ConfigurationError(
                f"labels {labels} imply dim {2 ** len(labels)}, matrix has {m.shape[0]}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", labels)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def factor_dims(self) -> tuple:
        return (2,) * len(self.labels)

    @classmethod
    def from_ket(cls, ket, labels) -> DensityMatrix:
        ket = np.asarray(ket, dtype=complex).ravel()
        return cls(np.outer(ket, ket.conj()), labels)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def expect(self, op) -> float:
        """Real part of ``Tr(op rho)``; ``op`` is assumed Hermitian."""
        return float(np.real(np.trace(np.asarray(op) @ self.matrix)))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_array(m):
    return m.matrix if isinstance(m, DensityMatrix) else np.asarray(m)


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more square matrices, left to right."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in mats])


def embed(op, position: int, n_qubits: int) -> np.ndarray:
    """Place a single-qubit ``op`` at ``position`` with identities elsewhere."""
    factors = [IDENTITY2] * n_qubits
    factors[position] = np.asarray(op, dtype=complex)
    return kron(*factors)


def basis_index(bits) -> int:
    """Index of the computational basis state ``|b0 b1 ...>``."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def basis_ket(bits) -> np.ndarray:
    ket = np.zeros(2 ** len(bits), dtype=complex)
    ket[basis_index(bits)] = 1.0
    return ket


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    if isinstance(keep, str):
        keep = (keep,)
    keep = set(keep)
    if not keep:
        raise ConfigurationError("partial_trace needs at least one label to keep")
    unknown = keep - set(rho.labels)
    if unknown:
        raise ConfigurationError(f"unknown subsystem labels {sorted(unknown)}")
    kept = tuple(lab for lab in rho.labels if lab in keep)
    if kept == rho.labels:
        return rho

    n = len(rho.labels)
    t = rho.matrix.reshape((2,) * (2 * n))
    # Trace out from the highest axis down so remaining axis numbers stay valid.
    for i in reversed(range(n)):
        if rho.labels[i] not in keep:
            t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d = 2 ** len(kept)
    return DensityMatrix(t.reshape(d, d), kept)


def hermitian_defect(m) -> float:
    m = _as_array(m)
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eig(m, tol: float = 1e-10) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    m = _as_array(m)
    defect = hermitian_defect(m)
    if defect > tol:
        raise NumericalContractError(f"matrix is not Hermitian (defect {defect:.3e})")
    w, v = np.linalg.eigh(m)
    return Spectrum(w, v)


def _entropy_from_eigenvalues(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > EIG_CLAMP]
    if w.size == 0:
        return 0.0
    return max(0.0, float(-np.sum(w * np.log2(w))))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log2 rho)`` with eigenvalues below 1e-12 dropped."""
    return _entropy_from_eigenvalues(np.linalg.eigvalsh(_as_array(rho)))


def shannon_entropy(p) -> float:
    return _entropy_from_eigenvalues(p)


def dephase(rho):
    """Remove all off-diagonal elements in the computational product basis."""
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(np.diag(np.diag(rho.matrix)), rho.labels)
    return np.diag(np.diag(np.asarray(rho)))


def matrix_exp(m) -> np.ndarray:
    return scipy.linalg.expm(np.asarray(m, dtype=complex))
