import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbattery import qcore
from qbattery.errors import ConfigurationError, NumericalContractError
from qbattery.qcore import DensityMatrix

from conftest import random_state


def binary_entropy(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


class TestKron:
    def test_identities(self):
        assert np.allclose(qcore.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_sigma_z_on_first_factor(self):
        assert np.allclose(qcore.kron(qcore.SIGMA_Z, np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_mixed_product(self, rng):
        a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
        assert np.allclose(qcore.kron(a, b) @ qcore.kron(c, d), qcore.kron(a @ c, b @ d))

    def test_basis_index_most_significant_first(self):
        assert qcore.basis_index((0, 1, 0)) == 2
        assert qcore.basis_index((1, 0, 0, 1)) == 9


class TestPartialTrace:
    def test_product_state(self, rng):
        ra, rb = random_state(rng, 1), random_state(rng, 1)
        rho = DensityMatrix(np.kron(ra, rb), ("A", "B"))
        assert np.allclose(qcore.partial_trace(rho, "A").matrix, ra)
        assert np.allclose(qcore.partial_trace(rho, {"B"}).matrix, rb)

    def test_bell_marginal(self):
        ket = (qcore.basis_ket((0, 0)) + qcore.basis_ket((1, 1))) / np.sqrt(2)
        rho = DensityMatrix.from_ket(ket, ("A", "B"))
        assert np.allclose(qcore.partial_trace(rho, "A").matrix, np.eye(2) / 2)

    def test_keep_all(self, rng):
        rho = DensityMatrix(random_state(rng, 3), ("S1", "S2", "B"))
        assert qcore.partial_trace(rho, {"S1", "S2", "B"}) is rho

    def test_labels_keep_original_order(self, rng):
        rho = DensityMatrix(random_state(rng, 4), ("S1", "S2", "C", "B"))
        assert qcore.partial_trace(rho, ["B", "S1"]).labels == ("S1", "B")

    def test_against_explicit_sum(self, rng):
        m = random_state(rng, 3)
        rho = DensityMatrix(m, ("S1", "S2", "B"))
        t = m.reshape(2, 2, 2, 2, 2, 2)
        expected = np.einsum("abcdbf->acdf", t).reshape(4, 4)
        assert np.allclose(qcore.partial_trace(rho, ("S1", "B")).matrix, expected)

    def test_unknown_label(self, rng):
        rho = DensityMatrix(random_state(rng, 2), ("A", "B"))
        with pytest.raises(ConfigurationError):
            qcore.partial_trace(rho, "C")
        with pytest.raises(ConfigurationError):
            qcore.partial_trace(rho, set())

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), keep=st.sets(st.sampled_from(["S1", "S2", "C", "B"]), min_size=1))
    def test_trace_and_positivity_preserved(self, seed, keep):
        rng = np.random.default_rng(seed)
        rho = DensityMatrix(random_state(rng, 4, rank=int(rng.integers(1, 17))), ("S1", "S2", "C", "B"))
        red = qcore.partial_trace(rho, keep)
        assert abs(red.trace() - 1) < 1e-12
        assert np.linalg.eigvalsh(red.matrix)[0] >= -1e-8


class TestHermitianEig:
    def test_diagonal(self):
        s = qcore.hermitian_eig(np.diag([0.3, 0.7]))
        assert np.allclose(s.eigenvalues, [0.3, 0.7])

    def test_plus_projector(self):
        s = qcore.hermitian_eig(np.full((2, 2), 0.5))
        assert np.allclose(s.eigenvalues, [0.0, 1.0])

    def test_closed_form_roots(self):
        s = qcore.hermitian_eig(np.array([[0.75, 0.25], [0.25, 0.25]]))
        roots = [(1 - math.sqrt(0.5)) / 2, (1 + math.sqrt(0.5)) / 2]
        assert np.allclose(s.eigenvalues, roots, rtol=1e-6)
        assert s.eigenvalues[0] == pytest.approx(0.14645, abs=1e-5)

    def test_spectrum_invariants(self, rng):
        m = random_state(rng, 3)
        s = qcore.hermitian_eig(m)
        assert np.all(np.diff(s.eigenvalues) >= 0)
        assert np.max(np.abs(s.reconstruct() - m)) < 1e-10
        v = s.eigenvectors
        assert np.max(np.abs(v.conj().T @ v - np.eye(8))) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(NumericalContractError):
            qcore.hermitian_eig(np.array([[0, 1], [0, 0]]))


class TestEntropy:
    def test_pure(self):
        assert qcore.von_neumann_entropy(np.full((2, 2), 0.5)) == 0.0

    def test_maximally_mixed(self):
        assert qcore.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)

    def test_binary_entropy(self):
        expected = binary_entropy(0.25)
        assert expected == pytest.approx(0.81128, abs=1e-5)
        assert qcore.von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(expected, rel=1e-12)

    def test_tiny_negative_eigenvalues_ignored(self):
        assert qcore.von_neumann_entropy(np.diag([1.0 + 1e-13, -1e-13])) == 0.0

    def test_bounds_and_subadditivity(self, rng):
        for _ in range(50):
            m = random_state(rng, 2, rank=int(rng.integers(1, 5)))
            rho = DensityMatrix(m, ("A", "B"))
            s = qcore.von_neumann_entropy(rho)
            assert 0 <= s <= 2 + 1e-12
            sa = qcore.von_neumann_entropy(qcore.partial_trace(rho, "A"))
            sb = qcore.von_neumann_entropy(qcore.partial_trace(rho, "B"))
            assert s <= sa + sb + 1e-9

    def test_dephasing_never_lowers_entropy(self, rng):
        for _ in range(50):
            m = random_state(rng, 3, rank=int(rng.integers(1, 9)))
            assert qcore.von_neumann_entropy(qcore.dephase(m)) >= qcore.von_neumann_entropy(m) - 1e-9


class TestDephase:
    def test_diagonal_unchanged(self):
        m = np.diag([0.2, 0.8])
        assert np.array_equal(qcore.dephase(m), m)

    def test_plus_state(self):
        assert np.allclose(qcore.dephase(np.full((2, 2), 0.5)), np.eye(2) / 2)

    def test_idempotent_and_keeps_labels(self, rng):
        rho = DensityMatrix(random_state(rng, 2), ("C", "B"))
        once = qcore.dephase(rho)
        assert once.labels == ("C", "B")
        assert np.array_equal(qcore.dephase(once).matrix, once.matrix)
        assert np.allclose(np.diag(once.matrix), np.diag(rho.matrix))


class TestMatrixExp:
    def test_zero(self):
        assert np.allclose(qcore.matrix_exp(np.zeros((4, 4))), np.eye(4))

    def test_rotation(self):
        theta = 0.3
        u = qcore.matrix_exp(1j * theta * qcore.SIGMA_Y)
        c, s = math.cos(theta), math.sin(theta)
        assert np.allclose(u, [[c, s], [-s, c]], rtol=1e-12, atol=1e-14)

    def test_nilpotent(self):
        n = np.array([[0, 1], [0, 0]])
        assert np.allclose(qcore.matrix_exp(n), np.eye(2) + n)

    def test_semigroup(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        s, t = 0.37, 0.81
        lhs = qcore.matrix_exp((s + t) * m)
        assert np.max(np.abs(lhs - qcore.matrix_exp(s * m) @ qcore.matrix_exp(t * m))) < 1e-9


class TestDensityMatrix:
    def test_shape_and_label_checks(self):
        with pytest.raises(ConfigurationError):
            DensityMatrix(np.eye(4) / 4, ("A",))
        with pytest.raises(ConfigurationError):
            DensityMatrix(np.eye(4) / 4, ("A", "A"))

    def test_immutable(self):
        rho = DensityMatrix(np.eye(2) / 2, ("B",))
        assert rho.factor_dims == (2,)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0
