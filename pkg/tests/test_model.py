import math

import numpy as np
import pytest

from qbattery import model, qcore
from qbattery.errors import ConfigurationError
from qbattery.model import ScenarioConfig, Scenario
from qbattery.thermo import rel_entropy_coherence

ALL = [(s, e) for s in ("I", "II", "III") for e in ("a", "b")]


def cfg(scenario, example="a", **kw):
    return ScenarioConfig.reference_defaults(scenario, example, **kw)


class TestBoseOccupation:
    def test_equal_frequency_and_temperature(self):
        expected = 1 / (math.e - 1)
        assert expected == pytest.approx(0.58198, abs=1e-5)
        assert model.bose_occupation(5, 5) == pytest.approx(expected, rel=1e-12)

    def test_zero_temperature(self):
        assert model.bose_occupation(0, 10) == 0.0

    def test_ln2(self):
        assert model.bose_occupation(1 / math.log(2), 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ConfigurationError):
            model.bose_occupation(1.0, 0.0)


class TestResonance:
    def test_scenario_I_reference(self):
        assert model.validate_resonance(cfg("I"))

    def test_scenario_III_reference(self):
        c = cfg("III")
        assert (c.omega_C, c.omega_B) == (5.0, 5.0)
        assert model.validate_resonance(c)

    def test_scenario_I_detuned(self):
        report = model.validate_resonance(cfg("I", omega_B=4.9))
        assert not report
        assert "omega_B == omega_S2 - omega_S1" in report.failures

    def test_scenario_II_energy_conserving_condition(self):
        c = cfg("II")
        assert c.omega_B - c.omega_C == pytest.approx(c.omega_S2 - c.omega_S1)
        assert model.validate_resonance(c)
        assert not model.validate_resonance(c.with_(omega_C=10.0, omega_B=5.0))

    def test_ordering_of_reservoir_qubits(self):
        assert not model.validate_resonance(cfg("I").with_(omega_S1=10.0, omega_S2=5.0, omega_B=-5.0))

    def test_check_config_names_field(self):
        with pytest.raises(ConfigurationError, match="g="):
            model.check_config(cfg("I", g=2.0))
        with pytest.raises(ConfigurationError, match="gamma1"):
            model.check_config(cfg("I", gamma1=1.0))
        with pytest.raises(ConfigurationError, match="resonance"):
            model.check_config(cfg("III", omega_B=4.0))

    def test_unknown_override(self):
        with pytest.raises(ConfigurationError):
            cfg("I", omega_X=1.0)


class TestFreeHamiltonian:
    def test_scenario_I_energy(self):
        h = model.build_free_hamiltonian(cfg("I"))
        assert h[qcore.basis_index((0, 1, 0)), qcore.basis_index((0, 1, 0))] == 10
        assert h[0, 0] == 0

    def test_all_excited_sum(self):
        c = ScenarioConfig(Scenario.II, omega_S1=5, omega_S2=10, omega_C=10, omega_B=5,
                           g=0.5, gamma1=0.05, gamma2=0.1, T=5)
        h = model.build_free_hamiltonian(c)
        assert h[15, 15] == 30
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0

    @pytest.mark.parametrize("scenario", ["I", "II", "III"])
    def test_levels_are_sums_of_excited_frequencies(self, scenario):
        c = cfg(scenario)
        h = model.build_free_hamiltonian(c)
        freqs = [c.frequency(lab) for lab in c.labels]
        for idx in range(c.dim):
            bits = [(idx >> (len(freqs) - 1 - i)) & 1 for i in range(len(freqs))]
            assert h[idx, idx] == pytest.approx(sum(f for f, b in zip(freqs, bits) if b))


class TestInteraction:
    def test_scenario_I_single_flip(self):
        c = cfg("I")
        h = model.build_interaction(c)
        i, j = qcore.basis_index((1, 0, 1)), qcore.basis_index((0, 1, 0))
        assert h[i, j] == c.g and h[j, i] == c.g
        assert np.count_nonzero(h) == 2
        assert np.linalg.norm(h, 2) == pytest.approx(c.g)

    def test_scenario_II_zero_coupling(self):
        assert not np.any(model.build_interaction(cfg("II", g=0.0)))

    def test_scenario_II_flip(self):
        c = cfg("II")
        h = model.build_interaction(c)
        assert h[qcore.basis_index((0, 1, 1, 0)), qcore.basis_index((1, 0, 0, 1))] == c.g
        assert np.linalg.norm(h, 2) == pytest.approx(c.g)

    def test_scenario_III_charger_battery_exchange(self):
        c = cfg("III")
        h = model.build_interaction(c)
        for s1 in (0, 1):
            for s2 in (0, 1):
                i = qcore.basis_index((s1, s2, 1, 0))
                j = qcore.basis_index((s1, s2, 0, 1))
                assert h[i, j] == pytest.approx(c.k)
        for b in (0, 1):
            i = qcore.basis_index((0, 1, 0, b))
            j = qcore.basis_index((1, 0, 1, b))
            assert h[i, j] == pytest.approx(c.g)
        assert np.count_nonzero(h) == 2 * 4 + 2 * 2

    @pytest.mark.parametrize("scenario", ["I", "II", "III"])
    def test_commutes_and_preserves_free_eigenspaces(self, scenario):
        c = cfg(scenario)
        hf, hi = model.build_free_hamiltonian(c), model.build_interaction(c)
        assert model.commutator_norm(hf, hi) <= 1e-10
        energies = np.real(np.diag(hf))
        rows, cols = np.nonzero(hi)
        assert np.allclose(energies[rows], energies[cols])
        assert np.max(np.abs(hi - hi.conj().T)) <= 1e-12


class TestDissipators:
    def test_rates(self):
        jumps = model.build_dissipators(cfg("I"))
        assert len(jumps) == 4
        nbar = 1 / (math.e - 1)
        assert jumps[0].rate == pytest.approx(0.05 * (nbar + 1), rel=1e-12)
        assert jumps[1].rate == pytest.approx(0.05 * nbar, rel=1e-12)
        assert jumps[0].rate == pytest.approx(0.05 * 1.58198, rel=1e-5)
        assert jumps[1].rate == pytest.approx(0.05 * 0.58198, rel=1e-5)

    def test_closed_limit(self):
        assert all(j.rate == 0 for j in model.build_dissipators(cfg("II", gamma1=0.0, gamma2=0.0)))

    @pytest.mark.parametrize("T", [0.5, 5.0, 50.0])
    def test_detailed_balance(self, T):
        c = cfg("III", T=T)
        jumps = model.build_dissipators(c)
        for (down, up), omega in ((jumps[0:2], c.omega_S1), (jumps[2:4], c.omega_S2)):
            assert down.rate / up.rate == pytest.approx(math.exp(omega / T), rel=1e-12)

    def test_operators_embedded(self):
        jumps = model.build_dissipators(cfg("II"))
        expected = qcore.kron(np.eye(2), qcore.SIGMA_MINUS, np.eye(4))
        assert np.array_equal(jumps[2].operator, expected)


class TestInitialState:
    def test_scenario_I_a(self):
        rho = model.initial_state(cfg("I", "a"))
        idx = qcore.basis_index((0, 1, 0))
        expected = np.zeros((8, 8))
        expected[idx, idx] = 1
        assert np.array_equal(rho.matrix, expected)

    def test_scenario_II_b_coherences(self):
        rho = model.initial_state(cfg("II", "b"))
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)
        assert rel_entropy_coherence(qcore.partial_trace(rho, ("S1", "S2"))) == pytest.approx(1.0, abs=1e-12)
        assert rel_entropy_coherence(qcore.partial_trace(rho, "C")) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("scenario,example", ALL)
    def test_battery_starts_in_ground_state(self, scenario, example):
        c = cfg(scenario, example)
        rho = model.initial_state(c)
        rho_B = qcore.partial_trace(rho, "B")
        assert np.allclose(rho_B.matrix, np.diag([1, 0]))
        assert rho_B.expect(c.omega_B * np.diag([0, 1])) == 0
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)


class TestBuildModel:
    def test_scenario_I_dims(self):
        m = model.build_model(cfg("I"))
        assert m.h_free.shape == (8, 8) and len(m.jump_ops) == 4
        assert m.labels == ("S1", "S2", "B")

    def test_scenario_II_dims(self):
        assert model.build_model(cfg("II")).h_free.shape == (16, 16)

    def test_trivial_limit(self):
        m = model.build_model(cfg("III", g=0.0, k=0.0, gamma1=0.0, gamma2=0.0))
        assert not np.any(m.h_int)
        assert all(j.rate == 0 for j in m.jump_ops)

    def test_propagates_resonance_rejection(self):
        with pytest.raises(ConfigurationError):
            model.build_model(cfg("I", omega_B=4.9))

    def test_reference_parameters(self):
        c = cfg("III")
        assert (c.T, c.gamma1, c.gamma2, c.g, c.k) == pytest.approx((5.0, 0.05, 0.1, 0.5, 0.15))
