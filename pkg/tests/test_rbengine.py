"""Clifford group verification, benchmarking runs and the fidelity model."""
import math

import numpy as np
import pytest

from cryomux import qubitsim as qs
from cryomux import rbengine as rb
from cryomux.errors import FitError
from cryomux.noisecalc import CoherenceRecord

T_G = 40e-9


@pytest.fixture(scope="module")
def table():
    return rb.build_clifford_table()


@pytest.fixture(scope="module")
def pi_pulse():
    return qs.calibrate_pi_pulse(T_G, "cosine")


def _phase_distance(u, v):
    overlap = abs(np.trace(u.conj().T @ v)) / 2.0
    return 1.0 - overlap


class TestCliffordTable:
    def test_has_24_distinct_elements(self, table):
        assert table.size == 24
        keys = {rb._phase_key(u) for u in table.unitaries}
        assert len(keys) == 24

    def test_elements_are_unitary(self, table):
        for u in table.unitaries:
            assert np.max(np.abs(u @ u.conj().T - np.eye(2))) < 1e-12

    def test_identity_is_element_zero(self, table):
        assert table.identity_index == 0
        assert table.decompositions[0] == ("I",)

    def test_group_closure(self, table):
        for i in range(24):
            for j in range(24):
                k = table.compose(i, j)
                expected = table.unitaries[j] @ table.unitaries[i]
                assert _phase_distance(table.unitaries[k], expected) < 1e-12

    def test_every_element_has_inverse(self, table):
        for i in range(24):
            inv = table.inverse(i)
            assert table.compose(i, inv) == table.identity_index

    def test_mean_generator_count(self, table):
        assert table.mean_generator_count == pytest.approx(1.875, abs=1e-12)
        assert sum(len(d) for d in table.decompositions) == 45

    def test_decompositions_match_unitaries(self, table):
        for seq, u in zip(table.decompositions, table.unitaries):
            assert _phase_distance(rb.sequence_unitary(seq), u) < 1e-12


class TestSequences:
    def test_minimal_sequence_composes_to_identity(self, table):
        seq = rb.rb_sequence(1, seed=5)
        assert len(seq) == 2
        u = np.eye(2, dtype=complex)
        for idx in seq:
            u = table.unitaries[idx] @ u
        assert _phase_distance(u, np.eye(2)) < 1e-12

    def test_seeded_reproducibility(self):
        assert rb.rb_sequence(20, seed=123) == rb.rb_sequence(20, seed=123)
        assert rb.rb_sequence(20, seed=123) != rb.rb_sequence(20, seed=124)

    @pytest.mark.parametrize("m", [3, 10, 40])
    def test_recovery_inverts_any_sequence(self, table, m):
        seq = rb.rb_sequence(m, seed=m)
        u = np.eye(2, dtype=complex)
        for idx in seq:
            u = table.unitaries[idx] @ u
        assert _phase_distance(u, np.eye(2)) < 1e-12

    def test_noise_free_execution_returns_to_ground(self, pi_pulse):
        lengths, survival = rb.run_rb([1, 5, 20], 4, None, pi_pulse, seed=11)
        assert np.all(survival >= 1 - 1e-9)


class TestRunRb:
    NOISE = CoherenceRecord(t1=30e-6, t2_star=25e-6, t2_echo=25e-6)

    def test_fidelity_above_999_at_nominal_coherence(self, pi_pulse):
        lengths, survival = rb.run_rb(
            [2, 4, 8, 16, 32, 64, 128, 256, 400], 20, self.NOISE, pi_pulse, seed=7
        )
        result = rb.fit_rb(lengths, survival)
        assert result.f_1q > 0.999
        assert 0.0 < result.p <= 1.0

    def test_halving_t2_lowers_decay_parameter(self, pi_pulse):
        lengths = [2, 8, 32, 128, 400]
        strong = CoherenceRecord(t1=1e6, t2_star=20e-6, t2_echo=20e-6)
        weak = CoherenceRecord(t1=1e6, t2_star=10e-6, t2_echo=10e-6)
        _, surv_strong = rb.run_rb(lengths, 10, strong, pi_pulse, seed=3)
        _, surv_weak = rb.run_rb(lengths, 10, weak, pi_pulse, seed=3)
        p_strong = rb.fit_rb(lengths, surv_strong).p
        p_weak = rb.fit_rb(lengths, surv_weak).p
        assert p_weak < p_strong

    def test_lengths_must_increase(self, pi_pulse):
        with pytest.raises(ValueError):
            rb.run_rb([4, 2], 2, None, pi_pulse)

    def test_simulation_matches_white_noise_model(self, pi_pulse):
        # pure-dephasing channels are Markovian: the coherence model with
        # k1 = t_g/3 must agree with the simulation within the fit error,
        # pooled over 5 seeds
        t2 = 10e-6
        noise = CoherenceRecord(t1=1e6, t2_star=t2, t2_echo=t2)
        predicted = rb.coherence_limited_fidelity(T_G, 1e6, t2, 2e6, k1=T_G / 3.0)
        fitted, errors = [], []
        for seed in range(5):
            lengths, survival = rb.run_rb(
                [2, 4, 8, 16, 32, 64, 128, 256, 400], 20, noise, pi_pulse, seed=seed
            )
            result = rb.fit_rb(lengths, survival)
            fitted.append(result.f_1q)
            errors.append(result.f_1q_stderr)
        assert abs(np.mean(fitted) - predicted) <= np.mean(errors)


class TestFitRb:
    def test_error_per_clifford_arithmetic(self):
        m = np.array([1, 2, 5, 10, 20, 50, 100, 200, 400], dtype=float)
        y = 0.5 * 0.999**m + 0.5
        result = rb.fit_rb(m, y)
        assert result.p == pytest.approx(0.999, abs=1e-7)
        assert result.r_clifford == pytest.approx(5e-4, rel=1e-4)
        assert result.r_g == pytest.approx(2.667e-4, rel=1e-3)
        assert result.f_1q == pytest.approx(0.99973, abs=1e-5)
        assert result.d == 2

    def test_result_invariants(self):
        m = np.array([1, 5, 20, 80, 300], dtype=float)
        y = 0.48 * 0.995**m + 0.51
        result = rb.fit_rb(m, y)
        assert result.f_1q == pytest.approx(1.0 - result.r_g, rel=1e-12)
        assert result.r_g == pytest.approx(result.r_clifford / 1.875, rel=1e-12)
        assert result.r_clifford == pytest.approx((1 - result.p) / 2, rel=1e-12)

    def test_perfect_decay_parameter_gives_unit_fidelity(self):
        r_clifford, r_g, f_1q = rb.error_rates_from_decay(1.0)
        assert r_clifford == 0.0
        assert r_g == 0.0
        assert f_1q == 1.0

    def test_decay_outside_unit_interval_rejected(self):
        with pytest.raises(FitError):
            rb.error_rates_from_decay(1.2)
        with pytest.raises(FitError):
            rb.error_rates_from_decay(0.0)

    def test_noisy_recovery_within_confidence(self):
        # additive gaussian noise sigma = 0.005: recovered p within 3x the
        # propagated standard error (seeded)
        m = np.array([1, 2, 5, 10, 20, 50, 100, 200, 400], dtype=float)
        rng = np.random.default_rng(17)
        truth_p = 0.997
        failures = 0
        for _ in range(10):
            y = 0.5 * truth_p**m + 0.5 + rng.normal(0, 0.005, m.size)
            result = rb.fit_rb(m, y)
            if abs(result.p - truth_p) > 3 * result.p_stderr:
                failures += 1
        assert failures <= 1

    def test_gibberish_data_raises(self):
        with pytest.raises(FitError):
            rb.fit_rb([1, 2, 3, 4, 5], [0.1, 0.9, 0.05, 0.95, 0.5])


class TestCoherenceLimitedFidelity:
    def test_baseline_coherence_removes_mux_term(self):
        f = rb.coherence_limited_fidelity(40e-9, 30e-6, 25e-6, 25e-6)
        assert f == pytest.approx(1 - 40e-9 / (3 * 30e-6), rel=1e-12)

    def test_calibration_plateau(self):
        c0_extra = 0.9993 - 1 + 40e-9 / (3 * 30e-6)
        f = rb.coherence_limited_fidelity(
            40e-9, 30e-6, 25e-6, 25e-6, c0_extra=-c0_extra
        )
        # c0_extra tuned so the saturated fidelity sits at the plateau
        assert f == pytest.approx(0.9993, abs=1e-9)

    def test_added_dephasing_penalty(self):
        base = rb.coherence_limited_fidelity(40e-9, 30e-6, 40e-6, 40e-6)
        lowered = rb.coherence_limited_fidelity(40e-9, 30e-6, 10e-6, 40e-6)
        penalty = base - lowered
        k1 = 0.433 * 40e-9 / 3
        assert penalty == pytest.approx(k1 * (1 / 10e-6 - 1 / 40e-6), rel=1e-9)
        assert penalty == pytest.approx(4.33e-4, rel=2e-3)

    def test_monotone_in_coherence_and_gate_time(self):
        f = [
            rb.coherence_limited_fidelity(40e-9, 30e-6, t2, 40e-6)
            for t2 in (40e-6, 30e-6, 20e-6, 10e-6, 5e-6)
        ]
        assert all(b <= a for a, b in zip(f, f[1:]))
        g = [
            rb.coherence_limited_fidelity(tg, 30e-6, 20e-6, 40e-6)
            for tg in (20e-9, 40e-9, 80e-9)
        ]
        assert all(b <= a for a, b in zip(g, g[1:]))

    def test_above_baseline_is_a_valid_limit(self):
        f = rb.coherence_limited_fidelity(40e-9, 30e-6, 50e-6, 40e-6)
        assert f == pytest.approx(1 - 40e-9 / (3 * 30e-6), rel=1e-12)


class TestGeneratorChannels:
    def test_channels_match_unitaries_when_noise_free(self, pi_pulse):
        channels = rb.generator_channels(pi_pulse, qs.SimConfig(levels=2))
        for name, u in rb.GENERATOR_UNITARIES.items():
            expected = np.kron(u, u.conj())
            assert np.max(np.abs(channels[name] - expected)) < 1e-9

    def test_identity_channel_decays(self, pi_pulse):
        config = qs.SimConfig(levels=2, t1=10e-6)
        channels = rb.generator_channels(pi_pulse, config)
        excited = np.zeros(4, dtype=complex)
        excited[3] = 1.0
        after = channels["I"] @ excited
        assert after[3].real == pytest.approx(math.exp(-T_G / 10e-6), rel=1e-9)
