import numpy as np
import pytest

from pmodsim.capacity import (ExpFitModel, FitError, SaturationError,
                              diagonal_ip_bound, fit_exponential_capacity,
                              mc_polarization_mi, mc_polarization_mi_ci,
                              mc_qpsk_mi, phi_p, phi_p_inv, phi_s, phi_s_inv,
                              pmod_ip_bound)
from pmodsim.units import db_to_lin

H_DIAG = np.sqrt(2.0) * np.eye(2, dtype=complex)


class TestPhiS:
    def test_zero_snr_gives_zero_bits(self):
        assert phi_s(0.0) == pytest.approx(0.0, abs=1e-12)

    def test_threshold_of_lowest_rate(self):
        # -2.15 dB row carries 0.68 bits/symbol
        assert phi_s(0.6095) == pytest.approx(0.68, abs=0.005)

    def test_threshold_of_highest_rate(self):
        # 5.19 dB row carries 1.74 bits/symbol
        assert phi_s(3.304) == pytest.approx(1.74, abs=0.005)

    def test_strictly_increasing_and_saturating(self):
        # strict growth checked below 30 where increments exceed float64 ulp
        g = np.linspace(0.0, 30.0, 4000)
        v = phi_s(g)
        assert np.all(np.diff(v) > 0)
        assert phi_s(100.0) == pytest.approx(2.0, abs=1e-12)

    def test_rejects_negative_snr(self):
        with pytest.raises(ValueError):
            phi_s(-0.1)

    def test_vectorized(self):
        out = phi_s(np.array([0.0, 1.0]))
        assert out.shape == (2,)


class TestPhiP:
    def test_zero_snr_gives_zero_bits(self):
        assert phi_p(0.0) == 0.0

    def test_unit_snr(self):
        assert phi_p(1.0) == pytest.approx(0.7274682069659875, abs=1e-12)

    def test_top_rate_threshold(self):
        # 2.40 dB row of the polarization table carries 0.90 bits
        assert phi_p(1.738) == pytest.approx(0.90, abs=0.01)

    def test_asymptote_is_one(self):
        assert phi_p(100.0) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_negative_snr(self):
        with pytest.raises(ValueError):
            phi_p(-1e-9)


class TestPhiSInv:
    def test_zero_bits(self):
        assert phi_s_inv(0.0) == 0.0

    def test_lowest_rate_threshold(self):
        snr = phi_s_inv(0.68)
        assert 10 * np.log10(snr) == pytest.approx(-2.15, abs=0.02)

    def test_one_bit_matches_dense_grid_oracle(self):
        # oracle: interpolated inverse on a 2e6-point tabulation of phi_s
        assert phi_s_inv(1.0) == pytest.approx(1.042232447733777, abs=1e-6)

    def test_residual_tolerance(self):
        for bits in [1e-6, 0.1, 0.68, 1.0, 1.74, 1.9999]:
            assert abs(phi_s(phi_s_inv(bits)) - bits) <= 1e-9

    def test_round_trip_relative_error(self):
        # near saturation (g > ~36) float64 cannot resolve the SNR from the
        # bits value at 1e-8 relative; beyond ~64 phi_s rounds to exactly 2.0
        for g in np.geomspace(1e-4, 36.0, 80):
            back = phi_s_inv(phi_s(g))
            assert abs(back - g) / max(g, 1.0) <= 1e-8

    def test_saturation_error(self):
        with pytest.raises(SaturationError):
            phi_s_inv(2.0)
        with pytest.raises(SaturationError):
            phi_s_inv(2.5)

    def test_negative_bits_rejected(self):
        with pytest.raises(ValueError):
            phi_s_inv(-0.01)


class TestPhiPInv:
    def test_zero_bits(self):
        assert phi_p_inv(0.0) == 0.0

    def test_known_point(self):
        assert phi_p_inv(0.7275) == pytest.approx(1.0, abs=2e-4)

    def test_derived_point(self):
        assert phi_p_inv(0.9738) == pytest.approx(2.8015352832423734, rel=1e-12)

    def test_exact_round_trip(self):
        # closed form; float64 cancellation near saturation caps the range
        for g in np.geomspace(1e-6, 14.0, 60):
            assert phi_p_inv(phi_p(g)) == pytest.approx(g, rel=1e-9)

    def test_saturation_error(self):
        with pytest.raises(SaturationError):
            phi_p_inv(1.0)

    def test_negative_bits_rejected(self):
        with pytest.raises(ValueError):
            phi_p_inv(-1e-12)


class TestIpBound:
    def test_equal_columns_zero(self):
        h = np.array([1.0 + 0.5j, -0.3j])
        assert pmod_ip_bound(5.0, 1.0, h, h) == 0.0

    def test_zero_snr_zero(self):
        assert pmod_ip_bound(0.0, 1.0, H_DIAG[:, 0], H_DIAG[:, 1]) == 0.0

    def test_diagonal_channel_value(self):
        val = pmod_ip_bound(1.0, 1.0, H_DIAG[:, 0], H_DIAG[:, 1])
        assert val == pytest.approx(0.9738151890004838, rel=1e-12)
        assert val == pytest.approx(diagonal_ip_bound(1.0), rel=1e-12)

    def test_bounded_by_one_bit(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            h1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            h2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            v = pmod_ip_bound(rng.uniform(0, 50), 1.0, h1, h2)
            assert 0.0 <= v <= 1.0

    def test_zero_iff_degenerate(self):
        rng = np.random.default_rng(4)
        h1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        h2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert pmod_ip_bound(1.0, 1.0, h1, h2) > 0.0
        assert pmod_ip_bound(1.0, 1.0, h1, h1) == 0.0

    def test_matches_diagonal_special_case(self):
        for g in [0.1, 1.0, 3.0]:
            full = pmod_ip_bound(g, 1.0, H_DIAG[:, 0], H_DIAG[:, 1])
            assert full == pytest.approx(diagonal_ip_bound(g), rel=1e-12)

    def test_broadcasts_over_snapshots(self):
        h1 = np.ones((5, 2), dtype=complex)
        h2 = np.zeros((5, 2), dtype=complex)
        out = pmod_ip_bound(1.0, 1.0, h1, h2)
        assert out.shape == (5,)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            pmod_ip_bound(-1.0, 1.0, H_DIAG[:, 0], H_DIAG[:, 1])
        with pytest.raises(ValueError):
            pmod_ip_bound(1.0, 0.0, H_DIAG[:, 0], H_DIAG[:, 1])


class TestMonteCarloPolarization:
    def test_zero_snr_is_zero_information(self):
        assert mc_polarization_mi(0.0, H_DIAG, n_samples=20_000, seed=1) == pytest.approx(
            0.0, abs=0.01)

    def test_diagonal_unit_snr_matches_fit(self):
        est = mc_polarization_mi(1.0, H_DIAG, n_samples=100_000, seed=42)
        assert 0.60 <= est <= 0.78
        assert abs(est - phi_p(1.0)) <= 0.05

    def test_identical_columns_carry_nothing(self):
        h = np.array([[1.0, 1.0], [0.5, 0.5]], dtype=complex)
        assert mc_polarization_mi(1.0, h, n_samples=20_000, seed=2) == pytest.approx(
            0.0, abs=0.01)

    def test_deterministic_for_seed(self):
        a = mc_polarization_mi(0.7, H_DIAG, n_samples=5_000, seed=9)
        b = mc_polarization_mi(0.7, H_DIAG, n_samples=5_000, seed=9)
        assert a == b

    def test_fit_tracks_monte_carlo_over_grid(self):
        for snr_db in [-10, -5, 0, 2, 5, 10]:
            g = db_to_lin(snr_db)
            est = mc_polarization_mi(g, H_DIAG, n_samples=100_000, seed=50 + snr_db)
            assert abs(est - phi_p(g)) <= 0.05

    def test_confidence_interval_shrinks(self):
        _, wide = mc_polarization_mi_ci(1.0, H_DIAG, n_samples=2_000, seed=0)
        _, tight = mc_polarization_mi_ci(1.0, H_DIAG, n_samples=50_000, seed=0)
        assert tight < wide

    def test_zero_samples_rejected(self):
        with pytest.raises(ValueError):
            mc_polarization_mi(1.0, H_DIAG, n_samples=0, seed=0)


class TestMonteCarloQpsk:
    def test_zero_snr(self):
        assert mc_qpsk_mi(0.0, n_samples=20_000, seed=1) == pytest.approx(0.0, abs=0.01)

    def test_lowest_threshold_consistency(self):
        assert mc_qpsk_mi(0.6095, n_samples=100_000, seed=2) == pytest.approx(0.68, abs=0.03)

    def test_saturates_at_two_bits(self):
        assert mc_qpsk_mi(100.0, n_samples=20_000, seed=3) == pytest.approx(2.0, abs=0.01)

    def test_fit_tracks_monte_carlo_over_grid(self):
        for snr_db in [-10, -5, 0, 2, 5, 10]:
            g = db_to_lin(snr_db)
            est = mc_qpsk_mi(g, n_samples=100_000, seed=70 + snr_db)
            assert abs(est - phi_s(g)) <= 0.05

    def test_deterministic_for_seed(self):
        assert mc_qpsk_mi(1.0, 5_000, seed=4) == mc_qpsk_mi(1.0, 5_000, seed=4)


class TestExponentialFit:
    def test_single_term_recovers_polarization_decay_rate(self):
        g = db_to_lin(np.arange(-12.0, 12.5, 0.5))
        model = fit_exponential_capacity(list(zip(g, phi_p(g))), n_terms=1)
        assert model.weights[0][1] == pytest.approx(1.30, abs=0.02)
        assert model.saturation == pytest.approx(1.0, abs=1e-3)
        assert model.residual_rms < 1e-6

    def test_two_term_refit_stays_close_to_symbol_law(self):
        g = db_to_lin(np.arange(-12.0, 18.5, 0.5))
        samples = [(gi, mc_qpsk_mi(gi, n_samples=100_000, seed=100 + i))
                   for i, gi in enumerate(g)]
        model = fit_exponential_capacity(samples, n_terms=2)
        check = db_to_lin(np.arange(-10.0, 15.25, 0.25))
        assert np.max(np.abs(model(check) - phi_s(check))) <= 0.03

    def test_degenerate_samples_rejected(self):
        g = db_to_lin(np.arange(-12.0, 12.5, 1.0))
        with pytest.raises(FitError):
            fit_exponential_capacity([(gi, 0.0) for gi in g], n_terms=1)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            fit_exponential_capacity([(0.1, 0.1), (10.0, 1.0)], n_terms=1)

    def test_narrow_span_rejected(self):
        g = np.linspace(1.0, 2.0, 20)
        with pytest.raises(ValueError):
            fit_exponential_capacity(list(zip(g, phi_p(g))), n_terms=1)

    def test_model_invariants(self):
        g = db_to_lin(np.arange(-12.0, 12.5, 0.5))
        model = fit_exponential_capacity(list(zip(g, phi_s(g))), n_terms=2)
        amps = [a for a, _ in model.weights]
        rates = [r for _, r in model.weights]
        assert sum(amps) == pytest.approx(1.0, abs=1e-9)
        assert all(r > 0 for r in rates)
        assert model(0.0) == pytest.approx(0.0, abs=1e-12)
        grid = np.linspace(0.0, 30.0, 500)
        assert np.all(np.diff(model(grid)) > -1e-12)

    def test_model_evaluation_matches_formula(self):
        model = ExpFitModel(weights=((0.8551, 0.5718), (0.1449, 1.55)),
                            saturation=2.0, residual_rms=0.0)
        g = np.array([0.3, 1.7])
        assert np.allclose(model(g), phi_s(g), rtol=1e-12)
