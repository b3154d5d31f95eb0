"""
Unit tests for the two-stage noise model and attenuation calibration.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from noisecal import (
    NoiseSample, RankDeficiencyError, band_average_noise, fit_by_frequency_bin, fit_two_stage,
    gain_grid, input_attenuation, predict_nsys, synthesize_samples,
)

# === FIXTURES ===

@pytest.fixture
def exact_samples():
    """Noise-free samples of N1 = 1.7, N2 = 20 at 20 gains."""
    return synthesize_samples(1.7, 20.0, gain_grid())

# === FIT TESTS ===

class TestTwoStageFit:
    """Test cases for the N_sys = N1 + N2 / G fit."""

    def test_exact_recovery(self, exact_samples):
        """Test noise-free data returns the generating parameters."""
        fit = fit_two_stage(exact_samples)
        assert fit.n1 == pytest.approx(1.7, rel=1e-9)
        assert fit.n2 == pytest.approx(20.0, rel=1e-9)
        assert fit.residual_norm == pytest.approx(0.0, abs=1e-9)
        assert fit.sample_count == 20
        assert not fit.flagged_negative

    def test_noisy_recovery(self):
        """Test 1% measurement noise keeps N1 within 0.1 quanta."""
        samples = synthesize_samples(1.7, 20.0, gain_grid(), sigma=0.01 * 1.7, seed=7)
        fit = fit_two_stage(samples)
        assert fit.n1 == pytest.approx(1.7, abs=0.1)
        assert fit.n2 == pytest.approx(20.0, rel=0.1)

    def test_published_chain_recovery(self):
        """Test N1 = 1.7, N2 = 17.5 survive 0.05 quanta of noise over 20 gains."""
        samples = synthesize_samples(1.7, 17.5, gain_grid(), sigma=0.05, seed=2024)
        fit = fit_two_stage(samples)
        assert fit.n1 == pytest.approx(1.7, abs=0.1)
        assert fit.n2 == pytest.approx(17.5, abs=0.5)
        exact = fit_two_stage(synthesize_samples(1.7, 17.5, gain_grid()))
        assert predict_nsys(exact, 5.01) == pytest.approx(5.19, abs=0.01)

    def test_scale_equivariance(self):
        """Test scaling every N_sys by a constant scales N1 and N2 by the same constant."""
        samples = synthesize_samples(1.7, 17.5, gain_grid(), sigma=0.05, seed=5)
        fit = fit_two_stage(samples)
        for factor in (0.25, 3.7, 1e3):
            scaled = fit_two_stage([s.model_copy(update={"nsys": s.nsys * factor}) for s in samples])
            assert scaled.n1 == pytest.approx(factor * fit.n1, rel=1e-12)
            assert scaled.n2 == pytest.approx(factor * fit.n2, rel=1e-12)

    def test_seed_is_reproducible(self):
        """Test a fixed seed reproduces the same samples."""
        first = synthesize_samples(1.7, 20.0, gain_grid(), sigma=0.1, seed=11)
        second = synthesize_samples(1.7, 20.0, gain_grid(), sigma=0.1, seed=11)
        assert [s.nsys for s in first] == [s.nsys for s in second]

    def test_synthesis_rejects_non_positive_mean(self):
        """Test a model with non-positive N_sys is refused instead of redrawn forever."""
        with pytest.raises(ValueError):
            synthesize_samples(-1.0, 0.5, [10.0], sigma=0.1, seed=1)
        with pytest.raises(ValueError):
            synthesize_samples(-1.0, 0.5, [10.0])

    def test_published_noise_levels(self):
        """Test N_sys approaches N1 at high gain and equals N1 + N2 at unity gain."""
        samples = [NoiseSample.from_db(7e9, gain_db, 1.7 + 20.0 / 10 ** (gain_db / 10))
                   for gain_db in (0.0, 5.0, 10.0, 15.0)]
        fit = fit_two_stage(samples)
        assert predict_nsys(fit, 1.0) == pytest.approx(21.7)
        assert predict_nsys(fit, 1e6) == pytest.approx(1.7, abs=1e-3)
        np.testing.assert_allclose(predict_nsys(fit, np.array([1.0, 10.0])), [21.7, 3.7])

    def test_single_sample_is_rank_deficient(self, exact_samples):
        """Test one sample cannot separate N1 from N2."""
        with pytest.raises(RankDeficiencyError):
            fit_two_stage(exact_samples[:1])

    def test_equal_gains_are_rank_deficient(self):
        """Test samples at a single gain cannot be fitted."""
        samples = [NoiseSample(frequency=7e9, gain=5.0, nsys=value) for value in (5.0, 5.2, 4.9)]
        with pytest.raises(RankDeficiencyError):
            fit_two_stage(samples)

    def test_negative_parameters_are_flagged(self, caplog):
        """Test a fit with negative N1 is reported but kept."""
        samples = [NoiseSample(frequency=7e9, gain=g, nsys=-1.0 + 20.0 / g) for g in (1.0, 2.0, 4.0)]
        fit = fit_two_stage(samples)
        assert fit.n1 == pytest.approx(-1.0)
        assert fit.flagged_negative
        assert "negative" in caplog.text

    def test_weights(self, exact_samples):
        """Test weights must match the samples and leave exact data unchanged."""
        fit = fit_two_stage(exact_samples, weights=np.linspace(1.0, 2.0, 20))
        assert fit.n1 == pytest.approx(1.7, rel=1e-9)
        with pytest.raises(ValueError):
            fit_two_stage(exact_samples, weights=[1.0, 2.0])

    def test_sample_validation(self):
        """Test gains and noise must be positive."""
        with pytest.raises(ValidationError):
            NoiseSample(frequency=7e9, gain=0.0, nsys=1.0)
        with pytest.raises(ValidationError):
            NoiseSample(frequency=7e9, gain=2.0, nsys=-1.0)

# === BINNING TESTS ===

class TestBinning:
    """Test cases for per-frequency and per-dataset fits."""

    def test_fit_by_frequency_bin(self):
        """Test every (dataset, bin) pair gets its own fit."""
        samples = (synthesize_samples(1.7, 20.0, gain_grid(count=5), frequency=6.02e9, dataset="both")
                   + synthesize_samples(2.5, 10.0, gain_grid(count=5), frequency=7.01e9, dataset="both")
                   + synthesize_samples(1.8, 20.0, gain_grid(count=5), frequency=6.03e9, dataset="pa-only"))
        fits = fit_by_frequency_bin(samples, 100e6)
        assert set(fits) == {("both", 6.0e9), ("both", 7.0e9), ("pa-only", 6.0e9)}
        assert fits[("both", 7.0e9)].n1 == pytest.approx(2.5)
        assert fits[("pa-only", 6.0e9)].n1 == pytest.approx(1.8)

    def test_unfittable_bin_is_skipped(self):
        """Test a bin with one sample is left out."""
        samples = synthesize_samples(1.7, 20.0, gain_grid(count=3), frequency=6e9) + [
            NoiseSample(frequency=8e9, gain=3.0, nsys=8.0)
        ]
        fits = fit_by_frequency_bin(samples, 100e6)
        assert list(fits) == [("", 6e9)]

    def test_band_average(self):
        """Test the in-band mean of N_sys ignores out-of-band points."""
        samples = [NoiseSample(frequency=f, gain=10.0, nsys=n)
                   for f, n in ((5.0e9, 9.0), (6.0e9, 5.0), (8.0e9, 5.4), (9.0e9, 9.0))]
        assert band_average_noise(samples, 5.5e9, 8.5e9) == pytest.approx(5.2)
        with pytest.raises(ValueError):
            band_average_noise(samples, 10e9, 11e9)

# === ATTENUATION TESTS ===

class TestInputAttenuation:
    """Test cases for the VNA attenuation estimate."""

    def test_attenuation(self):
        """Test A = P_in G / P_out."""
        assert input_attenuation(1e-3, 1e-5, 100.0) == pytest.approx(1e4)

    def test_invalid_powers(self):
        """Test non-positive powers are rejected."""
        with pytest.raises(ValueError):
            input_attenuation(1e-3, 0.0, 100.0)
        with pytest.raises(ValueError):
            gain_grid(lo=0.0)
