import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from src.errors import BoundsError, NotBimodalError
from src.imaging.histogram import LEVEL_VALUES, Histogram
from src.threshold.gaussian import SIGMA_FLOOR, BimodalMixture, GaussianComponent, with_prior
from src.threshold.mixture import ValidationStatus, fit_bimodal, fit_quality, mixture_pdf, validate_bimodal


def planted_histogram(rng, count, mu1, sigma1, mu2, sigma2, object_prior):
    is_object = rng.random(count) < object_prior
    values = np.where(is_object, rng.normal(mu2, sigma2, count), rng.normal(mu1, sigma1, count))
    return Histogram.from_samples(np.clip(np.round(values), 0, 255).astype(np.uint8))


class TestMixtureModel:
    def test_pdf_at_background_mean(self):
        mixture = BimodalMixture.from_parameters(50, 10, 150, 10, 0.5)
        expected = 0.5 / (10 * math.sqrt(2 * math.pi))
        assert mixture_pdf(mixture, 50) == pytest.approx(expected, rel=1e-9)
        assert mixture_pdf(mixture, 50) == pytest.approx(0.0199471, abs=1e-7)

    def test_symmetric_mixture(self):
        mixture = BimodalMixture.from_parameters(50, 10, 150, 10, 0.5)
        for offset in (0.0, 7.5, 31.0):
            assert mixture_pdf(mixture, 100 - offset) == pytest.approx(mixture_pdf(mixture, 100 + offset))

    def test_priors_must_sum_to_one(self):
        with pytest.raises(BoundsError):
            BimodalMixture(GaussianComponent(50, 5, 0.5), GaussianComponent(150, 5, 0.6))

    def test_sigma_floor_enforced(self):
        with pytest.raises(BoundsError):
            GaussianComponent(50, 0.1, 0.5)

    def test_background_must_be_darker(self):
        with pytest.raises(BoundsError):
            BimodalMixture.from_parameters(150, 5, 50, 5, 0.5)

    def test_with_prior_overrides_area_ratio(self):
        mixture = with_prior(BimodalMixture.from_parameters(50, 5, 150, 8, 0.5), 0.2)
        assert mixture.object.prior == pytest.approx(0.2)
        assert mixture.background.prior == pytest.approx(0.8)
        assert (mixture.background.mu, mixture.object.sigma) == (50, 8)


    @pytest.mark.parametrize("params", [(50, 10, 150, 10, 0.5), (40, 3, 180, 5, 0.3), (60, 0.25, 61, 40, 0.9)])
    def test_pdf_integrates_to_one(self, params):
        mixture = BimodalMixture.from_parameters(*params)
        components = (mixture.background, mixture.object)
        low = min(c.mu - 40 * c.sigma for c in components)
        high = max(c.mu + 40 * c.sigma for c in components)
        total, _ = integrate.quad(lambda x: float(mixture_pdf(mixture, x)), low, high,
                                  points=[mixture.background.mu, mixture.object.mu],
                                  limit=500, epsabs=1e-13, epsrel=1e-13)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestFitBimodal:
    def test_recovers_planted_parameters_across_seeds(self):
        recovered = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            mu1, gap = rng.uniform(20, 80), rng.uniform(80, 120)
            sigma1, sigma2 = rng.uniform(2, 8, size=2)
            prior = rng.uniform(0.2, 0.8)
            mixture = fit_bimodal(planted_histogram(rng, 100_000, mu1, sigma1, mu1 + gap, sigma2, prior))
            recovered += (
                abs(mixture.background.mu - mu1) <= 1
                and abs(mixture.object.mu - (mu1 + gap)) <= 1
                and abs(mixture.background.sigma - sigma1) <= 0.1 * sigma1
                and abs(mixture.object.sigma - sigma2) <= 0.1 * sigma2
                and abs(mixture.object.prior - prior) <= 0.05
            )
        assert recovered >= 19

    def test_recovers_planted_parameters(self, rng):
        histogram = planted_histogram(rng, 100_000, 40, 3, 180, 5, 0.3)
        mixture = fit_bimodal(histogram)
        assert abs(mixture.background.mu - 40) <= 1
        assert abs(mixture.object.mu - 180) <= 1
        assert mixture.background.sigma == pytest.approx(3, rel=0.1)
        assert mixture.object.sigma == pytest.approx(5, rel=0.1)
        assert abs(mixture.object.prior - 0.3) <= 0.05

    def test_single_level_is_not_bimodal(self):
        with pytest.raises(NotBimodalError) as excinfo:
            fit_bimodal(Histogram.from_bins({40: 500}))
        assert excinfo.value.last_split == pytest.approx(40)

    def test_two_spikes(self):
        mixture = fit_bimodal(Histogram.from_bins({0: 500, 255: 500}))
        assert mixture.background.mu == 0
        assert mixture.object.mu == 255
        assert mixture.background.prior == pytest.approx(0.5)
        assert mixture.object.prior == pytest.approx(0.5)
        assert mixture.background.sigma == SIGMA_FLOOR
        assert mixture.object.sigma == SIGMA_FLOOR

    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.floats(20, 100),
        st.floats(40, 120),
        st.floats(2, 10),
        st.floats(0.15, 0.85),
    )
    def test_invariant_under_duplicated_samples(self, seed, mu1, gap, sigma, prior):
        histogram = planted_histogram(np.random.default_rng(seed), 2000, mu1, sigma, mu1 + gap, sigma, prior)
        doubled = histogram + histogram
        try:
            single = fit_bimodal(histogram)
        except NotBimodalError:
            with pytest.raises(NotBimodalError):
                fit_bimodal(doubled)
            return
        assert fit_bimodal(doubled) == single


class TestFitQuality:
    def test_self_comparison(self):
        mixture = BimodalMixture.from_parameters(60, 5, 160, 10, 0.5)
        counts = np.round(mixture.pdf(LEVEL_VALUES) * 1e9).astype(np.int64)
        assert fit_quality(mixture, Histogram(counts)) <= 1e-12

    def test_uniform_histogram_fits_poorly(self):
        histogram = Histogram(np.ones(256, dtype=int))
        assert fit_quality(fit_bimodal(histogram), histogram) > 5e-7

    def test_planted_histogram_beats_uniform(self, rng):
        planted = planted_histogram(rng, 100_000, 40, 3, 180, 5, 0.3)
        uniform = Histogram(np.ones(256, dtype=int))
        planted_error = fit_quality(fit_bimodal(planted), planted)
        assert planted_error < fit_quality(fit_bimodal(uniform), uniform) / 10

    @settings(max_examples=30)
    @given(st.integers(2, 1000))
    def test_invariant_under_scaled_counts(self, k):
        histogram = Histogram.from_bins({38: 40, 40: 120, 42: 40, 178: 20, 180: 60, 182: 20})
        mixture = BimodalMixture.from_parameters(40, 1.5, 180, 1.5, 0.3)
        scaled = Histogram(histogram.counts * k)
        assert fit_quality(mixture, scaled) == pytest.approx(fit_quality(mixture, histogram), rel=1e-12)


class TestValidateBimodal:
    def test_planted_histogram_accepted(self, rng):
        validation = validate_bimodal(planted_histogram(rng, 100_000, 40, 3, 180, 5, 0.3), 1e-4)
        assert validation.accepted
        assert validation.mixture.fit_error == validation.fit_error
        assert validation.fit_error <= 1e-4

    def test_uniform_histogram_rejected(self):
        validation = validate_bimodal(Histogram(np.ones(256, dtype=int)), 5e-7)
        assert validation.status is ValidationStatus.FIT_ERROR_TOO_LARGE
        assert validation.mixture is None

    @pytest.mark.parametrize("tolerance", [1e-12, 1e-4, 1.0])
    def test_single_spike_rejected(self, tolerance):
        validation = validate_bimodal(Histogram.from_bins({90: 1000}), tolerance)
        assert validation.status is ValidationStatus.NOT_BIMODAL

    def test_tolerance_must_be_positive(self):
        with pytest.raises(ValueError):
            validate_bimodal(Histogram.from_bins({0: 1, 255: 1}), 0)
