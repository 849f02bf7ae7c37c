import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orientkit.distributions import (
    DiscreteCircularDistribution,
    PeriodicVonMisesParams,
    TargetConfig,
    bessel_i0,
    make_periodic_target,
    make_unimodal_target,
    normalize,
    periodic_density,
)
from orientkit.errors import ValidationError

from oracles import bessel_i0_series

# frozen via the extended-precision series oracle (asserted below)
I0_AT_2 = 2.2795853023360673
I0_AT_10 = 2815.7166284662544

phis = st.floats(min_value=0.0, max_value=359.999, allow_nan=False)
alphas = st.integers(min_value=1, max_value=8)
sigmas = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)


class TestBesselI0:
    def test_zero_is_one(self):
        assert bessel_i0(0.0) == 1.0

    def test_frozen_oracle_values(self):
        assert bessel_i0_series(2.0) == I0_AT_2
        assert bessel_i0_series(10.0) == I0_AT_10
        assert bessel_i0(2.0) == pytest.approx(I0_AT_2, rel=1e-10)
        assert bessel_i0(10.0) == pytest.approx(I0_AT_10, rel=1e-10)

    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 5.0, 19.5, 20.5, 42.0, 100.0, 400.0, 700.0])
    def test_against_series_oracle(self, x):
        assert bessel_i0(x) == pytest.approx(bessel_i0_series(x), rel=1e-10)

    def test_overflow_returns_inf(self):
        assert bessel_i0(800.0) == math.inf

    @pytest.mark.parametrize("x", [-1.0, math.nan, math.inf])
    def test_bad_input(self, x):
        with pytest.raises(ValidationError):
            bessel_i0(x)


class TestMakePeriodicTarget:
    def test_alpha_zero_is_exactly_uniform(self):
        t = make_periodic_target(PeriodicVonMisesParams(0.0, 0, 0.5))
        assert np.all(t.bins == 1.0 / 360.0)

    def test_mode_sits_at_phase(self):
        t = make_periodic_target(PeriodicVonMisesParams(90.0, 1, 0.5))
        assert int(np.argmax(t.bins)) == 90

    def test_two_fold_joint_maxima(self):
        t = make_periodic_target(PeriodicVonMisesParams(30.0, 2, 0.5))
        assert t.bins[30] == pytest.approx(t.bins[210], abs=1e-15)
        assert int(np.argmax(t.bins)) in (30, 210)
        rolled = np.roll(t.bins, 180)
        np.testing.assert_allclose(t.bins, rolled, atol=1e-15)

    def test_matches_unshifted_continuous_form(self):
        # Same construction with the literal density exp(cos/s^2) / (2 pi I0(1/s^2)),
        # renormalized; the production exponent shift must not change the result.
        phi, alpha, sigma = 77.3, 2, 0.6
        i = np.arange(360.0)
        raw = np.exp(np.cos(alpha * np.deg2rad(i - phi)) / sigma**2)
        raw /= 2.0 * math.pi * bessel_i0(1.0 / sigma**2)
        expected = raw / raw.sum()
        t = make_periodic_target(PeriodicVonMisesParams(phi, alpha, sigma))
        np.testing.assert_allclose(t.bins, expected, rtol=1e-12)

    @given(phi=phis, sigma=sigmas, alpha=st.sampled_from([1, 2, 3, 4, 5, 6, 8]))
    @settings(max_examples=60, deadline=None)
    def test_periodic_in_360_over_alpha(self, phi, sigma, alpha):
        t = make_periodic_target(PeriodicVonMisesParams(phi, alpha, sigma))
        shift = 360 // alpha
        np.testing.assert_allclose(t.bins, np.roll(t.bins, -shift), atol=1e-12)

    @given(phi=phis, sigma=sigmas)
    @settings(max_examples=30, deadline=None)
    def test_alpha_zero_uniform_for_any_params(self, phi, sigma):
        t = make_periodic_target(PeriodicVonMisesParams(phi, 0, sigma))
        np.testing.assert_allclose(t.bins, 1.0 / 360.0, atol=1e-12)

    @given(phi=phis, alpha=alphas)
    @settings(max_examples=30, deadline=None)
    def test_monotone_concentration(self, phi, alpha):
        peaks = [
            make_periodic_target(PeriodicVonMisesParams(phi, alpha, s)).bins.max()
            for s in (1.0, 0.6, 0.3)
        ]
        assert peaks[0] < peaks[1] < peaks[2]

    @given(phi=st.integers(min_value=0, max_value=359), k=st.integers(min_value=0, max_value=359))
    @settings(max_examples=40, deadline=None)
    def test_phase_shift_equivariance(self, phi, k):
        base = make_periodic_target(PeriodicVonMisesParams(float(phi), 1, 0.5))
        shifted = make_periodic_target(PeriodicVonMisesParams(float((phi + k) % 360), 1, 0.5))
        np.testing.assert_allclose(shifted.bins, np.roll(base.bins, k), atol=1e-12)

    @given(phi=phis, alpha=st.integers(min_value=0, max_value=8), sigma=sigmas)
    @settings(max_examples=60, deadline=None)
    def test_normalized(self, phi, alpha, sigma):
        t = make_periodic_target(PeriodicVonMisesParams(phi, alpha, sigma))
        assert abs(t.bins.sum() - 1.0) <= 1e-9

    def test_sigma_clamped_at_degenerate_extremes(self):
        sharp = make_periodic_target(PeriodicVonMisesParams(10.0, 1, 1e-7))
        floor = make_periodic_target(PeriodicVonMisesParams(10.0, 1, 1e-3))
        np.testing.assert_array_equal(sharp.bins, floor.bins)

    def test_wrong_bin_count_rejected(self):
        with pytest.raises(ValidationError):
            make_periodic_target(PeriodicVonMisesParams(0.0, 1, 0.5), n_bins=180)


class TestMakeUnimodalTarget:
    def test_mode_at_mu_360(self):
        t = make_unimodal_target(180.0, TargetConfig(sigma=0.5, n_bins=360))
        assert int(np.argmax(t.bins)) == 180
        assert t.n_bins == 360

    def test_equals_alpha_one_periodic(self):
        t = make_unimodal_target(42.0, TargetConfig(sigma=0.5, n_bins=360))
        p = make_periodic_target(PeriodicVonMisesParams(42.0, 1, 0.5))
        np.testing.assert_array_equal(t.bins, p.bins)

    def test_polar_symmetric_about_mu(self):
        t = make_unimodal_target(90.0, TargetConfig(sigma=0.5, n_bins=180))
        for k in range(1, 90):
            assert t.bins[90 - k] == pytest.approx(t.bins[90 + k], rel=1e-12)

    def test_circular_wraparound_at_zero(self):
        t = make_unimodal_target(0.0, TargetConfig(sigma=0.5, n_bins=360))
        assert t.bins[359] == pytest.approx(t.bins[1], rel=1e-12)

    def test_polar_truncated_not_wrapped(self):
        # mass near 0 must not leak to the 179 end
        t = make_unimodal_target(5.0, TargetConfig(sigma=0.2, n_bins=180))
        assert int(np.argmax(t.bins)) == 5
        assert t.bins[179] < t.bins[0]

    @pytest.mark.parametrize("mu,n", [(360.0, 360), (-1.0, 360), (180.0, 180), (200.0, 180)])
    def test_out_of_domain_mu(self, mu, n):
        with pytest.raises(ValidationError):
            make_unimodal_target(mu, TargetConfig(sigma=0.5, n_bins=n))


class TestNormalize:
    def test_uniform_four_bins(self):
        d = normalize([1, 1, 1, 1], period_deg=360.0)
        np.testing.assert_array_equal(d.bins, [0.25, 0.25, 0.25, 0.25])

    def test_single_mass(self):
        raw = np.zeros(360)
        raw[0] = 2.0
        d = normalize(raw)
        assert d.bins[0] == 1.0
        assert d.bins[1:].sum() == 0.0

    def test_all_zero_rejected(self):
        with pytest.raises(ValidationError):
            normalize(np.zeros(360))

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            normalize([1.0, -0.5, 2.0])

    @given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=400).filter(lambda xs: sum(xs) > 0))
    @settings(max_examples=50, deadline=None)
    def test_sums_to_one(self, raw):
        d = normalize(raw)
        assert abs(d.bins.sum() - 1.0) <= 1e-9


class TestDiscreteCircularDistribution:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            DiscreteCircularDistribution(np.full(360, 2.0 / 360.0))

    def test_rejects_negative(self):
        bins = np.full(4, 0.25)
        bins[0], bins[1] = -0.25, 0.75
        with pytest.raises(ValidationError):
            DiscreteCircularDistribution(bins)

    def test_bins_are_immutable(self):
        d = normalize([1, 1, 1, 1])
        with pytest.raises(ValueError):
            d.bins[0] = 5.0

    def test_does_not_mutate_caller_array(self):
        raw = np.full(4, 0.25)
        DiscreteCircularDistribution(raw)
        raw[0] = 9.0  # would raise if the constructor froze the caller's buffer


class TestParamsValidation:
    @pytest.mark.parametrize("phi,alpha,sigma", [(-1.0, 1, 0.5), (360.0, 1, 0.5), (0.0, 9, 0.5), (0.0, -1, 0.5), (0.0, 1, 0.0), (0.0, 1, -2.0)])
    def test_invalid_params(self, phi, alpha, sigma):
        with pytest.raises(ValidationError):
            PeriodicVonMisesParams(phi, alpha, sigma)

    def test_non_integer_alpha(self):
        with pytest.raises(ValidationError):
            PeriodicVonMisesParams(0.0, 1.5, 0.5)

    def test_density_helper_matches_target(self):
        raw = periodic_density(20.0, 2, 0.4)
        t = make_periodic_target(PeriodicVonMisesParams(20.0, 2, 0.4))
        np.testing.assert_allclose(raw / raw.sum(), t.bins, atol=1e-15)
