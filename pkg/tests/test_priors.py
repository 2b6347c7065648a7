"""Scalar prior containers and their JSON construction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from denoisekit.priors import GaussianMixture, Laplacian, prior_from_config

from oracles import gmm_logpdf, laplacian_logpdf


class TestLaplacian:
    def test_log_density_matches_definition(self):
        prior = Laplacian(scale=0.7)
        xs = np.linspace(-4, 4, 33)
        assert_allclose(prior.log_density(xs), laplacian_logpdf(xs, 0.7), rtol=1e-15)

    def test_density_integrates_to_one(self):
        prior = Laplacian(scale=1.3)
        grid = np.linspace(-60, 60, 400001)
        total = np.trapezoid(np.exp(prior.log_density(grid)), grid)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_rejects_bad_scale(self):
        for bad in (0.0, -1.0, np.inf, np.nan):
            with pytest.raises(ValueError):
                Laplacian(scale=bad)

    def test_support_radius_covers_mass(self):
        prior = Laplacian(scale=2.0)
        r = prior.support_radius()
        # tail mass beyond the radius is e^{-r/b}, negligible
        assert np.exp(-r / 2.0) < 1e-16


class TestGaussianMixture:
    def test_log_density_matches_reference(self):
        prior = GaussianMixture((0.2, 0.5, 0.3), (-2.0, 0.0, 1.5), (0.3, 1.0, 0.7))
        xs = np.linspace(-6, 6, 41)
        assert_allclose(
            prior.log_density(xs),
            gmm_logpdf(xs, (0.2, 0.5, 0.3), (-2.0, 0.0, 1.5), (0.3, 1.0, 0.7)),
            rtol=1e-13,
        )

    def test_moments(self):
        prior = GaussianMixture((0.25, 0.75), (-2.0, 2.0), (0.5, 1.0))
        mean = 0.25 * -2.0 + 0.75 * 2.0
        second = 0.25 * (0.5 + 4.0) + 0.75 * (1.0 + 4.0)
        assert prior.mean() == pytest.approx(mean)
        assert prior.variance() == pytest.approx(second - mean**2)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GaussianMixture((0.5, 0.6), (0.0, 1.0), (1.0, 1.0))

    def test_component_validation(self):
        with pytest.raises(ValueError):
            GaussianMixture((0.5, 0.5), (0.0, 1.0), (1.0, -1.0))
        with pytest.raises(ValueError):
            GaussianMixture((1.0,), (0.0, 1.0), (1.0, 1.0))
        with pytest.raises(ValueError):
            GaussianMixture((), (), ())

    def test_single_component_reduces_to_gaussian(self):
        prior = GaussianMixture((1.0,), (0.5,), (2.0,))
        xs = np.linspace(-3, 3, 11)
        expected = -0.5 * np.log(2 * np.pi * 2.0) - 0.5 * (xs - 0.5) ** 2 / 2.0
        assert_allclose(prior.log_density(xs), expected, rtol=1e-14)


class TestPriorFromConfig:
    def test_laplacian_round_trip(self):
        prior = prior_from_config({"laplacian": {"scale": 0.4}})
        assert isinstance(prior, Laplacian)
        assert prior.scale == 0.4

    def test_gmm_round_trip(self):
        prior = prior_from_config(
            {"gmm": {"w": [0.3, 0.7], "mu": [-1.0, 2.0], "var": [0.5, 1.5]}}
        )
        assert isinstance(prior, GaussianMixture)
        assert prior.weights == (0.3, 0.7)
        assert prior.means == (-1.0, 2.0)
        assert prior.variances == (0.5, 1.5)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError):
            prior_from_config({"laplacian": {"scale": 1.0, "rate": 2.0}})
        with pytest.raises(ValueError):
            prior_from_config({"gmm": {"w": [1.0], "mu": [0.0], "var": [1.0], "df": 3}})
        with pytest.raises(ValueError):
            prior_from_config({"student_t": {"df": 3}})
        with pytest.raises(ValueError):
            prior_from_config({"laplacian": {"scale": 1.0}, "gmm": {}})
