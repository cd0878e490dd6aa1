import math

import numpy as np
import pytest

from edfvae.core.edf import (
    EdfFamily,
    FamilyKind,
    base_measure,
    conditional_variance,
    log_density,
    log_normalizer,
    log_normalizer_prime,
    mean_response,
    parse_family_kind,
    variance_response,
)
from edfvae.errors import ConfigError, DomainError

FAMILIES = [
    EdfFamily.from_name("gaussian"),
    EdfFamily.from_name("bernoulli"),
    EdfFamily.from_name("binomial", trials_n=5),
    EdfFamily.from_name("poisson"),
]


class TestFamily:
    def test_constants_at_zero(self):
        assert EdfFamily.from_name("bernoulli").constants.f0 == pytest.approx(math.log(2.0))
        assert EdfFamily.from_name("bernoulli").constants.f2 == 0.25
        assert EdfFamily.from_name("binomial", trials_n=4).constants.f2 == 1.0
        c = EdfFamily.from_name("poisson").constants
        assert (c.f0, c.f1, c.f2) == (1.0, 1.0, 1.0)
        c = EdfFamily.from_name("gaussian").constants
        assert (c.f0, c.f1, c.f2) == (0.0, 0.0, 1.0)

    def test_parse_family_kind(self):
        assert parse_family_kind("Bernoulli ") is FamilyKind.BERNOULLI
        with pytest.raises(ConfigError, match="Unknown observation family"):
            parse_family_kind("gamma")

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            EdfFamily(FamilyKind.GAUSSIAN, dispersion_phi=0.0)
        with pytest.raises(DomainError):
            EdfFamily(FamilyKind.BERNOULLI, canonical_scale_rho=0.0)
        with pytest.raises(DomainError):
            EdfFamily(FamilyKind.BERNOULLI, trials_n=3)
        with pytest.raises(DomainError):
            EdfFamily(FamilyKind.POISSON, dispersion_phi=2.0)

    def test_from_name_ignores_irrelevant_options(self):
        fam = EdfFamily.from_name("poisson", trials_n=7, dispersion_phi=3.0)
        assert fam.trials_n == 1
        assert fam.dispersion_phi == 1.0

    def test_with_dispersion_gaussian_only(self, gaussian, bernoulli):
        assert gaussian.with_dispersion(0.5).dispersion_phi == 0.5
        with pytest.raises(DomainError):
            bernoulli.with_dispersion(0.5)


class TestResponses:
    def test_log_normalizer_at_zero(self, bernoulli, gaussian, poisson):
        assert log_normalizer(bernoulli, 0.0) == pytest.approx(0.6931, abs=1e-4)
        assert log_normalizer(gaussian, 0.0) == 0.0
        assert log_normalizer(poisson, 0.0) == 1.0

    def test_mean_response(self, bernoulli, gaussian):
        assert mean_response(bernoulli, 0.0) == 0.5
        assert mean_response(gaussian, 2.0) == 2.0
        tanh_head = EdfFamily.from_name("bernoulli", canonical_scale_rho=2.0)
        assert mean_response(tanh_head, 0.0) == 0.5
        theta = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(mean_response(tanh_head, theta), 0.5 * np.tanh(theta) + 0.5, atol=1e-12)

    def test_variance_response(self, bernoulli, gaussian, poisson):
        assert variance_response(bernoulli, 0.0) == 0.25
        assert variance_response(poisson, 0.0) == 1.0
        assert variance_response(gaussian, 7.3) == 1.0

    def test_conditional_variance_scales_with_dispersion(self, gaussian):
        assert conditional_variance(gaussian.with_dispersion(0.5), 1.0) == 0.5

    def test_scalar_in_scalar_out(self, bernoulli):
        assert isinstance(log_normalizer(bernoulli, 0.3), float)
        assert log_normalizer(bernoulli, np.zeros(3)).shape == (3,)

    def test_large_theta_does_not_overflow(self, bernoulli):
        assert log_normalizer(bernoulli, 800.0) == pytest.approx(800.0)

    def test_non_finite_theta(self, bernoulli):
        with pytest.raises(DomainError):
            log_normalizer(bernoulli, float("nan"))

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_finite_differences(self, family):
        h = 1e-4
        theta = np.linspace(-5, 5, 41)
        fd1 = (log_normalizer(family, theta + h) - log_normalizer(family, theta - h)) / (2 * h)
        np.testing.assert_allclose(log_normalizer_prime(family, theta), fd1, atol=1e-6 * max(1.0, np.abs(fd1).max()))
        fd2 = (log_normalizer_prime(family, theta + h) - log_normalizer_prime(family, theta - h)) / (2 * h)
        np.testing.assert_allclose(variance_response(family, theta), fd2, atol=1e-6 * max(1.0, np.abs(fd2).max()))

    @pytest.mark.parametrize("family", FAMILIES, ids=lambda f: f.name)
    def test_convexity(self, family):
        assert np.all(np.asarray(variance_response(family, np.linspace(-5, 5, 41))) > 0)


class TestLogDensity:
    def test_examples(self, gaussian, bernoulli, poisson):
        assert log_density(gaussian, 0.0, 0.0) == pytest.approx(-0.9189385, abs=1e-6)
        assert log_density(bernoulli, 1.0, 0.0) == pytest.approx(-math.log(2.0))
        assert log_density(poisson, 0.0, 0.0) == pytest.approx(-1.0)

    def test_gaussian_matches_normal_pdf(self):
        fam = EdfFamily.from_name("gaussian", dispersion_phi=2.0)
        x, theta = 1.5, -0.5
        expected = -0.5 * math.log(2 * math.pi * 2.0) - (x - theta) ** 2 / (2 * 2.0)
        assert log_density(fam, x, theta) == pytest.approx(expected)

    @pytest.mark.parametrize("theta", [-2.0, 0.0, 2.0])
    @pytest.mark.parametrize(
        "family,support",
        [
            (EdfFamily.from_name("bernoulli"), np.arange(2.0)),
            (EdfFamily.from_name("binomial", trials_n=6), np.arange(7.0)),
            (EdfFamily.from_name("poisson"), np.arange(201.0)),
        ],
        ids=["bernoulli", "binomial6", "poisson"],
    )
    def test_normalization(self, family, support, theta):
        total = np.sum(np.exp(log_density(family, support, np.full_like(support, theta))))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_outside_support(self, bernoulli, poisson):
        with pytest.raises(DomainError, match="bernoulli observations"):
            log_density(bernoulli, 2.0, 0.0)
        with pytest.raises(DomainError):
            log_density(bernoulli, 0.5, 0.0)
        with pytest.raises(DomainError):
            log_density(poisson, -1.0, 0.0)

    def test_relaxed_accepts_unit_interval(self, bernoulli):
        value = log_density(bernoulli, 0.3, 0.4, relaxed=True)
        assert math.isfinite(value)
        with pytest.raises(DomainError):
            log_density(bernoulli, 1.2, 0.0, relaxed=True)

    def test_relaxed_agrees_on_integers(self):
        fam = EdfFamily.from_name("binomial", trials_n=4)
        x = np.arange(5.0)
        np.testing.assert_allclose(base_measure(fam, x, relaxed=True), base_measure(fam, x), atol=1e-12)
