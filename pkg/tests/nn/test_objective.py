import math

import numpy as np
import pytest

from edfvae.core.edf import EdfFamily
from edfvae.core.numerics import make_rng
from edfvae.errors import NumericalError
from edfvae.nn import Activation, build_architecture, elbo_minibatch, evaluate_elbo
from edfvae.nn.objective import kl_per_datum

from .conftest import small_model


def _data(family_name, rng, shape=(5, 6)):
    if family_name == "bernoulli":
        return (rng.random(shape) < 0.5).astype(np.float64)
    if family_name == "binomial":
        return rng.binomial(3, 0.5, size=shape).astype(np.float64)
    if family_name == "poisson":
        return rng.poisson(2.0, size=shape).astype(np.float64)
    return rng.normal(size=shape)


class TestElboValue:
    def test_zero_model_gaussian(self):
        model = build_architecture("canonical", 6, 2, EdfFamily.from_name("gaussian"), hidden_scale=0.01)
        value, _ = elbo_minibatch(model, np.zeros((4, 6)), make_rng(0))
        assert value == pytest.approx(-6 / 2 * math.log(2 * math.pi), abs=1e-12)

    def test_kl_zero_at_prior(self):
        assert np.all(kl_per_datum(np.zeros((3, 2)), np.zeros((3, 2))) == 0.0)

    def test_kl_example(self):
        mu = np.array([[1.0, 0.0]])
        logvar = np.array([[0.0, math.log(2.0)]])
        assert kl_per_datum(mu, logvar)[0] == pytest.approx(0.5 * (1.0 + 2.0 - 1.0 - math.log(2.0)))

    def test_beta_scales_kl(self, binary_batch):
        model = small_model()
        eps = make_rng(0).standard_normal((1, 5, 2))
        mu, logvar = model.encode(binary_batch)
        kl = float(np.mean(kl_per_datum(mu, logvar)))
        v1, _ = elbo_minibatch(model, binary_batch, None, eps=eps, compute_grads=False)
        model.beta = 3.0
        v3, _ = elbo_minibatch(model, binary_batch, None, eps=eps, compute_grads=False)
        assert v1 - v3 == pytest.approx(2.0 * kl, rel=1e-10)

    def test_evaluate_is_chunk_invariant_in_expectation(self, binary_batch):
        model = small_model()
        x = np.tile(binary_batch, (4, 1))
        whole = evaluate_elbo(model, x, make_rng(0), mc_samples=4000)
        chunked = evaluate_elbo(model, x, make_rng(1), mc_samples=4000, chunk=3)
        assert whole == pytest.approx(chunked, abs=0.05)

    def test_bad_eps_shape(self, bernoulli_model, binary_batch):
        with pytest.raises(ValueError):
            elbo_minibatch(bernoulli_model, binary_batch, None, eps=np.zeros((5, 3)))

    def test_non_finite_raises_with_batch_index(self, bernoulli_model, binary_batch):
        bernoulli_model.decoder[0].bias[0] = np.nan
        with pytest.raises(NumericalError) as err:
            elbo_minibatch(bernoulli_model, binary_batch, make_rng(0), batch_index=17)
        assert err.value.batch_index == 17


class TestElboGradients:
    @pytest.mark.parametrize(
        "family_name,options",
        [
            ("bernoulli", {}),
            ("bernoulli", {"canonical_scale_rho": 2.0}),
            ("binomial", {"trials_n": 3}),
            ("gaussian", {}),
            ("poisson", {}),
        ],
        ids=["bernoulli", "bernoulli-tanh", "binomial", "gaussian", "poisson"],
    )
    @pytest.mark.parametrize("architecture", ["canonical", "deep"])
    def test_matches_finite_differences(self, family_name, options, architecture):
        rng = make_rng(11)
        model = small_model(family_name, architecture=architecture, seed=5, **options)
        for value in model.parameters().values():
            value *= 0.5
        x = _data(family_name, rng)
        eps = rng.standard_normal((2, 5, 2))
        _, grads = elbo_minibatch(model, x, None, eps=eps)

        def value():
            return elbo_minibatch(model, x, None, eps=eps, compute_grads=False)[0]

        h = 1e-5
        for name, param in model.parameters().items():
            fd = np.zeros_like(param)
            for idx in np.ndindex(param.shape):
                old = param[idx]
                param[idx] = old + h
                up = value()
                param[idx] = old - h
                down = value()
                param[idx] = old
                fd[idx] = (up - down) / (2 * h)
            np.testing.assert_allclose(grads[name], fd, rtol=1e-4, atol=1e-6, err_msg=name)

    def test_gradient_keys_cover_parameters(self, bernoulli_model, binary_batch):
        _, grads = elbo_minibatch(bernoulli_model, binary_batch, make_rng(0))
        assert set(grads) == set(bernoulli_model.parameters())

    def test_tanh_decoder_gradient_flows_through_rho(self):
        rng = make_rng(12)
        model = small_model("bernoulli", seed=6, canonical_scale_rho=2.0)
        assert model.decoder[-1].spec.activation is Activation.TANH_CANONICAL
        x = _data("bernoulli", rng)
        eps = rng.standard_normal((1, 5, 2))
        _, grads = elbo_minibatch(model, x, None, eps=eps)

        bias = model.decoder[-1].bias
        h = 1e-6
        fd = np.zeros_like(bias)
        for j in range(bias.size):
            old = bias[j]
            bias[j] = old + h
            up = elbo_minibatch(model, x, None, eps=eps, compute_grads=False)[0]
            bias[j] = old - h
            down = elbo_minibatch(model, x, None, eps=eps, compute_grads=False)[0]
            bias[j] = old
            fd[j] = (up - down) / (2 * h)
        np.testing.assert_allclose(grads["decoder.0.bias"], fd, rtol=1e-5, atol=1e-8)
        # with ρ=2 the bias gradient is 2·mean(x − σ(2a)) per coordinate
        a = model.decode(model.encode(x)[0] + np.exp(0.5 * model.encode(x)[1]) * eps[0])
        expected = 2.0 * np.mean(x - 1.0 / (1.0 + np.exp(-2.0 * a)), axis=0)
        np.testing.assert_allclose(grads["decoder.0.bias"], expected, rtol=1e-10, atol=1e-12)
