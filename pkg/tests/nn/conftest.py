"""Fixtures for the training-stack tests."""

import numpy as np
import pytest

from edfvae.core.edf import EdfFamily
from edfvae.core.numerics import make_rng
from edfvae.nn import build_architecture, init_bench


def small_model(family_name="bernoulli", architecture="canonical", d=6, kappa=2, seed=0, **family_options):
    family = EdfFamily.from_name(family_name, **family_options)
    model = build_architecture(architecture, d, kappa, family, hidden_scale=0.01, beta=1.0)
    return init_bench(model, make_rng(seed))


@pytest.fixture
def bernoulli_model():
    return small_model()


@pytest.fixture
def binary_batch():
    return (make_rng(3).random((5, 6)) < 0.5).astype(np.float64)
