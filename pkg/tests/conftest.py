import os

import numpy as np
import pytest

from edfvae.core.edf import EdfFamily
from edfvae.data import synthetic_bernoulli


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def bernoulli():
    return EdfFamily.from_name("bernoulli")


@pytest.fixture
def gaussian():
    return EdfFamily.from_name("gaussian")


@pytest.fixture
def poisson():
    return EdfFamily.from_name("poisson")


@pytest.fixture
def diag_gaussian_data():
    """Eight rows ±2√λⱼ·eⱼ whose sample covariance (divisor N) is diag(5, 3, 1, 1)."""
    lam = np.array([5.0, 3.0, 1.0, 1.0])
    rows = []
    for j, value in enumerate(lam):
        e = np.zeros(4)
        e[j] = 2.0 * np.sqrt(value)
        rows += [e, -e]
    return np.array(rows)


@pytest.fixture(scope="session")
def small_synthetic():
    """Bernoulli factor data with two signal directions, small enough for unit tests."""
    return synthetic_bernoulli(n=3000, d=60, seed=0, test_fraction=0.33)


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    """Point relative output directories at a temporary root."""
    monkeypatch.setenv("EDFVAE_OUTPUT_ROOT", str(tmp_path))
    return tmp_path


@pytest.fixture
def mnist_dir():
    path = os.environ.get("EDFVAE_MNIST_DIR")
    if not path:
        pytest.skip("EDFVAE_MNIST_DIR is not set")
    return path
