"""
Synthetic data with a known low-dimensional signal.

``synthetic_bernoulli`` draws two latent factors a₁ ~ N(0, 0.09) and
a₂ ~ N(0, 0.25) per row, loads them on coordinates 1–20 and 21–40
respectively, and samples x_j ~ Bernoulli(sigmoid((A·Bᵀ)_j)). Coordinates past
40 are pure coin flips.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..core.numerics import make_rng
from ..errors import ConfigError
from .base import BaseLoader, Dataset, register_loader
from .utils import split_rows

FACTOR_VARIANCES = (0.09, 0.25)
BLOCK = 20


def loading_matrix(d: int) -> np.ndarray:
    """B with ones at rows 0–19 of column 0 and rows 20–39 of column 1."""
    b = np.zeros((d, len(FACTOR_VARIANCES)))
    for k in range(len(FACTOR_VARIANCES)):
        b[k * BLOCK : min((k + 1) * BLOCK, d), k] = 1.0
    return b


def sample_bernoulli_factors(n: int, d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x, probabilities)``, both (n, d)."""
    a = rng.standard_normal((n, len(FACTOR_VARIANCES))) * np.sqrt(FACTOR_VARIANCES)
    pi = expit(a @ loading_matrix(d).T)
    x = (rng.random((n, d)) < pi).astype(np.float64)
    return x, pi


def synthetic_bernoulli(n: int = 10_000, d: int = 200, seed: int = 0, test_fraction: float = 0.33) -> Dataset:
    if n < 2 or d < 1:
        raise ConfigError(f"synthetic data needs n >= 2 and d >= 1, got n={n}, d={d}")
    x, _ = sample_bernoulli_factors(n, d, make_rng(seed))
    train, test = split_rows(x, test_fraction)
    return Dataset(train, test, name="synthetic", metadata={"n": n, "d": d, "seed": seed, "signal_dims": 2})


def synthetic_gaussian(
    n: int = 1000,
    d: int = 10,
    signal: tuple[float, ...] = (9.0, 4.0),
    noise_var: float = 1.0,
    seed: int = 0,
    test_fraction: float = 0.0,
) -> Dataset:
    """x = W·a + b + noise with an orthonormal random signal subspace.

    ``signal`` holds the latent variances along the subspace directions.
    """
    k = len(signal)
    if d <= k or n < 2:
        raise ConfigError(f"need d > {k} and n >= 2, got d={d}, n={n}")
    rng = make_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((d, k)))
    a = rng.standard_normal((n, k)) * np.sqrt(signal)
    offset = rng.normal(0.0, 1.0, size=d)
    x = a @ basis.T + offset + rng.standard_normal((n, d)) * np.sqrt(noise_var)
    train, test = split_rows(x, test_fraction)
    return Dataset(
        train,
        test,
        name="synthetic-gaussian",
        value_range=None,
        metadata={"n": n, "d": d, "seed": seed, "signal_dims": k, "basis": basis},
    )


class SyntheticLoader(BaseLoader):
    """``synthetic://?n=10000&d=200&seed=0``; ``gaussian=1`` switches to the Gaussian generator."""

    @property
    def source_type(self) -> str:
        return "synthetic"

    def validate(self) -> bool:
        self.query()
        return True

    def load(self) -> Dataset:
        q = self.query()
        seed = int(q.get("seed", self.options.get("seed", 0)))
        test_fraction = float(q.get("test_fraction", self.options.get("test_fraction", 0.33)))
        try:
            if q.get("gaussian", "0") not in ("0", "false", ""):
                return synthetic_gaussian(
                    n=int(q.get("n", 1000)), d=int(q.get("d", 10)), seed=seed, test_fraction=test_fraction
                )
            return synthetic_bernoulli(
                n=int(q.get("n", 10_000)), d=int(q.get("d", 200)), seed=seed, test_fraction=test_fraction
            )
        except ValueError as e:
            raise ConfigError(f"Bad synthetic dataset parameters in '{self.uri}': {e}") from e


register_loader("synthetic", SyntheticLoader)
