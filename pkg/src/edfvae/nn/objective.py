"""
Minibatch β-ELBO with reparameterized sampling and manual gradients.

For a datum x with encoder output (μ, log σ²) and noise ε ~ Normal(0, I):

    z = μ + exp(½·log σ²) ⊙ ε
    ELBO = E_ε[log P(x | ρ·a(z))] − β·½·Σ_k (σ²_k + μ²_k − 1 − log σ²_k)

where a(z) is the decoder pre-activation. Gradients are those of the ELBO
(ascent direction) w.r.t. every entry of ``model.parameters()``.
"""

from __future__ import annotations

import logging

import numpy as np

from ..core.edf import FamilyKind, log_density, log_normalizer_prime
from ..errors import NumericalError
from .layers import POISSON_CLAMP, backward_stack, forward_stack
from .model import VaeModel

logger = logging.getLogger(__name__)


def kl_per_datum(mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(np.exp(logvar) + mu * mu - 1.0 - logvar, axis=1)


def _noise(eps, rng, mc_samples: int, shape: tuple[int, int]) -> np.ndarray:
    if eps is None:
        return rng.standard_normal((mc_samples,) + shape)
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim == 2:
        eps = eps[None]
    if eps.shape[1:] != shape:
        raise ValueError(f"eps must have trailing shape {shape}, got {eps.shape}")
    return eps


def elbo_minibatch(
    model: VaeModel,
    batch: np.ndarray,
    rng: np.random.Generator | None,
    mc_samples: int = 1,
    eps: np.ndarray | None = None,
    batch_index: int | None = None,
    compute_grads: bool = True,
) -> tuple[float, dict[str, np.ndarray] | None]:
    """Batch-averaged ELBO and its gradients.

    Args:
        batch: Observations (B, d); discrete families accept [0, n]-valued reals.
        rng: Source of ε when ``eps`` is not given.
        eps: Fixed noise of shape (S, B, κ) or (B, κ), for gradient checks.
        batch_index: Reported in :class:`NumericalError` on a non-finite value.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("batch must be a non-empty (B, d) matrix")
    b = x.shape[0]
    family = model.family
    rho = family.canonical_scale_rho
    phi = family.dispersion_phi
    noise = _noise(eps, rng, mc_samples, (b, model.kappa))
    samples = noise.shape[0]

    h, trunk_caches = forward_stack(model.trunk, x)
    mu, mu_cache = model.mu_head.forward(h)
    logvar, lv_cache = model.logvar_head.forward(h)
    std = np.exp(0.5 * logvar)
    kl = kl_per_datum(mu, logvar)

    ll_total = 0.0
    d_mu = np.zeros_like(mu)
    d_logvar = np.zeros_like(logvar)
    dec_grads: list[dict[str, np.ndarray]] | None = None
    for s in range(samples):
        z = mu + std * noise[s]
        _, caches = forward_stack(model.decoder, z)
        a = caches[-1][1]
        eta = model.natural_parameter(a)
        if not np.all(np.isfinite(eta)):
            raise NumericalError("decoder produced a non-finite natural parameter", batch_index)
        ll_total += float(np.sum(log_density(family, x, eta, relaxed=True)))
        if not compute_grads:
            continue
        d_eta = (x - log_normalizer_prime(family, eta)) / phi
        d_a = rho * d_eta / (b * samples)
        if family.kind is FamilyKind.POISSON:
            d_a = d_a * (np.abs(rho * a) < POISSON_CLAMP)
        d_z, grads = backward_stack(model.decoder, caches, d_pre_last=d_a)
        d_mu += d_z
        d_logvar += d_z * noise[s] * 0.5 * std
        if dec_grads is None:
            dec_grads = grads
        else:
            for acc, g in zip(dec_grads, grads, strict=True):
                for k in acc:
                    acc[k] += g[k]

    value = ll_total / (b * samples) - model.beta * float(np.mean(kl))
    if not np.isfinite(value):
        raise NumericalError(f"non-finite ELBO at batch {batch_index}", batch_index)
    if not compute_grads:
        return value, None

    d_mu -= model.beta * mu / b
    d_logvar -= model.beta * 0.5 * (np.exp(logvar) - 1.0) / b
    d_h_mu, mu_grads = model.mu_head.backward(mu_cache, d_out=d_mu)
    d_h_lv, lv_grads = model.logvar_head.backward(lv_cache, d_out=d_logvar)
    _, trunk_grads = backward_stack(model.trunk, trunk_caches, d_out=d_h_mu + d_h_lv)

    grads: dict[str, np.ndarray] = {}
    for i, g in enumerate(trunk_grads):
        grads.update({f"trunk.{i}.{k}": v for k, v in g.items()})
    grads.update({f"mu_head.{k}": v for k, v in mu_grads.items()})
    grads.update({f"logvar_head.{k}": v for k, v in lv_grads.items()})
    for i, g in enumerate(dec_grads or []):
        grads.update({f"decoder.{i}.{k}": v for k, v in g.items()})
    return value, grads


def evaluate_elbo(
    model: VaeModel,
    x: np.ndarray,
    rng: np.random.Generator,
    mc_samples: int = 16,
    chunk: int = 1000,
) -> float:
    """ELBO averaged over all rows of ``x``, evaluated in chunks without gradients."""
    x = np.asarray(x, dtype=np.float64)
    total = 0.0
    for start in range(0, x.shape[0], chunk):
        part = x[start : start + chunk]
        value, _ = elbo_minibatch(model, part, rng, mc_samples=mc_samples, compute_grads=False)
        total += value * part.shape[0]
    return total / x.shape[0]
