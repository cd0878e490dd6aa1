"""
Parameter initialization: He ("Bench") and closed-form MLE based ("MLE-B").
"""

from __future__ import annotations

import logging

import numpy as np

from ..core.closed_form import MleSolution, variational_optima
from ..errors import ConfigError
from .layers import Dense
from .model import VaeModel

logger = logging.getLogger(__name__)

TRUNK_INITS = ("identity", "he")
LOGVAR_WEIGHTS = ("zero", "he")


def _he(layer: Dense, rng: np.random.Generator) -> None:
    fan_in = layer.spec.in_dim
    layer.weight[...] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=layer.weight.shape)
    layer.bias[...] = 0.0


def init_bench(model: VaeModel, rng: np.random.Generator) -> VaeModel:
    """Weights ~ Normal(0, 2/fan_in), biases 0, for every layer."""
    for _, layer in model.layers():
        _he(layer, rng)
    return model


def _identity_trunk(model: VaeModel) -> None:
    d = model.d
    for i, layer in enumerate(model.trunk):
        if layer.spec.out_dim < d:
            raise ConfigError(
                f"identity trunk needs every trunk layer at least {d} wide, trunk.{i} has {layer.spec.out_dim}"
            )
        # first d units copy the first d inputs and ignore the remaining ones
        layer.weight[:, :d] = 0.0
        layer.weight[:d, :d] = np.eye(d)
        layer.bias[:d] = 0.0
    logger.debug("identity trunk installed over %d layers", len(model.trunk))


def init_mle_b(
    model: VaeModel,
    sol: MleSolution,
    rng: np.random.Generator,
    x_bar: np.ndarray | None = None,
    trunk_init: str = "identity",
    logvar_weights: str = "zero",
) -> VaeModel:
    """Initialize decoder output and encoder heads from the closed-form MLE.

    The decoder output layer gets Ŵ/ρ and b̂/ρ, the μ head gets the optimal
    affine posterior-mean map written on raw inputs, and the log σ² head bias
    gets log diag Σ̂_z. Rows of these layers beyond the closed-form dimensions
    are zero. Every other parameter is He-initialized, except that with
    ``trunk_init="identity"`` the first d units of each trunk layer pass the
    input through unchanged (exact for nonnegative inputs).
    """
    if trunk_init not in TRUNK_INITS:
        raise ConfigError(f"Unknown trunk_init '{trunk_init}'. Valid: {', '.join(TRUNK_INITS)}")
    if logvar_weights not in LOGVAR_WEIGHTS:
        raise ConfigError(f"Unknown logvar_weights '{logvar_weights}'. Valid: {', '.join(LOGVAR_WEIGHTS)}")
    if sol.d != model.d or sol.kappa != model.kappa:
        raise ConfigError(
            f"MLE solution is d={sol.d}, kappa={sol.kappa} but the model is d={model.d}, kappa={model.kappa}"
        )
    if sol.family.kind is not model.family.kind or sol.family.trials_n != model.family.trials_n:
        raise ConfigError(f"MLE solution was fit for {sol.family.name}, model uses {model.family.name}")
    if sol.beta != model.beta:
        logger.warning("MLE solution fit at beta=%g, model trains at beta=%g", sol.beta, model.beta)

    out_layer = model.decoder[-1]
    top = model.mu_head.spec.in_dim
    if out_layer.spec.in_dim < sol.kappa:
        raise ConfigError("decoder output layer is narrower than kappa")
    if top < sol.d:
        raise ConfigError(f"encoder heads see {top} features, need at least d={sol.d}")

    init_bench(model, rng)
    opt = variational_optima(sol, x_bar)
    rho = model.family.canonical_scale_rho

    out_layer.weight[...] = 0.0
    out_layer.weight[: sol.kappa, :] = sol.w_hat.T / rho
    out_layer.bias[...] = sol.b_hat / rho

    model.mu_head.weight[...] = 0.0
    model.mu_head.weight[: sol.d, :] = opt.mu_map_weight.T
    model.mu_head.bias[...] = opt.mu_map_bias

    if logvar_weights == "zero":
        model.logvar_head.weight[...] = 0.0
    else:
        model.logvar_head.weight[sol.d :, :] = 0.0
    model.logvar_head.bias[...] = np.log(np.diag(opt.sigma_z))

    if trunk_init == "identity":
        _identity_trunk(model)
    return model
