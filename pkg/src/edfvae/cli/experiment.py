"""Steps shared by the ``mle``, ``train``, ``activity`` and ``init-export`` commands."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from edfvae.core.closed_form import (
    MleSolution,
    expected_remainder,
    mle_fit,
    objective_hat,
    variational_optima,
)
from edfvae.core.edf import EdfFamily
from edfvae.core.numerics import spawn_rngs
from edfvae.data import Dataset
from edfvae.errors import EdfVaeError
from edfvae.nn import (
    TrainConfig,
    TrainHistory,
    VaeModel,
    build_architecture,
    init_bench,
    init_mle_b,
    train,
)

from .config import ExperimentConfig

logger = logging.getLogger(__name__)

# child index of the seed's SeedSequence reserved for initialization;
# training uses children 0..2
INIT_STREAM = 3
REMAINDER_SAMPLES = 100_000


@dataclass(frozen=True)
class ReferenceValues:
    objective_hat: float
    expected_remainder: float

    @property
    def upper(self) -> float:
        return self.objective_hat + self.expected_remainder


def fit_mle(cfg: ExperimentConfig, data: Dataset, beta: float) -> MleSolution:
    family = cfg.observation_family()
    return mle_fit(
        data.train,
        family,
        beta,
        cfg.kappa,
        estimate_dispersion=family.is_gaussian and cfg.estimate_dispersion,
    )


def reference_values(sol: MleSolution, x: np.ndarray) -> ReferenceValues | None:
    """L̂ at the MLE and E[R₂] under the optimal posterior; None when β = 0."""
    if sol.beta <= 0:
        return None
    opt = variational_optima(sol)
    lhat = objective_hat(sol.decoder, x, sol.family, sol.beta)
    rem = expected_remainder(sol.decoder, opt.mu(x), opt.sigma_z, sol.family, samples=REMAINDER_SAMPLES)
    return ReferenceValues(lhat, rem)


def model_family(cfg: ExperimentConfig, sol: MleSolution | None) -> EdfFamily:
    """Observation family for training: σ̂² from the MLE when ``gaussian_phi`` is ``mle``."""
    family = cfg.observation_family()
    if family.is_gaussian and cfg.estimate_dispersion:
        if sol is not None:
            return sol.family
        logger.warning("no MLE available for sigma2_hat; training with phi=1")
    return family


def effective_init(init: str, beta: float) -> str:
    """The init actually used: MLE-B falls back to bench at β = 0, where Σ̂_z = 0."""
    if init == "mle_b" and beta <= 0:
        return "bench"
    return init


def build_model(
    cfg: ExperimentConfig,
    d: int,
    family: EdfFamily,
    beta: float,
    seed: int,
    sol: MleSolution | None,
) -> VaeModel:
    model = build_architecture(cfg.architecture, d, cfg.kappa, family, hidden_scale=cfg.hidden_scale, beta=beta)
    rng = spawn_rngs(seed, INIT_STREAM + 1)[INIT_STREAM]
    init = effective_init(cfg.init, beta)
    if init != cfg.init:
        logger.warning("seed %d: MLE-B is undefined at beta=0 (zero posterior variance); using bench", seed)
    if init == "mle_b":
        if sol is None:
            raise EdfVaeError("MLE-B initialization needs a closed-form solution")
        init_mle_b(model, sol, rng, trunk_init=cfg.trunk_init, logvar_weights=cfg.logvar_weights)
    else:
        init_bench(model, rng)
    model.metadata = {"init": init, "seed": seed, "beta": beta}
    return model


def train_config(cfg: ExperimentConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        batch=cfg.batch,
        total_batches=cfg.total_batches,
        lr=cfg.lr,
        eval_every=cfg.eval_every,
        seed=seed,
        eval_mc_samples=cfg.eval_mc_samples,
    )


def run_seed(
    cfg: ExperimentConfig,
    data: Dataset,
    family: EdfFamily,
    beta: float,
    seed: int,
    sol: MleSolution | None,
) -> tuple[VaeModel, TrainHistory]:
    model = build_model(cfg, data.d, family, beta, seed, sol)
    history = train(model, data.train, data.test if len(data.test) else None, train_config(cfg, seed))
    return model, history
