"""
Minibatch training loop.

Each run draws three independent PCG64 streams from its seed: one for the
epoch permutations, one for the reparameterization noise, and one for the
Monte-Carlo ELBO estimates at evaluation points. The last partial batch of
every epoch is dropped.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..core.numerics import spawn_rngs
from ..errors import ConfigError, NumericalError
from .model import VaeModel
from .objective import elbo_minibatch, evaluate_elbo
from .optim import AdamState, adam_step

logger = logging.getLogger(__name__)

HISTORY_HEADER = ("batch", "split", "elbo", "seconds")


@dataclass(frozen=True)
class TrainConfig:
    batch: int = 100
    total_batches: int = 25_000
    lr: float = 1e-4
    eval_every: int = 500
    seed: int = 0
    mc_samples: int = 1
    eval_mc_samples: int = 16

    def __post_init__(self):
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.total_batches < 0:
            raise ConfigError(f"total_batches must be >= 0, got {self.total_batches}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.mc_samples < 1 or self.eval_mc_samples < 1:
            raise ConfigError("Monte-Carlo sample counts must be >= 1")


@dataclass(frozen=True)
class TrainRecord:
    batch: int
    split: str
    elbo: float
    seconds: float


@dataclass
class TrainHistory:
    records: list[TrainRecord] = field(default_factory=list)

    def series(self, split: str) -> tuple[list[int], list[float]]:
        rows = [r for r in self.records if r.split == split]
        return [r.batch for r in rows], [r.elbo for r in rows]

    def csv_rows(self) -> list[tuple]:
        return [(r.batch, r.split, repr(r.elbo), f"{r.seconds:.3f}") for r in self.records]


def _batches(n: int, batch: int, rng: np.random.Generator):
    while True:
        perm = rng.permutation(n)
        for start in range(0, n - batch + 1, batch):
            yield perm[start : start + batch]


def train(
    model: VaeModel,
    train_x: np.ndarray,
    test_x: np.ndarray | None,
    config: TrainConfig,
    on_eval: Callable[[TrainRecord], None] | None = None,
) -> TrainHistory:
    """Train ``model`` in place with Adam on the negative ELBO.

    Evaluates train (and test) ELBO at batch 0, every ``eval_every`` batches
    and after the final batch.

    Raises:
        NumericalError: a minibatch produced a non-finite ELBO.
    """
    n = train_x.shape[0]
    if n < config.batch:
        raise ConfigError(f"training split has {n} rows, fewer than batch={config.batch}")
    shuffle_rng, noise_rng, eval_rng = spawn_rngs(config.seed, 3)
    state = AdamState(lr=config.lr)
    params = model.parameters()
    history = TrainHistory()
    started = time.perf_counter()

    def evaluate(step: int) -> None:
        splits = [("train", train_x)] + ([("test", test_x)] if test_x is not None and len(test_x) else [])
        for split, data in splits:
            value = evaluate_elbo(model, data, eval_rng, config.eval_mc_samples)
            record = TrainRecord(step, split, value, time.perf_counter() - started)
            history.records.append(record)
            logger.debug("batch %d %s ELBO %.4f", step, split, value)
            if on_eval is not None:
                on_eval(record)

    evaluate(0)
    batches = _batches(n, config.batch, shuffle_rng)
    for step in range(1, config.total_batches + 1):
        idx = next(batches)
        value, grads = elbo_minibatch(
            model, train_x[idx], noise_rng, mc_samples=config.mc_samples, batch_index=step
        )
        if not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NumericalError(f"non-finite gradient at batch {step}", step)
        adam_step(state, params, {k: -g for k, g in grads.items()})
        if step % config.eval_every == 0 or step == config.total_batches:
            evaluate(step)
    return history
