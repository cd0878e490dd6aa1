"""Fixtures for CLI tests."""

import pytest

from edfvae.cli.config import ExperimentConfig


@pytest.fixture
def small_config(tmp_path, output_root):
    """A config small enough to train in a second: d=20, 20 minibatches, 20-unit hidden layer."""
    cfg = ExperimentConfig(
        dataset="synthetic://?n=600&d=20",
        kappa=2,
        hidden_scale=0.01,
        total_batches=20,
        eval_every=10,
        eval_mc_samples=2,
        output_dir="run",
    )
    path = tmp_path / "experiment.yaml"
    cfg.save(path)
    return str(path)
