"""From-scratch VAE training stack: dense layers, manual backprop, Adam."""

from .checkpoint import load_checkpoint, save_checkpoint
from .init import init_bench, init_mle_b
from .layers import Activation, Dense, LayerSpec
from .model import Architecture, VaeModel, build_architecture, canonical_activation
from .objective import elbo_minibatch, evaluate_elbo
from .optim import AdamState, adam_step
from .training import TrainConfig, TrainHistory, TrainRecord, train

__all__ = [
    "Activation",
    "AdamState",
    "Architecture",
    "Dense",
    "LayerSpec",
    "TrainConfig",
    "TrainHistory",
    "TrainRecord",
    "VaeModel",
    "adam_step",
    "build_architecture",
    "canonical_activation",
    "elbo_minibatch",
    "evaluate_elbo",
    "init_bench",
    "init_mle_b",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]
