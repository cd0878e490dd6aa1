"""edfvae CLI: closed-form MLE analysis, training runs and activity sweeps."""

from . import activity, config, export, mle, synth, train
from .main import app, console

__all__ = ["app", "console", "activity", "config", "export", "mle", "synth", "train"]
