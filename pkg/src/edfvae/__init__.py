"""
edfvae — Closed-form analysis and training harness for β-VAE with
exponential-dispersion-family observation models.

Fit the affine-decoder maximum likelihood estimates, predict which latent
dimensions stay active, and check the predictions against VAEs trained
from scratch.
"""

__version__ = "0.1.0"
