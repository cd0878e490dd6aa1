"""
Feed-forward VAE with a diagonal Gaussian encoder and an EDF decoder.

Two layouts are available:

``deep``
    encoder d → ⌈2000s⌉ → ⌈1000s⌉ → (μ, log σ²), decoder κ → ⌈1000s⌉ → ⌈2000s⌉ → d
``canonical``
    encoder d → ⌈2000s⌉ → d → (μ, log σ²), decoder a single affine map κ → d

where s is ``hidden_scale``. The decoder's last pre-activation ``a`` is the
natural parameter in activation coordinates; the likelihood uses ρ·a and the
mean is F′(ρ·a), which is what the last layer's activation computes.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..core.edf import EdfFamily, FamilyKind, mean_response
from ..errors import ConfigError
from .layers import POISSON_CLAMP, Activation, Dense, LayerSpec, forward_stack

DEEP_WIDTHS = (2000, 1000)


class Architecture(str, Enum):
    DEEP = "deep"
    CANONICAL = "canonical"


def canonical_activation(family: EdfFamily) -> Activation:
    """Final decoder activation for the family; with ρ and n set on the layer it computes F′(ρ·a)."""
    if family.kind is FamilyKind.GAUSSIAN:
        return Activation.LINEAR
    if family.kind is FamilyKind.POISSON:
        return Activation.EXP
    if family.canonical_scale_rho == 2.0:
        return Activation.TANH_CANONICAL
    return Activation.SIGMOID


def scaled_width(base: int, hidden_scale: float) -> int:
    # round first so 2000 * 0.01 lands on 20 rather than 21
    return max(1, math.ceil(round(base * hidden_scale, 9)))


@dataclass
class VaeModel:
    trunk: list[Dense]
    mu_head: Dense
    logvar_head: Dense
    decoder: list[Dense]
    family: EdfFamily
    beta: float
    kappa: int
    architecture: Architecture = Architecture.CANONICAL
    hidden_scale: float = 1.0
    metadata: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.trunk[0].spec.in_dim

    def layers(self) -> list[tuple[str, Dense]]:
        named = [(f"trunk.{i}", layer) for i, layer in enumerate(self.trunk)]
        named += [("mu_head", self.mu_head), ("logvar_head", self.logvar_head)]
        named += [(f"decoder.{i}", layer) for i, layer in enumerate(self.decoder)]
        return named

    def parameters(self) -> dict[str, np.ndarray]:
        """Live references to every parameter array, keyed ``<layer>.<weight|bias>``."""
        return {f"{name}.{k}": v for name, layer in self.layers() for k, v in layer.params().items()}

    def layer_dims(self) -> list[int]:
        """Widths along encoder then decoder, e.g. [784, 2000, 1000, 20, 1000, 2000, 784]."""
        dims = [self.d] + [layer.spec.out_dim for layer in self.trunk] + [self.kappa]
        return dims + [layer.spec.out_dim for layer in self.decoder]

    def encode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and log-variance for a batch (B, d)."""
        h, _ = forward_stack(self.trunk, np.asarray(x, dtype=np.float64))
        mu, _ = self.mu_head.forward(h)
        logvar, _ = self.logvar_head.forward(h)
        return mu, logvar

    def decode(self, z: np.ndarray) -> np.ndarray:
        """Decoder pre-activation ``a`` for latent codes (B, κ)."""
        _, caches = forward_stack(self.decoder, np.asarray(z, dtype=np.float64))
        return caches[-1][1]

    def natural_parameter(self, a: np.ndarray) -> np.ndarray:
        eta = self.family.canonical_scale_rho * a
        if self.family.kind is FamilyKind.POISSON:
            eta = np.clip(eta, -POISSON_CLAMP, POISSON_CLAMP)
        return eta

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        """Conditional mean F′(ρ·a) decoded from the posterior mean."""
        mu, _ = self.encode(x)
        a = self.decode(mu)
        return mean_response(self.family, self.natural_parameter(a) / self.family.canonical_scale_rho)

    def copy(self) -> VaeModel:
        return copy.deepcopy(self)


def build_architecture(
    name: str | Architecture,
    d: int,
    kappa: int,
    family: EdfFamily,
    hidden_scale: float = 1.0,
    beta: float = 1.0,
) -> VaeModel:
    """Allocate a zero-initialized model; call an ``init_*`` function before use."""
    try:
        arch = Architecture(name)
    except ValueError:
        raise ConfigError(f"Unknown architecture '{name}'. Valid: deep, canonical") from None
    if d < 1 or kappa < 1:
        raise ConfigError(f"d and kappa must be >= 1, got d={d}, kappa={kappa}")
    if not hidden_scale > 0:
        raise ConfigError(f"hidden_scale must be positive, got {hidden_scale}")
    out_act = canonical_activation(family)
    out_options = {"scale": family.canonical_scale_rho, "trials": family.trials_n}
    relu = Activation.RELU
    h1 = scaled_width(DEEP_WIDTHS[0], hidden_scale)

    if arch is Architecture.DEEP:
        h2 = scaled_width(DEEP_WIDTHS[1], hidden_scale)
        trunk = [Dense(LayerSpec(d, h1, relu)), Dense(LayerSpec(h1, h2, relu))]
        decoder = [
            Dense(LayerSpec(kappa, h2, relu)),
            Dense(LayerSpec(h2, h1, relu)),
            Dense(LayerSpec(h1, d, out_act, **out_options)),
        ]
        top = h2
    else:
        trunk = [Dense(LayerSpec(d, h1, relu)), Dense(LayerSpec(h1, d, relu))]
        decoder = [Dense(LayerSpec(kappa, d, out_act, **out_options))]
        top = d

    return VaeModel(
        trunk=trunk,
        mu_head=Dense(LayerSpec(top, kappa)),
        logvar_head=Dense(LayerSpec(top, kappa)),
        decoder=decoder,
        family=family,
        beta=float(beta),
        kappa=int(kappa),
        architecture=arch,
        hidden_scale=float(hidden_scale),
    )
