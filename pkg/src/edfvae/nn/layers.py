"""
Dense layers with manual forward/backward passes.

Weights are stored input-major, ``weight.shape == (in_dim, out_dim)``, so a
batch ``x`` of shape (B, in_dim) maps to ``x @ weight + bias``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from ..errors import ConfigError

POISSON_CLAMP = 30.0


class Activation(str, Enum):
    """Elementwise activations.

    ``scale`` (ρ) and ``trials`` (n) only matter for a decoder output layer,
    where the activation is the conditional mean F′(ρ·a): ρ·a for ``linear``,
    n·σ(ρ·a) for ``sigmoid`` and ``tanh_canonical`` (the latter written as
    n·(½tanh(ρa/2) + ½)), and exp(ρ·a) clamped for ``exp``.
    """

    RELU = "relu"
    LINEAR = "linear"
    SIGMOID = "sigmoid"
    TANH_CANONICAL = "tanh_canonical"
    EXP = "exp"

    def apply(self, a: np.ndarray, scale: float = 1.0, trials: int = 1) -> np.ndarray:
        if self is Activation.RELU:
            return np.maximum(a, 0.0)
        if self is Activation.LINEAR:
            return scale * a
        if self is Activation.SIGMOID:
            return trials * expit(scale * a)
        if self is Activation.TANH_CANONICAL:
            return trials * (0.5 * np.tanh(0.5 * scale * a) + 0.5)
        return np.exp(np.clip(scale * a, -POISSON_CLAMP, POISSON_CLAMP))

    def derivative(self, a: np.ndarray, out: np.ndarray, scale: float = 1.0, trials: int = 1) -> np.ndarray:
        """d out / d a given the pre-activation and its activation."""
        if self is Activation.RELU:
            return (a > 0).astype(a.dtype)
        if self is Activation.LINEAR:
            return np.full_like(a, scale)
        if self is Activation.SIGMOID:
            return scale * out * (1.0 - out / trials)
        if self is Activation.TANH_CANONICAL:
            # out/n = ½tanh(ρa/2)+½ so tanh(ρa/2) = 2·out/n − 1
            t = 2.0 * out / trials - 1.0
            return trials * 0.25 * scale * (1.0 - t**2)
        return scale * out * (np.abs(scale * a) < POISSON_CLAMP)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: Activation = Activation.LINEAR
    scale: float = 1.0
    trials: int = 1

    def __post_init__(self):
        if int(self.in_dim) < 1 or int(self.out_dim) < 1:
            raise ConfigError(f"layer dimensions must be >= 1, got {self.in_dim}->{self.out_dim}")
        if self.scale == 0 or int(self.trials) < 1:
            raise ConfigError(f"output scale must be nonzero and trials >= 1, got {self.scale}, {self.trials}")
        object.__setattr__(self, "activation", Activation(self.activation))


class Dense:
    """Affine map followed by an elementwise activation."""

    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self.weight = np.zeros((spec.in_dim, spec.out_dim))
        self.bias = np.zeros(spec.out_dim)

    def __repr__(self) -> str:
        return f"Dense({self.spec.in_dim}->{self.spec.out_dim}, {self.spec.activation.value})"

    def params(self) -> dict[str, np.ndarray]:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Return the activation and a cache ``(x, pre_activation, activation)``."""
        pre = x @ self.weight + self.bias
        out = self.spec.activation.apply(pre, self.spec.scale, self.spec.trials)
        return out, (x, pre, out)

    def backward(
        self,
        cache: tuple[np.ndarray, np.ndarray, np.ndarray],
        d_out: np.ndarray | None = None,
        d_pre: np.ndarray | None = None,
    ) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        """Propagate a gradient given w.r.t. the output or directly w.r.t. the pre-activation."""
        x, pre, out = cache
        if d_pre is None:
            if d_out is None:
                raise ValueError("backward needs d_out or d_pre")
            d_pre = d_out * self.spec.activation.derivative(pre, out, self.spec.scale, self.spec.trials)
        grads = {"weight": x.T @ d_pre, "bias": d_pre.sum(axis=0)}
        return d_pre @ self.weight.T, grads


def forward_stack(layers: list[Dense], x: np.ndarray) -> tuple[np.ndarray, list[tuple]]:
    caches = []
    h = x
    for layer in layers:
        h, cache = layer.forward(h)
        caches.append(cache)
    return h, caches


def backward_stack(
    layers: list[Dense],
    caches: list[tuple],
    d_out: np.ndarray | None = None,
    d_pre_last: np.ndarray | None = None,
) -> tuple[np.ndarray, list[dict[str, np.ndarray]]]:
    """Backpropagate through ``layers``; grads are returned in layer order."""
    grads: list[dict[str, np.ndarray]] = [{} for _ in layers]
    d = d_out
    for idx in range(len(layers) - 1, -1, -1):
        if idx == len(layers) - 1 and d_pre_last is not None:
            d, grads[idx] = layers[idx].backward(caches[idx], d_pre=d_pre_last)
        else:
            d, grads[idx] = layers[idx].backward(caches[idx], d_out=d)
    return d, grads
