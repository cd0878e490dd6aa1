"""
Latent activity statistics.

A latent coordinate j is *active* when the variance over the data of its
posterior mean, A_j = Var_x(E_q[z_j | x]), exceeds 0.01. Reports bin the
values into ten half-open intervals [0, 0.1), [0.1, 0.2), …, [0.9, ∞) so
analytical and trained encoders can be compared with a histogram distance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike

from ..errors import DomainError
from .closed_form import MleSolution, activity_predict

logger = logging.getLogger(__name__)

ACTIVE_THRESHOLD = 0.01
BIN_EDGES = np.round(np.arange(10) * 0.1, 10)


class ActivitySource(str, Enum):
    ANALYTICAL = "analytical"
    EMPIRICAL = "empirical"


class Encoder(Protocol):
    def encode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


def activity_histogram(values: ArrayLike) -> np.ndarray:
    """Counts per bin; a value on a boundary belongs to the upper bin."""
    v = np.asarray(values, dtype=np.float64)
    idx = np.searchsorted(BIN_EDGES, v, side="right") - 1
    return np.bincount(np.clip(idx, 0, 9), minlength=10).astype(np.int64)


@dataclass(frozen=True)
class ActivityReport:
    values: np.ndarray
    source: ActivitySource

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise DomainError("activity values must be a finite nonnegative vector")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "source", ActivitySource(self.source))

    @property
    def kappa(self) -> int:
        return self.values.shape[0]

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.values > ACTIVE_THRESHOLD))

    @property
    def histogram(self) -> np.ndarray:
        return activity_histogram(self.values)

    def csv_rows(self) -> list[tuple[str, float, str]]:
        """``dim,value,source`` rows followed by an ``active_count`` summary row."""
        rows = [(str(j), float(v), self.source.value) for j, v in enumerate(self.values)]
        rows.append(("active_count", float(self.active_count), self.source.value))
        return rows

    def histogram_rows(self) -> list[tuple[str, int, str]]:
        labels = [f"[{lo:.1f},{lo + 0.1:.1f})" for lo in BIN_EDGES[:-1]] + ["[0.9,inf)"]
        return [(label, int(c), self.source.value) for label, c in zip(labels, self.histogram, strict=True)]


def empirical_activity(encoder: Encoder, x: ArrayLike) -> ActivityReport:
    """Variance (divisor N) over the data of the encoder mean, per latent coordinate."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError("empirical activity needs a non-empty (N, d) matrix")
    mu, _ = encoder.encode(arr)
    return ActivityReport(np.var(mu, axis=0, ddof=0), ActivitySource.EMPIRICAL)


def analytical_activity(sol: MleSolution) -> ActivityReport:
    return ActivityReport(activity_predict(sol), ActivitySource.ANALYTICAL)


def histogram_distance(h1: ArrayLike, h2: ArrayLike) -> float:
    """1 − Σᵢ min(h1ᵢ, h2ᵢ)/κ for two 10-bin histograms of equal mass κ."""
    a = np.asarray(h1)
    b = np.asarray(h2)
    if a.shape != (10,) or b.shape != (10,):
        raise DomainError("histograms must have exactly 10 bins")
    if np.any(a < 0) or np.any(b < 0) or np.any(a != np.round(a)) or np.any(b != np.round(b)):
        raise DomainError("histogram bins must be nonnegative integers")
    mass = a.sum()
    if mass != b.sum() or mass == 0:
        raise DomainError(f"histograms need equal positive mass, got {a.sum()} and {b.sum()}")
    return float(1.0 - np.minimum(a, b).sum() / mass)
