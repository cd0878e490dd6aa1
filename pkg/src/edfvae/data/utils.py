"""Shared helpers for the data loaders."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def scale_to_unit(raw: np.ndarray, max_value: float = 255.0) -> np.ndarray:
    """Divide integer intensities by their maximum so values lie in [0, 1]."""
    return np.asarray(raw, dtype=np.float64) / max_value


def split_rows(x: np.ndarray, test_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """First ⌊round((1 − f)·N)⌋ rows train, the rest test. Rows are assumed i.i.d."""
    if not 0.0 <= test_fraction < 1.0:
        raise ConfigError(f"test_fraction must lie in [0, 1), got {test_fraction}")
    n_train = int(round(x.shape[0] * (1.0 - test_fraction)))
    n_train = min(max(n_train, 1), x.shape[0])
    return x[:n_train], x[n_train:]


def truncate_rows(x: np.ndarray, max_rows: int | None) -> np.ndarray:
    if max_rows is None:
        return x
    if max_rows < 1:
        raise ConfigError(f"max_rows must be >= 1, got {max_rows}")
    return x[:max_rows]
