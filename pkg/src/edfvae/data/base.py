"""
Dataset type and the loader registry.

Every data source is addressed by a URI. Loaders register under a scheme
(``synthetic://``, ``mnist://``, ...) and plain paths are dispatched by file
extension or, for directories, to the MNIST loader.
"""

from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from urllib.parse import parse_qsl

import numpy as np

from ..errors import ConfigError, DataFormatError


@dataclass
class Dataset:
    """Train/test observation matrices with a shared column count."""

    train: np.ndarray
    test: np.ndarray
    name: str
    value_range: tuple[float, float] | None = (0.0, 1.0)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.train = np.asarray(self.train, dtype=np.float64)
        if self.train.ndim != 2 or self.train.shape[0] == 0:
            raise DataFormatError(f"{self.name}: training split must be a non-empty matrix")
        self.test = np.asarray(self.test, dtype=np.float64).reshape(-1, self.train.shape[1])
        for split, arr in (("train", self.train), ("test", self.test)):
            if not np.all(np.isfinite(arr)):
                raise DataFormatError(f"{self.name}: {split} split has non-finite values")
            if self.value_range is not None and arr.size:
                lo, hi = self.value_range
                if arr.min() < lo or arr.max() > hi:
                    raise DataFormatError(f"{self.name}: {split} values fall outside [{lo}, {hi}]")

    @property
    def d(self) -> int:
        return self.train.shape[1]

    @property
    def sizes(self) -> tuple[int, int]:
        return self.train.shape[0], self.test.shape[0]


class BaseLoader(ABC):
    """A data source addressed by URI.

    Subclasses implement :meth:`validate` (cheap existence checks) and
    :meth:`load`, then register themselves with :func:`register_loader`.
    """

    def __init__(self, uri: str, **options):
        self.uri = uri
        self.options = options

    @property
    @abstractmethod
    def source_type(self) -> str:
        """Identifier of the loader, e.g. ``"mnist"``."""

    @abstractmethod
    def validate(self) -> bool:
        """Check that the source is reachable.

        Raises:
            FileNotFoundError: a referenced file or directory does not exist.
        """

    @abstractmethod
    def load(self) -> Dataset:
        """Read the source into a :class:`Dataset`."""

    @property
    def path(self) -> str:
        """The URI with its scheme and query string removed."""
        rest = self.uri.split("://", 1)[1] if "://" in self.uri else self.uri
        return os.path.expanduser(rest.split("?", 1)[0])

    def query(self) -> dict[str, str]:
        """``key=value`` pairs after ``?`` in the URI."""
        if "?" not in self.uri:
            return {}
        return dict(parse_qsl(self.uri.split("?", 1)[1], strict_parsing=True))


# ──── Loader Registry ────

_LOADER_REGISTRY: dict[str, type[BaseLoader]] = {}
_EXTENSION_SCHEMES = {".csv": "csv", ".gz": "idx", ".idx": "idx", "-ubyte": "idx"}


def register_loader(scheme: str, loader_class: type[BaseLoader]):
    """Register a loader class for a URI scheme."""
    _LOADER_REGISTRY[scheme.lower()] = loader_class


def available_schemes() -> list[str]:
    return sorted(_LOADER_REGISTRY)


def get_loader(uri: str, **options) -> BaseLoader:
    """Pick the loader for ``uri`` by scheme, directory, or file extension.

    Raises:
        ConfigError: no loader matches.
    """
    if "://" in uri:
        scheme = uri.split("://", 1)[0].lower()
        if scheme in _LOADER_REGISTRY:
            return _LOADER_REGISTRY[scheme](uri, **options)
        raise ConfigError(f"Unknown dataset scheme '{scheme}'. Available: {', '.join(available_schemes())}")

    path = os.path.expanduser(uri)
    if os.path.isdir(path) and "mnist" in _LOADER_REGISTRY:
        return _LOADER_REGISTRY["mnist"](uri, **options)
    lowered = path.lower()
    for suffix, scheme in _EXTENSION_SCHEMES.items():
        if lowered.endswith(suffix) and scheme in _LOADER_REGISTRY:
            return _LOADER_REGISTRY[scheme](uri, **options)

    raise ConfigError(
        f"No loader found for dataset: {uri}\n"
        f"Available schemes: {', '.join(available_schemes())}\n"
        f"Examples:\n"
        f"  synthetic://?n=10000&d=200\n"
        f"  mnist://~/data/mnist\n"
        f"  ./frey_train.csv"
    )
