"""
Dataset sources: synthetic generators, MNIST IDX files and numeric CSV.

Importing the package registers every loader with :func:`get_loader`.
"""

from .base import BaseLoader, Dataset, available_schemes, get_loader, register_loader
from .csv_loader import CsvLoader, load_csv
from .idx import IdxLoader, MnistLoader, load_idx, load_mnist, read_idx, write_idx
from .synthetic import SyntheticLoader, synthetic_bernoulli, synthetic_gaussian

__all__ = [
    "BaseLoader",
    "CsvLoader",
    "Dataset",
    "IdxLoader",
    "MnistLoader",
    "SyntheticLoader",
    "available_schemes",
    "get_loader",
    "load_csv",
    "load_idx",
    "load_mnist",
    "read_idx",
    "register_loader",
    "synthetic_bernoulli",
    "synthetic_gaussian",
    "write_idx",
]
