"""
Numeric CSV matrices (e.g. Frey faces exported as CSV).
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from .base import BaseLoader, Dataset, register_loader
from .utils import split_rows, truncate_rows


def load_csv(path: str | Path, has_header: bool = False, allow_raw: bool = False) -> np.ndarray:
    """Read a rectangular numeric CSV into an (N, d) matrix.

    Values must lie in [0, 1] unless ``allow_raw``.

    Raises:
        DataFormatError: ragged rows, non-numeric cells, empty file, or
            out-of-range values.
    """
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, newline="", encoding="utf-8-sig") as f:
        reader = csv.reader(f)
        for lineno, record in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise DataFormatError(f"{path}:{lineno}: expected {width} columns, got {len(record)}")
            try:
                rows.append([float(cell) for cell in record])
            except ValueError as e:
                raise DataFormatError(f"{path}:{lineno}: non-numeric cell ({e})") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    x = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataFormatError(f"{path}: non-finite values")
    if not allow_raw and (x.min() < 0.0 or x.max() > 1.0):
        raise DataFormatError(f"{path}: values outside [0, 1]; rescale the data or pass --allow-raw")
    return x


class CsvLoader(BaseLoader):
    """A CSV file; ``test_path`` selects an explicit test file, otherwise rows are split."""

    @property
    def source_type(self) -> str:
        return "csv"

    def validate(self) -> bool:
        for p in (self.path, self.options.get("test_path")):
            if p and not os.path.isfile(os.path.expanduser(p)):
                raise FileNotFoundError(f"File not found: {p}")
        return True

    def load(self) -> Dataset:
        self.validate()
        has_header = bool(self.options.get("has_header", False))
        allow_raw = bool(self.options.get("allow_raw", False))
        max_rows = self.options.get("max_rows")
        x = truncate_rows(load_csv(self.path, has_header, allow_raw), max_rows)
        test_path = self.options.get("test_path")
        if test_path:
            train = x
            test = truncate_rows(load_csv(os.path.expanduser(test_path), has_header, allow_raw), max_rows)
            if test.shape[1] != train.shape[1]:
                raise DataFormatError(f"train has {train.shape[1]} columns, test has {test.shape[1]}")
        else:
            train, test = split_rows(x, self.options.get("test_fraction", 0.33))
        return Dataset(
            train,
            test,
            name=Path(self.path).stem,
            value_range=None if allow_raw else (0.0, 1.0),
        )


register_loader("csv", CsvLoader)
