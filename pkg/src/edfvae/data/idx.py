"""
IDX tensor files (the MNIST distribution format).

Header, big-endian::

    u8 0, u8 0, u8 dtype (0x08 = unsigned byte), u8 ndim
    i32[ndim] dimension sizes
    u8[]      payload, row-major

Files may be gzip-compressed; compression is detected from the gzip magic.
"""

from __future__ import annotations

import gzip
import logging
import os
import struct
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from .base import BaseLoader, Dataset, register_loader
from .utils import scale_to_unit, split_rows, truncate_rows

logger = logging.getLogger(__name__)

UBYTE = 0x08
GZIP_MAGIC = b"\x1f\x8b"
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
}


def _read_bytes(path: str | Path) -> bytes:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as e:
            raise DataFormatError(f"{path}: corrupt gzip stream") from e
    return raw


def read_idx(path: str | Path) -> np.ndarray:
    """Raw uint8 tensor with its original shape."""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise DataFormatError(f"{path}: truncated IDX header")
    zero0, zero1, dtype, ndim = struct.unpack(">BBBB", raw[:4])
    if zero0 != 0 or zero1 != 0 or dtype != UBYTE:
        raise DataFormatError(f"{path}: bad IDX magic {raw[:4].hex()}, expected 000008xx")
    if not 1 <= ndim <= 3:
        raise DataFormatError(f"{path}: unsupported IDX rank {ndim}")
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DataFormatError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}i", raw[4:header])
    if any(n < 0 for n in dims):
        raise DataFormatError(f"{path}: negative dimension in {dims}")
    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(raw) - header
    if payload < expected:
        raise DataFormatError(f"{path}: truncated payload, {payload} of {expected} bytes")
    if payload > expected:
        raise DataFormatError(f"{path}: {payload - expected} bytes beyond the declared dimensions {dims}")
    return np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header).reshape(dims)


def load_idx(path: str | Path) -> np.ndarray:
    """IDX images as an (N, d) float matrix scaled to [0, 1], images flattened row-major."""
    tensor = read_idx(path)
    flat = tensor.reshape(tensor.shape[0], -1) if tensor.ndim > 1 else tensor.reshape(-1, 1)
    return scale_to_unit(flat)


def write_idx(path: str | Path, array: np.ndarray) -> None:
    """Write a uint8 tensor of rank 1–3; a ``.gz`` suffix compresses the file."""
    arr = np.asarray(array)
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255 or np.any(arr != np.round(arr))):
            raise DataFormatError("IDX payload must be integers in 0..255")
        arr = arr.astype(np.uint8)
    if not 1 <= arr.ndim <= 3:
        raise DataFormatError(f"IDX rank must be 1..3, got {arr.ndim}")
    blob = struct.pack(">BBBB", 0, 0, UBYTE, arr.ndim) + struct.pack(f">{arr.ndim}i", *arr.shape)
    blob += np.ascontiguousarray(arr).tobytes()
    if str(path).endswith(".gz"):
        blob = gzip.compress(blob, mtime=0)
    with open(path, "wb") as f:
        f.write(blob)


def find_mnist_file(directory: str | Path, split: str) -> Path:
    for stem in MNIST_FILES[split]:
        for suffix in ("", ".gz"):
            candidate = Path(directory) / f"{stem}{suffix}"
            if candidate.is_file():
                return candidate
    raise FileNotFoundError(f"No MNIST {split} images in {directory} (looked for {MNIST_FILES[split][0]}[.gz])")


def load_mnist(directory: str | Path, max_rows: int | None = None) -> Dataset:
    """MNIST train/test images from a directory, 60000/10000 rows of 784 pixels."""
    train = truncate_rows(load_idx(find_mnist_file(directory, "train")), max_rows)
    test = truncate_rows(load_idx(find_mnist_file(directory, "test")), max_rows)
    logger.debug("loaded MNIST from %s: train %s, test %s", directory, train.shape, test.shape)
    return Dataset(train, test, name="mnist", metadata={"source": str(directory)})


class MnistLoader(BaseLoader):
    """``mnist://<dir>`` or a plain directory holding the IDX image files."""

    @property
    def source_type(self) -> str:
        return "mnist"

    def validate(self) -> bool:
        if not os.path.isdir(self.path):
            raise FileNotFoundError(f"Directory not found: {self.path}")
        find_mnist_file(self.path, "train")
        find_mnist_file(self.path, "test")
        return True

    def load(self) -> Dataset:
        self.validate()
        return load_mnist(self.path, self.options.get("max_rows"))


class IdxLoader(BaseLoader):
    """A single IDX image file, split by ``test_fraction``."""

    @property
    def source_type(self) -> str:
        return "idx"

    def validate(self) -> bool:
        if not os.path.isfile(self.path):
            raise FileNotFoundError(f"File not found: {self.path}")
        return True

    def load(self) -> Dataset:
        self.validate()
        x = truncate_rows(load_idx(self.path), self.options.get("max_rows"))
        train, test = split_rows(x, self.options.get("test_fraction", 0.33))
        return Dataset(train, test, name=Path(self.path).name)


register_loader("mnist", MnistLoader)
register_loader("idx", IdxLoader)
