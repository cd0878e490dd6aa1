"""
Flat binary container shared by ``mle.bin`` and model checkpoints.

Layout::

    8 bytes   magic
    4 bytes   header length L, big-endian uint32
    L bytes   UTF-8 JSON header; ``arrays`` lists ``[name, shape]`` pairs
    ...       raw little-endian float64 arrays in header order

The header is dumped with sorted keys, so equal inputs give equal bytes.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from ..errors import DataFormatError

MAGIC_SIZE = 8


def write_flat(path: str | Path, magic: bytes, header: dict, arrays: Mapping[str, np.ndarray]) -> None:
    if len(magic) != MAGIC_SIZE:
        raise ValueError(f"magic must be {MAGIC_SIZE} bytes, got {len(magic)}")
    header = dict(header, arrays=[[name, list(np.shape(arr))] for name, arr in arrays.items()])
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack(">I", len(blob)))
        f.write(blob)
        for arr in arrays.values():
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_flat(path: str | Path, magic: bytes, version: int, kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container written by :func:`write_flat`.

    ``kind`` names the file type in error messages, e.g. "edfvae checkpoint".

    Raises:
        DataFormatError: bad magic, corrupt header, unsupported ``version``,
            truncated payload or trailing bytes.
    """
    data = Path(path).read_bytes()
    if data[:MAGIC_SIZE] != magic:
        raise DataFormatError(f"{path} is not an {kind} (bad magic)")
    offset = MAGIC_SIZE
    if len(data) < offset + 4:
        raise DataFormatError(f"{path} is truncated")
    (length,) = struct.unpack(">I", data[offset : offset + 4])
    offset += 4
    if len(data) < offset + length:
        raise DataFormatError(f"{path} is truncated")
    try:
        header = json.loads(data[offset : offset + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFormatError(f"{path} has a corrupt header") from e
    if not isinstance(header, dict) or header.get("version") != version:
        got = header.get("version") if isinstance(header, dict) else None
        raise DataFormatError(f"Unsupported {kind} version {got}")
    offset += length

    arrays: dict[str, np.ndarray] = {}
    for name, shape in header.get("arrays", []):
        count = int(np.prod(shape, dtype=np.int64))
        if offset + 8 * count > len(data):
            raise DataFormatError(f"{path} is truncated")
        arrays[name] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += 8 * count
    if offset != len(data):
        raise DataFormatError(f"{path} has {len(data) - offset} trailing bytes")
    return header, arrays
