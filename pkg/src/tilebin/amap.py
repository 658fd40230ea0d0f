"""Anomaly-map blob format.

Layout (little-endian throughout):

    bytes 0..3    magic "AMAP"
    bytes 4..5    u16 version, currently 1
    bytes 6..9    u32 width
    bytes 10..13  u32 height
    bytes 14..    width*height float32 samples, row-major

The format is bit-exact: write followed by read reproduces every byte, which
lets map producers in other languages interoperate with this pipeline.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError, NotFoundError

MAGIC = b"AMAP"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def ensure_map(values: np.ndarray) -> np.ndarray:
    """Validate an anomaly map: 2-D, finite, dimensions >= 1."""
    if not isinstance(values, np.ndarray) or values.ndim != 2:
        raise InvalidArgumentError("anomaly map must be a 2-D numpy array")
    if values.shape[0] < 1 or values.shape[1] < 1:
        raise InvalidArgumentError(f"anomaly map dimensions must be >= 1, got {values.shape}")
    if not np.isfinite(values).all():
        raise InvalidArgumentError("anomaly map contains NaN or Inf")
    return values


def write_amap(path: str | Path, values: np.ndarray) -> None:
    ensure_map(values)
    h, w = values.shape
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, w, h))
        fh.write(payload)


def read_amap(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(f"map blob not found: {path}")
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, w, h = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if w < 1 or h < 1:
        raise FormatError(f"{path}: invalid dimensions {w}x{h}")
    expected = _HEADER.size + 4 * w * h
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(h, w)
    if not np.isfinite(values).all():
        raise FormatError(f"{path}: payload contains non-finite values")
    return values.copy()
