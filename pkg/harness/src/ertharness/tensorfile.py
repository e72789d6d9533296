"""Minimal reader for the .ert tensor container.

Layout: magic "ERT1", version u8 (1), dtype u8 (0=u8, 1=u16, 2=u32, 3=f32),
ndim u8 (3), one reserved byte, then ndim little-endian u32 dims and the
row-major little-endian payload. Implemented standalone from the documented
layout so this package does not depend on the producer.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import DatasetError

MAGIC = b"ERT1"
DTYPES = {0: "<u1", 1: "<u2", 2: "<u4", 3: "<f4"}


def read_ert(path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    if len(data) < 8:
        raise DatasetError(f"{path}: shorter than the 8-byte header")
    magic, version, dtype_code, ndim, _ = struct.unpack_from("<4sBBBB", data)
    if magic != MAGIC:
        raise DatasetError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise DatasetError(f"{path}: unsupported version {version}")
    if dtype_code not in DTYPES:
        raise DatasetError(f"{path}: unknown dtype code {dtype_code}")
    if ndim != 3:
        raise DatasetError(f"{path}: expected 3 dims, got {ndim}")
    if len(data) < 8 + 4 * ndim:
        raise DatasetError(f"{path}: truncated dims block")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    dtype = np.dtype(DTYPES[dtype_code])
    payload = data[8 + 4 * ndim :]
    if len(payload) != int(np.prod(dims)) * dtype.itemsize:
        raise DatasetError(f"{path}: payload does not match dims {dims}")
    return np.frombuffer(payload, dtype=dtype).reshape(dims)
