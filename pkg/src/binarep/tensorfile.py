"""The .ert tensor container.

Layout, in order:

    magic   4 bytes  "ERT1"
    version u8       1
    dtype   u8       0=u8, 1=u16, 2=u32, 3=f32
    ndim    u8       always 3 (C x H x W)
    reserved u8      0
    dims    ndim x u32, little-endian
    payload row-major, last dimension fastest, little-endian

The payload length must equal the product of the dims times the dtype
size. A reader fits in a few dozen lines in any language.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import (
    BadMagicError,
    TruncatedPayloadError,
    UnknownDtypeError,
    ValueRangeError,
)
from .representations import RepTensor

MAGIC = b"ERT1"
VERSION = 1

DTYPE_U8, DTYPE_U16, DTYPE_U32, DTYPE_F32 = 0, 1, 2, 3

_CODE_TO_DTYPE = {
    DTYPE_U8: np.dtype("<u1"),
    DTYPE_U16: np.dtype("<u2"),
    DTYPE_U32: np.dtype("<u4"),
    DTYPE_F32: np.dtype("<f4"),
}

DTYPE_NAMES = {"u8": DTYPE_U8, "u16": DTYPE_U16, "u32": DTYPE_U32, "f32": DTYPE_F32}

_HEADER = struct.Struct("<4sBBBB")


def write_tensor(tensor: RepTensor | np.ndarray, dtype_code: int = DTYPE_F32) -> bytes:
    """Serialize a C x H x W tensor; integer dtypes require integral in-range values."""
    values = tensor.data if isinstance(tensor, RepTensor) else np.asarray(tensor)
    if values.ndim != 3:
        raise ValueError(f"tensor must be C x H x W, got shape {values.shape}")
    if values.size == 0:
        raise ValueError("tensor must not be empty")
    dtype = _CODE_TO_DTYPE.get(dtype_code)
    if dtype is None:
        raise UnknownDtypeError(f"unknown dtype code {dtype_code}")

    if dtype_code != DTYPE_F32:
        info = np.iinfo(dtype)
        bad = (values != np.floor(values)) | (values < info.min) | (values > info.max)
        if np.any(bad):
            c, y, x = (int(v) for v in np.argwhere(bad)[0])
            raise ValueRangeError(
                f"value {values[c, y, x]} at channel {c}, pixel ({y}, {x}) "
                f"is not representable as {dtype}"
            )

    header = _HEADER.pack(MAGIC, VERSION, dtype_code, values.ndim, 0)
    dims = struct.pack(f"<{values.ndim}I", *values.shape)
    payload = np.ascontiguousarray(values.astype(dtype, copy=False)).tobytes()
    return header + dims + payload


def read_tensor(data: bytes) -> np.ndarray:
    """Inverse of write_tensor; returns the array in its stored dtype."""
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"file is {len(data)} bytes, shorter than the header")
    magic, version, dtype_code, ndim, reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnknownDtypeError(f"unsupported version {version}")
    dtype = _CODE_TO_DTYPE.get(dtype_code)
    if dtype is None:
        raise UnknownDtypeError(f"unknown dtype code {dtype_code}")
    if ndim != 3:
        raise TruncatedPayloadError(f"expected 3 dims (C x H x W), got {ndim}")

    dims_end = _HEADER.size + 4 * ndim
    if len(data) < dims_end:
        raise TruncatedPayloadError("file ends inside the dims block")
    dims = struct.unpack(f"<{ndim}I", data[_HEADER.size : dims_end])

    expected = int(np.prod(dims)) * dtype.itemsize
    payload = data[dims_end:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"payload is {len(payload)} bytes, dims {dims} require {expected}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(dims)


def write_tensor_file(path, tensor: RepTensor | np.ndarray, dtype_code: int = DTYPE_F32):
    with open(path, "wb") as fh:
        fh.write(write_tensor(tensor, dtype_code))


def read_tensor_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_tensor(fh.read())
