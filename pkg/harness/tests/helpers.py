"""Test helpers: standalone .ert writing and synthetic datasets."""

import struct

import numpy as np

from ertharness.data import Dataset, Sample

# hand-assembled container holding uint8 values [3, 5] with dims 2 x 1 x 1
GOLDEN_ERT = bytes.fromhex(
    "45525431" "01000300" "020000000100000001000000" "0305"
)

NUMPY_CODES = {0: "<u1", 1: "<u2", 2: "<u4", 3: "<f4"}


def write_ert(path, values, dtype_code=3):
    """Independent writer used to build fixtures (same documented layout)."""
    values = np.asarray(values).astype(NUMPY_CODES[dtype_code])
    header = struct.pack("<4sBBBB", b"ERT1", 1, dtype_code, values.ndim, 0)
    dims = struct.pack(f"<{values.ndim}I", *values.shape)
    path.write_bytes(header + dims + values.tobytes())


def toy_dataset(n=60, side=12, channels=2, seed=0):
    """Linearly separable two-class set: activity on the left or right half."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        tensor = np.zeros((channels, side, side), dtype=np.float32)
        cols = slice(0, side // 2) if label == 0 else slice(side // 2, side)
        width = cols.stop - cols.start
        mask = rng.random((channels, side, width)) < 0.6
        values = (rng.random(int(mask.sum())) * 0.5 + 0.5).astype(np.float32)
        tensor[:, :, cols][mask] = values
        samples.append(Sample(f"s{i:03d}", tensor, label))
    return Dataset(samples, ("left", "right"))
