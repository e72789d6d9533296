"""Evaluation scores and sparsity/expressivity statistics.

Relative Accuracy Drop compares clean and corrupted accuracies; the frame
statistics quantify how saturated and how expressive a representation is
(density of nonzero pixels, fraction pinned at the representable maximum,
mean set bits of nonzero pixel values).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EventStream
from .representations import (
    RepTensor,
    assemble_tensor,
    bina_rep,
    binary_event_images,
    event_histogram,
    voxel_grid,
)


@dataclass(frozen=True)
class RadScore:
    """Relative Accuracy Drop: (acc_clean - acc_corrupt) / acc_clean * 100."""

    acc_clean: float
    acc_corrupt: float
    score: float


def relative_accuracy_drop(acc_clean: float, acc_corrupt: float) -> RadScore:
    """Score a clean/corrupted accuracy pair; negative scores are allowed."""
    if acc_clean <= 0:
        raise ValueError(f"clean accuracy must be positive, got {acc_clean}")
    if not (acc_clean <= 100 and 0 <= acc_corrupt <= 100):
        raise ValueError(
            f"accuracies must be percentages, got clean={acc_clean} corrupt={acc_corrupt}"
        )
    score = (acc_clean - acc_corrupt) / acc_clean * 100.0
    return RadScore(acc_clean, acc_corrupt, score)


@dataclass(frozen=True)
class FrameStats:
    """Sparsity/expressivity statistics of one tensor."""

    density: float     # fraction of nonzero pixels
    saturation: float  # fraction of pixels at the representable maximum
    mean_bits: float   # mean popcount per nonzero pixel


def frame_stats(tensor: RepTensor | np.ndarray, representable_max: float) -> FrameStats:
    """Exact counts over all channels and pixels.

    mean_bits popcounts the rounded absolute pixel value, which is the
    occupied-sub-window count for bit-packed frames and simply defined for
    the other (count- or float-valued) representations.
    """
    if representable_max <= 0:
        raise ValueError(f"representable max must be positive, got {representable_max}")
    values = tensor.data if isinstance(tensor, RepTensor) else np.asarray(tensor)
    nonzero = values != 0
    density = float(nonzero.mean()) if values.size else 0.0
    saturation = float((values == representable_max).mean()) if values.size else 0.0
    if nonzero.any():
        ints = np.abs(np.rint(values[nonzero])).astype(np.uint64)
        mean_bits = float(np.bitwise_count(ints).mean())
    else:
        mean_bits = 0.0
    return FrameStats(density, saturation, mean_bits)


@dataclass(frozen=True)
class RepConfig:
    """One comparison row: a representation kind plus its frame parameters."""

    kind: str  # binary | binarep | histogram | voxel
    num_frames: int = 1
    bit_depth: int = 8

    @property
    def name(self) -> str:
        if self.kind == "binarep":
            return f"binarep-t{self.num_frames}-n{self.bit_depth}"
        if self.kind == "histogram":
            return "histogram"
        return f"{self.kind}-t{self.num_frames}"


# The five studied configurations: 10-bin voxel grid, 10 binary frames,
# a histogram, and single/triple bit-packed frames at 8 bits.
DEFAULT_CONFIGS = (
    RepConfig("voxel", num_frames=10),
    RepConfig("binary", num_frames=10),
    RepConfig("histogram"),
    RepConfig("binarep", num_frames=1, bit_depth=8),
    RepConfig("binarep", num_frames=3, bit_depth=8),
)


@dataclass(frozen=True)
class StatsRow:
    name: str
    kind: str
    num_frames: int
    bit_depth: int | None
    channels: int
    stats: FrameStats


def convert(stream: EventStream, config: RepConfig, normalize: bool = False) -> RepTensor:
    """Run one configured representation over a stream."""
    if config.kind == "binary":
        return assemble_tensor(binary_event_images(stream, config.num_frames))
    if config.kind == "binarep":
        return assemble_tensor(
            bina_rep(stream, config.num_frames, config.bit_depth), normalize=normalize
        )
    if config.kind == "histogram":
        return event_histogram(stream)
    if config.kind == "voxel":
        return voxel_grid(stream, config.num_frames)
    raise ValueError(f"unknown representation kind {config.kind!r}")


def representable_max(tensor: RepTensor) -> float:
    """Natural saturation level: 1 for bits, 2^N - 1 for packed frames, and
    the observed extreme for unbounded kinds (histogram counts, voxel mass)."""
    if tensor.layout.kind == "binary":
        return 1.0
    if tensor.layout.kind == "binarep":
        return float((1 << tensor.layout.bit_depth) - 1)
    observed = float(np.abs(tensor.data).max()) if tensor.data.size else 0.0
    return observed if observed > 0 else 1.0


def compare_representations(
    stream: EventStream, configs: tuple[RepConfig, ...] = DEFAULT_CONFIGS
) -> list[StatsRow]:
    """One statistics row per configuration, in the order requested."""
    rows = []
    for config in configs:
        tensor = convert(stream, config)
        stats = frame_stats(tensor, representable_max(tensor))
        rows.append(
            StatsRow(
                name=config.name,
                kind=config.kind,
                num_frames=config.num_frames,
                bit_depth=config.bit_depth if config.kind == "binarep" else None,
                channels=tensor.num_channels,
                stats=stats,
            )
        )
    return rows
