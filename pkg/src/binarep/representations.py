"""Frame representations of event streams.

Four conversions share the channel convention channel 0 = Off (p = -1),
channel 1 = On (p = +1):

* binary event images: T frames of per-polarity presence bits;
* bit-packed frames: T frames of N-bit integers, each pixel's value read
  off its N consecutive sub-window presence bits as one positional binary
  number (T*N binary images collapse into T integer frames);
* event histogram: per-pixel, per-polarity event counts over the stream;
* voxel grid: signed polarities binned over B temporal bins with a
  triangular kernel, no polarity channels.

assemble_tensor flattens any of them into a float32 C x H x W tensor,
frame-major (channel index = frame*2 + polarity) for the frame sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyStreamError
from .events import EventStream, SensorGeometry, WindowPlan, plan_windows, polarity_channel

BIT_ORDER_EARLY_MSB = "early-msb"
BIT_ORDER_EARLY_LSB = "early-lsb"
BIT_ORDERS = (BIT_ORDER_EARLY_MSB, BIT_ORDER_EARLY_LSB)


@dataclass(frozen=True, eq=False)
class BinaryFrameStack:
    """F x 2 x H x W presence bits: 1 iff >= 1 event of that polarity hit the pixel."""

    frames: np.ndarray  # bool
    geometry: SensorGeometry
    plan: WindowPlan

    def __post_init__(self):
        self.frames.flags.writeable = False

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class BinaRepFrame:
    """2 x H x W frame of N-bit integers packed from consecutive presence bits."""

    values: np.ndarray  # uint32, < 2**bit_depth
    bit_depth: int

    def __post_init__(self):
        self.values.flags.writeable = False

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


@dataclass(frozen=True)
class TensorLayout:
    """Channel layout of an assembled tensor."""

    kind: str
    num_frames: int
    bit_depth: int | None = None
    channels: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class RepTensor:
    """Channels x H x W float32 grid plus the layout it was assembled under."""

    data: np.ndarray
    layout: TensorLayout

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ValueError(f"tensor must be C x H x W, got shape {self.data.shape}")
        if self.data.dtype != np.float32:
            raise ValueError(f"tensor must be float32, got {self.data.dtype}")
        self.data.flags.writeable = False

    @property
    def num_channels(self) -> int:
        return self.data.shape[0]


def binary_event_images(stream: EventStream, count: int, mode: str = "duration") -> BinaryFrameStack:
    """Accumulate a stream into `count` binary event frames of 2 polarity channels.

    A bit is set iff at least one matching event falls in the sub-window, so
    duplicated events change nothing.
    """
    if len(stream) == 0:
        raise EmptyStreamError("cannot build binary event images from an empty stream")
    plan = plan_windows(stream, count, mode=mode)
    w, h = stream.geometry.width, stream.geometry.height
    window = plan.assign(stream.t)
    channel = polarity_channel(stream.p)
    flat = np.zeros(count * 2 * h * w, dtype=bool)
    flat[((window * 2 + channel) * h + stream.y.astype(np.int64)) * w + stream.x] = True
    return BinaryFrameStack(flat.reshape(count, 2, h, w), stream.geometry, plan)


def pack_bits(frames: np.ndarray, bit_depth: int, bit_order: str = BIT_ORDER_EARLY_MSB) -> np.ndarray:
    """Pack groups of `bit_depth` consecutive frames into integer frames.

    frames is (F, 2, H, W) with F = T * bit_depth; the result is (T, 2, H, W)
    uint32 where under "early-msb" the earliest sub-window contributes the
    most significant bit: value = sum_i frames[k*N+i] * 2**(N-1-i).
    """
    if bit_order not in BIT_ORDERS:
        raise ValueError(f"bit order must be one of {BIT_ORDERS}, got {bit_order!r}")
    total, c, h, w = frames.shape
    if total % bit_depth != 0:
        raise ValueError(f"{total} frames do not divide into groups of {bit_depth}")
    grouped = frames.reshape(total // bit_depth, bit_depth, c, h, w).astype(np.uint64)
    shifts = np.arange(bit_depth, dtype=np.uint64)
    if bit_order == BIT_ORDER_EARLY_MSB:
        shifts = shifts[::-1]
    weights = np.uint64(1) << shifts
    packed = (grouped * weights[None, :, None, None, None]).sum(axis=1)
    return packed.astype(np.uint32)


def bina_rep(
    stream: EventStream,
    num_frames: int,
    bit_depth: int = 8,
    bit_order: str = BIT_ORDER_EARLY_MSB,
    mode: str = "duration",
) -> list[BinaRepFrame]:
    """Convert a stream into `num_frames` frames of `bit_depth`-bit integers.

    Internally builds num_frames * bit_depth binary sub-window images and
    reads each pixel's bit_depth consecutive presence bits as one positional
    binary number.
    """
    if not 1 <= bit_depth <= 32:
        raise ValueError(f"bit depth must be in [1, 32], got {bit_depth}")
    stack = binary_event_images(stream, num_frames * bit_depth, mode=mode)
    packed = pack_bits(stack.frames, bit_depth, bit_order)
    return [BinaRepFrame(packed[k], bit_depth) for k in range(num_frames)]


def event_histogram(stream: EventStream) -> RepTensor:
    """Per-pixel, per-polarity event counts over the whole stream."""
    w, h = stream.geometry.width, stream.geometry.height
    counts = np.zeros((2, h, w), dtype=np.int64)
    np.add.at(counts, (polarity_channel(stream.p), stream.y, stream.x), 1)
    layout = TensorLayout(kind="histogram", num_frames=1, channels=("off", "on"))
    return RepTensor(counts.astype(np.float32), layout)


def voxel_grid(stream: EventStream, num_bins: int) -> RepTensor:
    """Bin signed polarities over `num_bins` temporal bins.

    Normalized timestamp t* = (B-1)(t - t_first)/(t_last - t_first), zero for
    all events when the duration degenerates; bin b accumulates
    sum_i p_i * max(0, 1 - |b - t*_i|), so each event splits its polarity
    between its two neighbouring bins with weights summing to 1.
    """
    if num_bins < 1:
        raise ValueError(f"bin count must be >= 1, got {num_bins}")
    if len(stream) == 0:
        raise EmptyStreamError("cannot build a voxel grid from an empty stream")
    w, h = stream.geometry.width, stream.geometry.height
    grid = np.zeros((num_bins, h, w), dtype=np.float64)

    t0, t1 = stream.t_first, stream.t_last
    if t1 == t0 or num_bins == 1:
        tstar = np.zeros(len(stream), dtype=np.float64)
    else:
        tstar = (num_bins - 1) * (stream.t - t0).astype(np.float64) / float(t1 - t0)

    left = np.floor(tstar).astype(np.int64)
    frac = tstar - left
    pol = stream.p.astype(np.float64)
    np.add.at(grid, (left, stream.y, stream.x), pol * (1.0 - frac))
    keep = frac > 0  # right neighbour only exists for fractional t*
    np.add.at(grid, (left[keep] + 1, stream.y[keep], stream.x[keep]), pol[keep] * frac[keep])

    layout = TensorLayout(
        kind="voxel",
        num_frames=num_bins,
        channels=tuple(f"bin{b}" for b in range(num_bins)),
    )
    return RepTensor(grid.astype(np.float32), layout)


def assemble_tensor(
    rep: BinaryFrameStack | list[BinaRepFrame] | RepTensor,
    normalize: bool = False,
) -> RepTensor:
    """Flatten a representation into a float32 C x H x W tensor.

    Frame sequences are laid out frame-major (channel = frame*2 + polarity),
    giving T*2 channels; histograms and voxel grids pass through unchanged.
    `normalize` divides bit-packed values by 2**N - 1 and is ignored for the
    other kinds (binary and histogram values are already raw counts/bits).
    """
    if isinstance(rep, RepTensor):
        return rep
    if isinstance(rep, BinaryFrameStack):
        t, c, h, w = rep.frames.shape
        data = rep.frames.reshape(t * c, h, w).astype(np.float32)
        layout = TensorLayout(
            kind="binary",
            num_frames=t,
            channels=_frame_major_channels(t),
        )
        return RepTensor(data, layout)
    if isinstance(rep, list) and rep and isinstance(rep[0], BinaRepFrame):
        bit_depth = rep[0].bit_depth
        if any(f.bit_depth != bit_depth for f in rep):
            raise ValueError("frames in one sequence must share a bit depth")
        stacked = np.stack([f.values for f in rep])  # (T, 2, H, W)
        t, c, h, w = stacked.shape
        data = stacked.reshape(t * c, h, w).astype(np.float64)
        if normalize:
            data = data / float((1 << bit_depth) - 1)
        layout = TensorLayout(
            kind="binarep",
            num_frames=t,
            bit_depth=bit_depth,
            channels=_frame_major_channels(t),
        )
        return RepTensor(data.astype(np.float32), layout)
    raise TypeError(f"cannot assemble {type(rep).__name__}")


def _frame_major_channels(num_frames: int) -> tuple[str, ...]:
    return tuple(
        f"frame{k}/{pol}" for k in range(num_frames) for pol in ("off", "on")
    )
