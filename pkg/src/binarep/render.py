"""Deterministic PNG rendering of frames and tensor slices.

One channel renders as grayscale scaled by 255/representable_max; two
channels composite Off as red intensity and On as green on black. The
output bytes are a pure function of the input values.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .representations import BinaRepFrame, RepTensor


def render_png(
    frame: BinaRepFrame | RepTensor | np.ndarray,
    representable_max: float | None = None,
    channel: int | tuple[int, int] | None = None,
) -> bytes:
    """Render a 1- or 2-channel view of a frame as PNG bytes.

    `channel` selects a single channel (grayscale) or an (off, on) pair from
    tensors with more than two channels; without it those are rejected.
    """
    if isinstance(frame, BinaRepFrame):
        values = frame.values
        if representable_max is None:
            representable_max = float(frame.max_value)
    elif isinstance(frame, RepTensor):
        values = frame.data
    else:
        values = np.asarray(frame)
    if values.ndim == 2:
        values = values[None, :, :]
    if values.ndim != 3:
        raise ValueError(f"expected a C x H x W grid, got shape {values.shape}")

    if channel is not None:
        if isinstance(channel, tuple):
            off, on = channel
            values = np.stack([values[off], values[on]])
        else:
            values = values[channel : channel + 1]
    if values.shape[0] not in (1, 2):
        raise ValueError(
            f"{values.shape[0]} channels need an explicit channel selection"
        )

    if representable_max is None:
        observed = float(values.max())
        representable_max = observed if observed > 0 else 1.0

    scaled = np.clip(np.rint(values * (255.0 / representable_max)), 0, 255).astype(np.uint8)

    if scaled.shape[0] == 1:
        image = Image.fromarray(scaled[0], mode="L")
    else:
        rgb = np.zeros(scaled.shape[1:] + (3,), dtype=np.uint8)
        rgb[:, :, 0] = scaled[0]  # Off -> red
        rgb[:, :, 1] = scaled[1]  # On -> green
        image = Image.fromarray(rgb, mode="RGB")

    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()
