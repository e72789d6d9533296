"""Deterministic, seedable stream corruptions at five severity levels.

Background activity injects k = round(ratio * |stream|) uniform random
events (sensor noise with no light change); occlusion drops every event
inside a centered box sized as a percentage of each image dimension.
Randomness comes from numpy's PCG64 seeded per spec so identical inputs
give byte-identical outputs on any platform; occlusion uses no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyStreamError
from .events import EVENT_DTYPE, EventStream

SEVERITY_LEVELS = (1, 2, 3, 4, 5)


class CorruptionKind(Enum):
    BACKGROUND_ACTIVITY = "ba"
    OCCLUSION = "occlusion"

    @classmethod
    def parse(cls, token: str) -> "CorruptionKind":
        aliases = {
            "ba": cls.BACKGROUND_ACTIVITY,
            "background": cls.BACKGROUND_ACTIVITY,
            "background_activity": cls.BACKGROUND_ACTIVITY,
            "occ": cls.OCCLUSION,
            "occlusion": cls.OCCLUSION,
        }
        kind = aliases.get(token.strip().lower())
        if kind is None:
            raise ValueError(f"unknown corruption kind {token!r}")
        return kind


# Severity -> parameter percentage. Background activity: ratio of injected
# events to original events. Occlusion: box side as a percentage of the
# matching image dimension.
_BACKGROUND_PCT = {1: 0.5, 2: 0.8, 3: 1.0, 4: 2.0, 5: 3.0}
_OCCLUSION_PCT = {1: 35.0, 2: 45.0, 3: 50.0, 4: 60.0, 5: 70.0}


def severity_param(kind: CorruptionKind, severity: int) -> float:
    """Parameter percentage for a corruption at a severity level in 1..5."""
    if severity not in SEVERITY_LEVELS:
        raise ValueError(f"severity must be in 1..5, got {severity}")
    table = _BACKGROUND_PCT if kind is CorruptionKind.BACKGROUND_ACTIVITY else _OCCLUSION_PCT
    return table[severity]


def round_half_away(x: float) -> int:
    """Round halves away from zero, fixed for cross-platform determinism."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class CorruptionSpec:
    """Corruption kind, severity level 1..5, and RNG seed."""

    kind: CorruptionKind
    severity: int
    seed: int = 0

    def __post_init__(self):
        if self.severity not in SEVERITY_LEVELS:
            raise ValueError(f"severity must be in 1..5, got {self.severity}")

    @property
    def param(self) -> float:
        return severity_param(self.kind, self.severity)

    @classmethod
    def parse(cls, text: str) -> "CorruptionSpec":
        """Parse 'kind:severity' or 'kind:severity:seed'."""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"expected kind:severity[:seed], got {text!r}")
        kind = CorruptionKind.parse(parts[0])
        severity = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
        return cls(kind, severity, seed)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.severity}:{self.seed}"

    def apply(self, stream: EventStream) -> EventStream:
        if self.kind is CorruptionKind.BACKGROUND_ACTIVITY:
            return background_activity(stream, self)
        return occlusion(stream, self)


def background_activity(stream: EventStream, spec: CorruptionSpec) -> EventStream:
    """Inject round(ratio * |stream|) uniform random events, then re-sort by t.

    Coordinates are uniform over the sensor, timestamps uniform over the
    original [t_first, t_last], polarities uniform in {-1, +1}; the four
    arrays are drawn in that order from PCG64(seed). Original events pass
    through verbatim.
    """
    if spec.kind is not CorruptionKind.BACKGROUND_ACTIVITY:
        raise ValueError(f"spec is {spec.kind.value}, not background activity")
    if len(stream) == 0:
        raise EmptyStreamError("cannot add background activity to an empty stream")
    ratio = spec.param / 100.0
    k = round_half_away(ratio * len(stream))
    if k == 0:
        return stream

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    geo = stream.geometry
    added = np.empty(k, dtype=EVENT_DTYPE)
    added["x"] = rng.integers(0, geo.width, size=k)
    added["y"] = rng.integers(0, geo.height, size=k)
    added["t"] = rng.integers(stream.t_first, stream.t_last, size=k, endpoint=True)
    added["p"] = rng.integers(0, 2, size=k).astype(np.int8) * 2 - 1

    merged = np.concatenate([stream.events, added])
    order = np.argsort(merged["t"], kind="stable")
    return EventStream._wrap(geo, merged[order])


def occlusion_box(geometry, pct: float) -> tuple[int, int, int, int]:
    """Centered box (x0, y0, width, height); sides are pct% of each dimension."""
    bw = round_half_away(pct / 100.0 * geometry.width)
    bh = round_half_away(pct / 100.0 * geometry.height)
    return (geometry.width - bw) // 2, (geometry.height - bh) // 2, bw, bh


def occlusion(stream: EventStream, spec: CorruptionSpec) -> EventStream:
    """Drop every event inside the centered occlusion box; order is preserved."""
    if spec.kind is not CorruptionKind.OCCLUSION:
        raise ValueError(f"spec is {spec.kind.value}, not occlusion")
    x0, y0, bw, bh = occlusion_box(stream.geometry, spec.param)
    inside = (
        (stream.x >= x0)
        & (stream.x < x0 + bw)
        & (stream.y >= y0)
        & (stream.y < y0 + bh)
    )
    return EventStream._wrap(stream.geometry, stream.events[~inside])
