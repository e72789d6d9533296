"""Event data model, sensor geometry, and temporal windowing.

Events are kept in a structured numpy array sorted by timestamp; all types
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EmptyStreamError, EventBoundsError

EVENT_DTYPE = np.dtype([("x", "<i4"), ("y", "<i4"), ("t", "<i8"), ("p", "<i1")])

OFF = -1
ON = 1


class Event(NamedTuple):
    """One polarity change: pixel column, pixel row, microsecond timestamp, polarity."""

    x: int
    y: int
    t: int
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel resolution of the sensor that produced a stream."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"sensor geometry must be at least 1x1, got {self.width}x{self.height}"
            )

    @property
    def num_pixels(self) -> int:
        return self.width * self.height

    @classmethod
    def parse(cls, text: str) -> "SensorGeometry":
        """Parse a 'WIDTHxHEIGHT' string such as '34x34'."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"geometry must look like WIDTHxHEIGHT, got {text!r}")
        try:
            width, height = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"geometry must look like WIDTHxHEIGHT, got {text!r}") from None
        return cls(width, height)

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


def polarity_channel(p: np.ndarray | int):
    """Map polarity {-1, +1} to channel index {0, 1} (channel 0 = Off, 1 = On)."""
    return (np.asarray(p).astype(np.int64) + 1) // 2


@dataclass(frozen=True, eq=False)
class EventStream:
    """A time-sorted event sequence plus the geometry it was recorded on."""

    geometry: SensorGeometry
    events: np.ndarray  # EVENT_DTYPE, non-decreasing in t, read-only

    def __post_init__(self):
        if self.events.dtype != EVENT_DTYPE:
            raise TypeError(f"events must have dtype {EVENT_DTYPE}, got {self.events.dtype}")
        self.events.flags.writeable = False

    @classmethod
    def from_arrays(
        cls,
        geometry: SensorGeometry,
        x: Sequence[int] | np.ndarray,
        y: Sequence[int] | np.ndarray,
        t: Sequence[int] | np.ndarray,
        p: Sequence[int] | np.ndarray,
    ) -> "EventStream":
        """Build a validated stream; out-of-order input is stably sorted by t."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        t = np.asarray(t, dtype=np.int64)
        p = np.asarray(p, dtype=np.int64)
        if not (x.shape == y.shape == t.shape == p.shape) or x.ndim != 1:
            raise ValueError("x, y, t, p must be 1-d arrays of equal length")

        _validate_fields(geometry, x, y, t, p)

        data = np.empty(len(x), dtype=EVENT_DTYPE)
        data["x"], data["y"], data["t"], data["p"] = x, y, t, p
        if len(t) and np.any(np.diff(t) < 0):
            order = np.argsort(t, kind="stable")
            data = data[order]
        return cls(geometry, data)

    @classmethod
    def from_events(cls, geometry: SensorGeometry, events: Iterable[Event]) -> "EventStream":
        rows = list(events)
        return cls.from_arrays(
            geometry,
            [e[0] for e in rows],
            [e[1] for e in rows],
            [e[2] for e in rows],
            [e[3] for e in rows],
        )

    @classmethod
    def empty(cls, geometry: SensorGeometry) -> "EventStream":
        return cls(geometry, np.empty(0, dtype=EVENT_DTYPE))

    @classmethod
    def _wrap(cls, geometry: SensorGeometry, data: np.ndarray) -> "EventStream":
        # Internal fast path for data already validated and sorted.
        return cls(geometry, data)

    @property
    def x(self) -> np.ndarray:
        return self.events["x"]

    @property
    def y(self) -> np.ndarray:
        return self.events["y"]

    @property
    def t(self) -> np.ndarray:
        return self.events["t"]

    @property
    def p(self) -> np.ndarray:
        return self.events["p"]

    @property
    def t_first(self) -> int:
        self._require_nonempty()
        return int(self.events["t"][0])

    @property
    def t_last(self) -> int:
        self._require_nonempty()
        return int(self.events["t"][-1])

    def _require_nonempty(self):
        if len(self.events) == 0:
            raise EmptyStreamError("stream has no events")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        for row in self.events:
            yield Event(int(row["x"]), int(row["y"]), int(row["t"]), int(row["p"]))

    def __getitem__(self, i: int) -> Event:
        row = self.events[i]
        return Event(int(row["x"]), int(row["y"]), int(row["t"]), int(row["p"]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.events, other.events)

    def __repr__(self) -> str:
        return f"EventStream({self.geometry}, {len(self)} events)"


def _validate_fields(geometry, x, y, t, p):
    bad = (x < 0) | (x >= geometry.width) | (y < 0) | (y >= geometry.height)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EventBoundsError(
            f"event {i} at ({int(x[i])}, {int(y[i])}) outside {geometry} sensor", index=i
        )
    bad = t < 0
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EventBoundsError(f"event {i} has negative timestamp {int(t[i])}", index=i)
    bad = (p != OFF) & (p != ON)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EventBoundsError(f"event {i} has polarity {int(p[i])}, expected -1 or +1", index=i)


def concatenate(streams: Sequence[EventStream]) -> EventStream:
    """Merge streams recorded on the same sensor into one time-sorted stream.

    Streams that already follow each other in time are joined as-is, so the
    slices of a window plan concatenate back to their source stream exactly.
    """
    if not streams:
        raise ValueError("need at least one stream")
    geometry = streams[0].geometry
    if any(s.geometry != geometry for s in streams):
        raise ValueError("streams must share one geometry")
    data = np.concatenate([s.events for s in streams])
    if len(data) and np.any(np.diff(data["t"]) < 0):
        data = data[np.argsort(data["t"], kind="stable")]
    return EventStream._wrap(geometry, data)


@dataclass(frozen=True, eq=False)
class WindowPlan:
    """Time boundaries of consecutive windows over a stream.

    Window i spans [boundaries[i], boundaries[i+1]); the final window is
    closed on the right so the last event is never dropped. A plan whose
    span is zero puts every event in window 0.
    """

    boundaries: np.ndarray  # int64, length num_windows + 1, non-decreasing

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        if b.ndim != 1 or len(b) < 2:
            raise ValueError("a plan needs at least two boundaries")
        if np.any(np.diff(b) < 0):
            raise ValueError("boundaries must be non-decreasing")
        object.__setattr__(self, "boundaries", b)
        b.flags.writeable = False

    @property
    def num_windows(self) -> int:
        return len(self.boundaries) - 1

    def window_span(self, i: int) -> tuple[int, int]:
        return int(self.boundaries[i]), int(self.boundaries[i + 1])

    def assign(self, t: np.ndarray) -> np.ndarray:
        """Window index for each timestamp, applying the closed-right final rule."""
        t = np.asarray(t, dtype=np.int64)
        if self.boundaries[0] == self.boundaries[-1]:
            return np.zeros(t.shape, dtype=np.int64)
        idx = np.searchsorted(self.boundaries[1:], t, side="right")
        return np.minimum(idx, self.num_windows - 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowPlan):
            return NotImplemented
        return np.array_equal(self.boundaries, other.boundaries)


def plan_windows(stream: EventStream, count: int, mode: str = "duration") -> WindowPlan:
    """Split a stream's time range [t_first, t_last] into `count` windows.

    mode "duration" (default) makes equal-duration windows. mode "count"
    picks boundaries at event-index quantiles so windows hold roughly equal
    numbers of events; counts are approximate when timestamp ties span a
    quantile. Every event of the planned stream falls in exactly one window.
    """
    if count < 1:
        raise ValueError(f"window count must be >= 1, got {count}")
    if len(stream) == 0:
        raise EmptyStreamError("cannot plan windows over an empty stream")
    t0, t1 = stream.t_first, stream.t_last

    if mode == "duration":
        span = t1 - t0
        # ceil(t0 + i*span/count): integer boundaries whose half-open windows
        # reproduce exact rational equal-duration binning of integer timestamps
        bounds = [t0 + (i * span + count - 1) // count for i in range(count + 1)]
        return WindowPlan(np.asarray(bounds, dtype=np.int64))
    if mode == "count":
        ts = stream.t
        n = len(ts)
        bounds = [t0]
        for i in range(1, count):
            bounds.append(int(ts[min(n - 1, (i * n) // count)]))
        bounds.append(t1)
        return WindowPlan(np.maximum.accumulate(np.asarray(bounds, dtype=np.int64)))
    raise ValueError(f"unknown window mode {mode!r}")


def slice_stream(stream: EventStream, plan: WindowPlan) -> list[EventStream]:
    """Split a stream into one (possibly empty) stream per plan window.

    The concatenation of the slices equals the input stream.
    """
    idx = plan.assign(stream.t)
    offsets = np.searchsorted(idx, np.arange(plan.num_windows + 1))
    return [
        EventStream._wrap(stream.geometry, stream.events[offsets[i] : offsets[i + 1]])
        for i in range(plan.num_windows)
    ]
