"""Readers and writers for raw event files.

Two interchange formats are supported:

* the 5-byte-per-event binary layout used by the N-MNIST distribution:
  byte0 = x, byte1 = y, byte2 bit7 = polarity (1 -> +1), byte2 bits6..0 =
  timestamp bits 22..16, bytes3..4 = timestamp bits 15..0, big-endian
  within the field;
* a plain text format with one `x,y,t,p` line per event, `#` comments,
  UTF-8, LF or CRLF accepted, LF emitted.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import CsvParseError, EventBoundsError, MalformedFileError
from .events import EventStream, SensorGeometry

NMNIST_EVENT_SIZE = 5
NMNIST_MAX_TIMESTAMP = (1 << 23) - 1

CSV_HEADER = "# x,y,t,p"


def parse_nmnist(data: bytes, geometry: SensorGeometry) -> EventStream:
    """Decode 5-byte N-MNIST records into a sorted stream."""
    if len(data) % NMNIST_EVENT_SIZE != 0:
        raise MalformedFileError(
            f"file length {len(data)} is not a multiple of {NMNIST_EVENT_SIZE} bytes"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, NMNIST_EVENT_SIZE).astype(np.int64)
    x = raw[:, 0]
    y = raw[:, 1]
    p = ((raw[:, 2] >> 7) & 1) * 2 - 1
    t = ((raw[:, 2] & 0x7F) << 16) | (raw[:, 3] << 8) | raw[:, 4]
    return EventStream.from_arrays(geometry, x, y, t, p)


def encode_nmnist(stream: EventStream) -> bytes:
    """Inverse of parse_nmnist for streams whose timestamps fit 23 bits."""
    t = stream.t
    if len(t) and int(t.max()) > NMNIST_MAX_TIMESTAMP:
        i = int(np.argmax(t > NMNIST_MAX_TIMESTAMP))
        raise EventBoundsError(
            f"event {i} timestamp {int(t[i])} exceeds the 23-bit field", index=i
        )
    if np.any(stream.x > 0xFF) or np.any(stream.y > 0xFF):
        raise EventBoundsError("coordinates above 255 do not fit the 1-byte fields")
    out = np.empty((len(stream), NMNIST_EVENT_SIZE), dtype=np.uint8)
    out[:, 0] = stream.x
    out[:, 1] = stream.y
    pol_bit = ((stream.p.astype(np.int64) + 1) // 2) << 7
    out[:, 2] = pol_bit | ((t >> 16) & 0x7F)
    out[:, 3] = (t >> 8) & 0xFF
    out[:, 4] = t & 0xFF
    return out.tobytes()


def parse_csv(text: str | Iterable[str], geometry: SensorGeometry) -> EventStream:
    """Parse `x,y,t,p` lines; p may be 0/1 (0 is read as Off) or -1/+1."""
    lines = text.splitlines() if isinstance(text, str) else text
    xs: list[int] = []
    ys: list[int] = []
    ts: list[int] = []
    ps: list[int] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise CsvParseError(f"expected 4 comma-separated fields, got {len(fields)}", lineno)
        try:
            x, y, t, p = (int(f.strip()) for f in fields)
        except ValueError:
            raise CsvParseError(f"non-integer field in {line!r}", lineno) from None
        if p not in (-1, 0, 1):
            raise CsvParseError(f"polarity must be -1, 0, or 1, got {p}", lineno)
        if p == 0:
            p = -1  # some exporters use 0/1 polarity
        if not (0 <= x < geometry.width and 0 <= y < geometry.height):
            raise CsvParseError(f"event ({x}, {y}) outside {geometry} sensor", lineno)
        if t < 0:
            raise CsvParseError(f"negative timestamp {t}", lineno)
        xs.append(x)
        ys.append(y)
        ts.append(t)
        ps.append(p)
    return EventStream.from_arrays(geometry, xs, ys, ts, ps)


def write_csv(stream: EventStream) -> str:
    """Serialize a stream so that parse_csv(write_csv(s)) == s."""
    lines = [CSV_HEADER]
    lines.extend(f"{e.x},{e.y},{e.t},{e.p}" for e in stream)
    return "\n".join(lines) + "\n"
