"""Event data model, binary event-file I/O, windowing, and the synthetic
event generator.

An event is the atomic sensor output: a pixel, a polarity (+1 brightening /
-1 darkening), and a microsecond timestamp.  Streams are kept as
structure-of-arrays (EventArray) so that file I/O, windowing and state-map
ingestion stay vectorised; the scalar Event dataclass exists for unit-level
work.

All types are immutable values after construction (EventArray's arrays are
not mutated by library code) and safe to move between threads.  Generation
and parsing are single-threaded per stream.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

import numba
import numpy as np

from .errors import (
    ConsistencyError,
    FormatError,
    OrderingError,
    ParameterError,
    TruncationError,
    ValidationError,
)

MAGIC = b"SPTK"
FORMAT_VERSION = 1

# magic(4) + version(u16) + width(u16) + height(u16) + reserved(u16)
# + event_count(u64) + t_start(u64) + t_end(u64), little endian
_HEADER = struct.Struct("<4sHHHHQQQ")
HEADER_SIZE = _HEADER.size  # 36 bytes

# per-record layout: t(u64) x(u16) y(u16) polarity(i8) pad(3)
_RECORD_DTYPE = np.dtype(
    [("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1"), ("pad", "V3")]
)
RECORD_SIZE = _RECORD_DTYPE.itemsize  # 16 bytes


@dataclass(frozen=True)
class Event:
    """A single contrast event."""

    x: int
    y: int
    polarity: int  # +1 or -1
    t: int  # microseconds

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValidationError(f"polarity must be +1 or -1, got {self.polarity}")
        if self.t < 0 or self.x < 0 or self.y < 0:
            raise ValidationError("event fields must be non-negative")


@dataclass(frozen=True)
class EventStreamHeader:
    width: int
    height: int
    t_start: int
    t_end: int
    event_count: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ParameterError("stream resolution must be at least 1x1")
        if self.t_start > self.t_end:
            raise ConsistencyError(
                f"t_start {self.t_start} exceeds t_end {self.t_end}"
            )
        if self.event_count < 0:
            raise ConsistencyError("event_count must be non-negative")


class EventArray:
    """Time-sorted event stream stored as parallel numpy arrays."""

    __slots__ = ("x", "y", "p", "t")

    def __init__(self, x, y, p, t):
        self.x = np.asarray(x, dtype=np.int32)
        self.y = np.asarray(y, dtype=np.int32)
        self.p = np.asarray(p, dtype=np.int8)
        self.t = np.asarray(t, dtype=np.int64)
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ParameterError("event field arrays must have equal length")

    @classmethod
    def empty(cls) -> "EventArray":
        return cls([], [], [], [])

    @classmethod
    def from_events(cls, events: Sequence[Event]) -> "EventArray":
        return cls(
            [e.x for e in events],
            [e.y for e in events],
            [e.polarity for e in events],
            [e.t for e in events],
        )

    @classmethod
    def concatenate(cls, parts: Sequence["EventArray"]) -> "EventArray":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.p for p in parts]),
            np.concatenate([p.t for p in parts]),
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, item):
        if isinstance(item, (int, np.integer)):
            return Event(
                int(self.x[item]), int(self.y[item]), int(self.p[item]), int(self.t[item])
            )
        return EventArray(self.x[item], self.y[item], self.p[item], self.t[item])

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def is_sorted(self) -> bool:
        return len(self) < 2 or bool(np.all(np.diff(self.t) >= 0))

    def sorted_by_time(self) -> "EventArray":
        """Stable sort by timestamp; ties keep their current order."""
        if self.is_sorted():
            return self
        order = np.argsort(self.t, kind="stable")
        return self[order]

    def validate_bounds(self, width: int, height: int) -> None:
        bad = (self.x < 0) | (self.x >= width) | (self.y < 0) | (self.y >= height)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(
                f"event record {i} at pixel ({int(self.x[i])}, {int(self.y[i])}) "
                f"outside {width}x{height} sensor"
            )
        badp = (self.p != 1) & (self.p != -1)
        if badp.any():
            i = int(np.argmax(badp))
            raise ValidationError(f"event record {i} has polarity {int(self.p[i])}")


@dataclass(frozen=True)
class EventWindow:
    """Events with t0 <= t < t0 + duration.  Windows tile a stream without
    gaps or overlap."""

    index: int
    t0: int
    duration: int
    events: EventArray

    @property
    def count(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class NoiseModel:
    """Spatio-temporally uniform Poisson background activity.

    rate is in events per pixel per second; identical seeds reproduce
    identical noise sequences.
    """

    rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.rate < 0:
            raise ParameterError("noise rate must be non-negative")


# ---------------------------------------------------------------------------
# Binary .evt file format
# ---------------------------------------------------------------------------


def write_event_file(header: EventStreamHeader, events: EventArray, path) -> int:
    """Write a stream to the fixed-layout binary .evt format.

    Events must be sorted by timestamp and consistent with the header.
    Returns the number of bytes written.
    """
    if not isinstance(events, EventArray):
        events = EventArray.from_events(list(events))
    if not events.is_sorted():
        raise OrderingError("events must be sorted by timestamp before writing")
    if header.event_count != len(events):
        raise ConsistencyError(
            f"header event_count {header.event_count} != {len(events)} events"
        )
    events.validate_bounds(header.width, header.height)
    if len(events):
        if int(events.t[0]) < header.t_start or int(events.t[-1]) > header.t_end:
            raise ConsistencyError("event timestamps fall outside header span")

    records = np.zeros(len(events), dtype=_RECORD_DTYPE)
    records["t"] = events.t
    records["x"] = events.x
    records["y"] = events.y
    records["p"] = events.p

    blob = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        header.width,
        header.height,
        0,
        header.event_count,
        header.t_start,
        header.t_end,
    ) + records.tobytes()
    with open(path, "wb") as f:
        f.write(blob)
    return len(blob)


def read_event_file(path) -> tuple[EventStreamHeader, EventArray]:
    """Read a binary .evt file and return (header, events sorted by t)."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < HEADER_SIZE:
        raise TruncationError("file shorter than fixed header", len(raw))
    magic, version, width, height, _reserved, count, t_start, t_end = _HEADER.unpack(
        raw[:HEADER_SIZE]
    )
    if magic != MAGIC:
        raise FormatError(f"bad magic bytes {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    expected = HEADER_SIZE + count * RECORD_SIZE
    if len(raw) < expected:
        raise TruncationError(
            f"payload truncated: expected {count} records", len(raw)
        )
    header = EventStreamHeader(
        width=width, height=height, t_start=t_start, t_end=t_end, event_count=count
    )
    records = np.frombuffer(raw, dtype=_RECORD_DTYPE, count=count, offset=HEADER_SIZE)
    events = EventArray(
        records["x"].astype(np.int32),
        records["y"].astype(np.int32),
        records["p"],
        records["t"].astype(np.int64),
    )
    events.validate_bounds(width, height)
    return header, events.sorted_by_time()


# ---------------------------------------------------------------------------
# Windowing
# ---------------------------------------------------------------------------


def window_stream(
    events: EventArray,
    duration_us: int,
    t_start: int | None = None,
    t_end: int | None = None,
) -> list[EventWindow]:
    """Slice a sorted stream into fixed-duration windows.

    Windows tile [t_start, t_end] without gaps or overlap; every event lands
    in exactly one window.  With no explicit span the stream's own first and
    last timestamps are used; an empty stream with no span yields no windows.
    Empty windows inside the span are included (their counts are zero).
    """
    if duration_us < 1:
        raise ParameterError("window duration must be at least 1 microsecond")
    if not events.is_sorted():
        raise OrderingError("events must be sorted by timestamp")
    if t_start is None:
        if len(events) == 0:
            return []
        t_start = int(events.t[0])
    last = int(events.t[-1]) if len(events) else t_start
    if t_end is None:
        t_end = last
    if len(events) and int(events.t[0]) < t_start:
        raise ParameterError("events precede the requested window span")
    # tile far enough to cover both the span and the last event
    top = max(last, t_end, t_start)
    n_windows = (top - t_start) // duration_us + 1

    edges = t_start + duration_us * np.arange(n_windows + 1, dtype=np.int64)
    cuts = np.searchsorted(events.t, edges)
    windows = []
    for i in range(n_windows):
        windows.append(
            EventWindow(
                index=i,
                t0=int(edges[i]),
                duration=duration_us,
                events=events[cuts[i] : cuts[i + 1]],
            )
        )
    return windows


# ---------------------------------------------------------------------------
# Synthetic event generation
# ---------------------------------------------------------------------------


class LatentScene(Protocol):
    """What the generator needs from a simulated scene: disk markers on a
    uniform background, with positions defined on a fixed time grid."""

    width: int
    height: int
    marker_radius: float
    step_us: int
    t0_us: int
    invert: bool

    @property
    def n_steps(self) -> int: ...

    def positions_grid(self) -> np.ndarray:  # (n_steps + 1, n_markers, 2)
        ...


DEFAULT_CONTRAST_THRESHOLD = 0.3
REFRACTORY_US = 200


def disk_coverage(cx, cy, xs, ys, radius: float) -> np.ndarray:
    """Fractional pixel coverage of a disk, with a 1-px linear edge ramp.

    Pixel centres sit at integer coordinates; coverage is 0.5 exactly at
    distance == radius.  This is the latent log-intensity model: 0 is the
    dark background, 1 a fully covered pixel.
    """
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    return np.clip(radius + 0.5 - d, 0.0, 1.0)


@numba.njit(cache=True)
def _integrate(pos, t0_us, step_us, k_lo, k_hi, radius, width, height, threshold, refractory_us, sign, hw):
    """Per-pixel contrast integration over the scene's time grid.

    Each pixel accumulates the signed change in disk coverage; crossing the
    threshold emits one event (consuming every whole multiple crossed) with
    the step's end time, subject to the per-pixel refractory period.
    Sub-pixel motion is integrated lazily: a marker's patch is only touched
    once its centre has moved far enough or refractory-blocked pixels
    remain, which keeps slow decay phases cheap without losing any
    accumulated change.
    """
    n = pos.shape[1]
    acc = np.zeros(height * width, dtype=np.float64)
    last_fire = np.full(height * width, -refractory_us, dtype=np.int64)
    c_last = pos[k_lo].copy()
    hot = np.zeros(n, dtype=np.uint8)
    defer_px = 0.02
    edge = radius + 0.5

    cap = 1 << 16
    out_x = np.empty(cap, dtype=np.int32)
    out_y = np.empty(cap, dtype=np.int32)
    out_p = np.empty(cap, dtype=np.int8)
    out_t = np.empty(cap, dtype=np.int64)
    m = 0

    for k in range(k_lo + 1, k_hi + 1):
        t_k = t0_us + k * step_us
        for i in range(n):
            nx = pos[k, i, 0]
            ny = pos[k, i, 1]
            lx = c_last[i, 0]
            ly = c_last[i, 1]
            if (
                abs(nx - lx) < defer_px
                and abs(ny - ly) < defer_px
                and hot[i] == 0
            ):
                continue
            ax = int(math.floor((nx + lx) / 2.0 + 0.5))
            ay = int(math.floor((ny + ly) / 2.0 + 0.5))
            mv = math.sqrt((nx - lx) ** 2 + (ny - ly) ** 2)
            # coverage can only change in a band around the disk edge; deep
            # inside and far outside both coverages agree, and such pixels
            # can hold no unfired charge unless the marker is hot
            skip_band = hot[i] == 0
            in2 = max(edge - 1.0 - mv, 0.0) ** 2
            out2 = (edge + mv) ** 2
            any_hot = False
            for py in range(ay - hw, ay + hw + 1):
                base = py * width
                dy2 = (py - ny) ** 2
                for px in range(ax - hw, ax + hw + 1):
                    d2 = (px - nx) ** 2 + dy2
                    if skip_band and (d2 < in2 or d2 > out2):
                        continue
                    d_new = math.sqrt(d2)
                    d_old = math.sqrt((px - lx) ** 2 + (py - ly) ** 2)
                    cov_new = min(max(edge - d_new, 0.0), 1.0)
                    cov_old = min(max(edge - d_old, 0.0), 1.0)
                    j = base + px
                    a = acc[j] + sign * (cov_new - cov_old)
                    mag = abs(a)
                    if mag >= threshold:
                        if t_k - last_fire[j] >= refractory_us:
                            pol = 1 if a > 0 else -1
                            a -= pol * math.floor(mag / threshold) * threshold
                            last_fire[j] = t_k
                            if m == cap:
                                cap *= 2
                                nxx = np.empty(cap, dtype=np.int32)
                                nyy = np.empty(cap, dtype=np.int32)
                                npp = np.empty(cap, dtype=np.int8)
                                ntt = np.empty(cap, dtype=np.int64)
                                nxx[:m] = out_x
                                nyy[:m] = out_y
                                npp[:m] = out_p
                                ntt[:m] = out_t
                                out_x, out_y, out_p, out_t = nxx, nyy, npp, ntt
                            out_x[m] = px
                            out_y[m] = py
                            out_p[m] = pol
                            out_t[m] = t_k
                            m += 1
                        else:
                            any_hot = True
                    acc[j] = a
            hot[i] = 1 if any_hot else 0
            c_last[i, 0] = nx
            c_last[i, 1] = ny
    return out_x[:m].copy(), out_y[:m].copy(), out_p[:m].copy(), out_t[:m].copy()


def _check_patch_separation(pos: np.ndarray, hw: int) -> None:
    """Integration patches must never overlap (each marker's contrast change
    is scattered into the accumulator independently)."""
    n = pos.shape[1]
    if n < 2:
        return
    start = pos[0]
    d0 = np.linalg.norm(start[:, None, :] - start[None, :, :], axis=2)
    ii, jj = np.where(np.triu(d0 < 2 * hw + 2 + 40.0, k=1))
    if len(ii) == 0:
        return
    rel = pos[:, ii, :] - pos[:, jj, :]
    min_cheb = float(np.abs(rel).max(axis=2).min())
    if min_cheb <= 2 * hw + 1:
        raise ParameterError(
            f"markers approach within {min_cheb:.1f} px; integration patches "
            f"of half-width {hw} would overlap"
        )


def _noise_events(noise: NoiseModel, width: int, height: int, t0: int, t1: int) -> EventArray:
    if noise.rate == 0.0 or t1 <= t0:
        return EventArray.empty()
    rng = np.random.default_rng(noise.seed)
    expected = noise.rate * width * height * (t1 - t0) * 1e-6
    n = int(rng.poisson(expected))
    if n == 0:
        return EventArray.empty()
    t = np.sort(rng.integers(t0, t1, size=n, dtype=np.int64), kind="stable")
    x = rng.integers(0, width, size=n, dtype=np.int32)
    y = rng.integers(0, height, size=n, dtype=np.int32)
    p = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    return EventArray(x, y, p, t)


def generate_events(
    scene: LatentScene,
    contrast_threshold: float = DEFAULT_CONTRAST_THRESHOLD,
    noise: NoiseModel | None = None,
    t0: int | None = None,
    t1: int | None = None,
    refractory_us: int = REFRACTORY_US,
) -> EventArray:
    """Simulate the sensor front-end over [t0, t1].

    The scene is rendered on its own time grid; each pixel integrates the
    change in latent intensity into a persistent accumulator and emits one
    event whenever the accumulated change crosses the contrast threshold
    (consuming every whole multiple crossed, so a hard edge produces a burst
    that the per-pixel refractory period keeps bounded).  Rising intensity
    emits +1, falling intensity -1.  Poisson background noise is superimposed
    unchanged.  Output is sorted by timestamp and deterministic for a fixed
    (scene, threshold, noise seed) triple.
    """
    if contrast_threshold <= 0:
        raise ParameterError("contrast threshold must be positive")
    step = scene.step_us
    span_end = scene.t0_us + scene.n_steps * step
    if t0 is None:
        t0 = scene.t0_us
    if t1 is None:
        t1 = span_end
    if not (scene.t0_us <= t0 < t1 <= span_end):
        raise ParameterError(
            f"generation span [{t0}, {t1}] outside scene span "
            f"[{scene.t0_us}, {span_end}]"
        )
    if (t0 - scene.t0_us) % step or (t1 - scene.t0_us) % step:
        raise ParameterError("generation span must align to the scene's render step")

    pos = scene.positions_grid()
    k_lo = (t0 - scene.t0_us) // step
    k_hi = (t1 - scene.t0_us) // step
    n_markers = pos.shape[1]
    r = scene.marker_radius
    width = scene.width

    # patch half-width: disk + 1-px ramp + anchor rounding + motion slack
    motion = float(np.max(np.linalg.norm(np.diff(pos, axis=0), axis=2))) if len(pos) > 1 else 0.0
    if motion > 1.5:
        raise ParameterError(
            f"scene moves {motion:.2f} px per render step; too fast to integrate"
        )
    hw = int(math.ceil(r + 1.6 + motion))

    lo = np.min(pos, axis=(0, 1))
    hi = np.max(pos, axis=(0, 1))
    if lo[0] - hw < 0 or lo[1] - hw < 0 or hi[0] + hw >= width or hi[1] + hw >= scene.height:
        raise ParameterError("marker patch leaves the sensor area")
    _check_patch_separation(pos[k_lo : k_hi + 1], hw)

    sign = -1.0 if scene.invert else 1.0
    sx, sy, sp, st_ = _integrate(
        pos,
        np.int64(scene.t0_us),
        np.int64(step),
        np.int64(k_lo),
        np.int64(k_hi),
        float(r),
        np.int64(width),
        np.int64(scene.height),
        float(contrast_threshold),
        np.int64(refractory_us),
        sign,
        np.int64(hw),
    )
    signal = EventArray(sx, sy, sp, st_)

    if noise is None:
        noise = NoiseModel(rate=0.0)
    bg = _noise_events(noise, scene.width, scene.height, t0, t1)
    merged = EventArray.concatenate([signal, bg])
    return merged.sorted_by_time()


def stream_header_for(
    scene_width: int, scene_height: int, events: EventArray, t_start: int, t_end: int
) -> EventStreamHeader:
    return EventStreamHeader(
        width=scene_width,
        height=scene_height,
        t_start=t_start,
        t_end=t_end,
        event_count=len(events),
    )
