"""Persistent binary occupancy grid driven by the asynchronous event stream.

Every +1 event paints its pixel white, every -1 event erases it.  Because a
moving marker's leading edge brightens and its trailing edge darkens, the
grid converges to the marker silhouette after one diameter of travel and
stays aligned with it under further motion.  The map is never decayed or
reset on its own; callers clear it explicitly.

Single writer per map; snapshots are detached copies and freely shareable.
"""

from __future__ import annotations

import numpy as np

from .errors import OrderingError, ParameterError, ValidationError
from .events import Event, EventArray


class StateMap:
    __slots__ = ("width", "height", "cells", "last_update_t")

    def __init__(self, width: int, height: int):
        if width < 1 or height < 1:
            raise ParameterError("state map dimensions must be at least 1x1")
        self.width = width
        self.height = height
        self.cells = np.zeros((height, width), dtype=np.uint8)
        self.last_update_t = 0

    def copy(self) -> "StateMap":
        m = StateMap(self.width, self.height)
        m.cells = self.cells.copy()
        m.last_update_t = self.last_update_t
        return m

    def reset(self) -> None:
        """Explicitly clear the grid; the only way occupancy is ever lost."""
        self.cells.fill(0)
        self.last_update_t = 0


def new_state_map(width: int, height: int) -> StateMap:
    return StateMap(width, height)


def apply_event(m: StateMap, e: Event) -> StateMap:
    """Apply one event in place: set the cell to 1 on +1, to 0 on -1."""
    if not (0 <= e.x < m.width and 0 <= e.y < m.height):
        raise ValidationError(
            f"event at ({e.x}, {e.y}) outside {m.width}x{m.height} map"
        )
    if e.t < m.last_update_t:
        raise OrderingError(
            f"event time {e.t} precedes last update {m.last_update_t}"
        )
    m.cells[e.y, e.x] = 1 if e.polarity > 0 else 0
    m.last_update_t = e.t
    return m


def apply_batch(m: StateMap, events: EventArray) -> tuple[StateMap, int]:
    """Apply a sorted batch of events; equivalent to sequential apply_event.

    Returns the map and the number of cells whose value differs from before
    the batch (net transitions: a paint immediately erased counts as zero).
    """
    if len(events) == 0:
        return m, 0
    if not events.is_sorted():
        raise OrderingError("event batch must be sorted by timestamp")
    if int(events.t[0]) < m.last_update_t:
        raise OrderingError(
            f"batch starts at {int(events.t[0])}, before last update {m.last_update_t}"
        )
    events.validate_bounds(m.width, m.height)

    flat = events.y.astype(np.int64) * m.width + events.x
    # last event per pixel wins: first occurrence in the reversed batch
    rev = flat[::-1]
    uniq, first = np.unique(rev, return_index=True)
    final_pol = events.p[::-1][first]
    new_vals = (final_pol > 0).astype(np.uint8)
    old_vals = m.cells.reshape(-1)[uniq]
    changed = int(np.count_nonzero(old_vals != new_vals))
    m.cells.reshape(-1)[uniq] = new_vals
    m.last_update_t = int(events.t[-1])
    return m, changed


def snapshot(m: StateMap) -> np.ndarray:
    """Deep-copied binary image, decoupled from further updates."""
    img = m.cells.copy()
    img.setflags(write=False)
    return img


# ---------------------------------------------------------------------------
# PGM debug export
# ---------------------------------------------------------------------------


def write_pgm(image: np.ndarray, path) -> None:
    """Export a 0/1 binary image as binary PGM with values 0 and 255."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ParameterError("PGM export expects a 2-D image")
    payload = (img.astype(np.uint8) * 255).tobytes()
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header + payload)


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM written by write_pgm back to a 0/1 image."""
    with open(path, "rb") as f:
        raw = f.read()
    if not raw.startswith(b"P5"):
        raise ParameterError("not a binary PGM file")
    fields: list[bytes] = []
    i = 2
    while len(fields) < 3:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(raw) and not raw[i : i + 1].isspace():
            i += 1
        fields.append(raw[start:i])
    i += 1  # single whitespace after maxval
    w, h, maxval = (int(v) for v in fields)
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=i)
    return (data.reshape(h, w) > maxval // 2).astype(np.uint8)
