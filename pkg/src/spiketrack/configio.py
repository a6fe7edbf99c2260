"""Flat key=value configuration and scenario files.

Lines are `key = value`; blank lines and #-comments are ignored.  Tracker
configuration files understand the tracking keys plus window_us; scenario
files describe one simulated interaction.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParameterError
from .tracker import TrackerConfig

TRACKER_KEYS = {
    "delta": float,
    "gamma": float,
    "assoc_radius": float,
    "expected_markers": int,
    "min_blob_area": int,
    "success_radius": float,
}


def parse_kv_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_tracker_config(path) -> tuple[TrackerConfig, int]:
    """Read a tracker config file; returns (config, window_us)."""
    raw = parse_kv_file(path)
    window_us = int(raw.pop("window_us", 1000))
    kwargs = {}
    for key, value in raw.items():
        if key not in TRACKER_KEYS:
            raise ParameterError(f"unknown tracker config key {key!r}")
        kwargs[key] = TRACKER_KEYS[key](value)
    return TrackerConfig(**kwargs), window_us


def write_kv_file(path, values: dict) -> None:
    lines = [f"{k} = {v}" for k, v in values.items()]
    Path(path).write_text("\n".join(lines) + "\n")
