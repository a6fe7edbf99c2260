"""Millisecond-window collision detection, the frame-based displacement-sum
baseline, and per-trial deviation metrics.

The event detector watches raw event counts in fixed windows: a transient
impact produces a burst that crosses a threshold calibrated from quiescent
data.  The baseline mimics a conventional frame camera: it sums marker
displacement magnitudes per frame and triggers on a fixed threshold, paying
the frame period as detection latency.

Detection is a streaming fold over windows (constant state, decision
latency at most one window).  Independent trials may run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import CalibrationError, InputError, ParameterError
from .events import EventArray, EventWindow, NoiseModel, window_stream
from .sim import (
    ApproachScenario,
    RobotReaction,
    approach_marker_frames,
    make_approach_stream,
)

THRESHOLD_SAFETY_FACTOR = 3
THRESHOLD_FLOOR = 10


@dataclass(frozen=True)
class CollisionConfig:
    window_us: int = 1000
    count_threshold: int | None = None
    quiescent_calibration_windows: int = 200

    def __post_init__(self):
        if self.window_us < 1:
            raise ParameterError("window_us must be at least 1")
        if self.count_threshold is not None and self.count_threshold <= 0:
            raise ParameterError("count_threshold must be positive")


@dataclass(frozen=True)
class BaselineConfig:
    frame_rate_hz: float = 30.0
    epsilon_threshold: float = 16.0  # px, displacement-sum trigger

    def __post_init__(self):
        if self.frame_rate_hz <= 0:
            raise ParameterError("frame_rate_hz must be positive")
        if self.epsilon_threshold <= 0:
            raise ParameterError("epsilon_threshold must be positive")


@dataclass(frozen=True)
class CollisionReport:
    triggered: bool
    t_trigger_us: int | None
    x_real_mm: float
    x_collision_mm: float | None
    x_stop_mm: float | None
    delta_x_p_mm: float | None
    delta_x_e_mm: float | None
    velocity_mps: float
    detector: str = "event"


def calibrate_threshold(
    quiescent_windows: Sequence[EventWindow], cfg: CollisionConfig
) -> int:
    """Count threshold from contact-free data: three times the largest
    quiescent window count, never below the fixed floor."""
    if len(quiescent_windows) < cfg.quiescent_calibration_windows:
        raise CalibrationError(
            f"need at least {cfg.quiescent_calibration_windows} quiescent windows, "
            f"got {len(quiescent_windows)}"
        )
    peak = max(w.count for w in quiescent_windows)
    return max(THRESHOLD_FLOOR, THRESHOLD_SAFETY_FACTOR * peak)


def detect_collision(
    windows: Sequence[EventWindow], cfg: CollisionConfig
) -> int | None:
    """Index of the first window whose count exceeds the threshold, or None.

    Streams over the windows with constant state; the decision for a window
    is available as soon as it closes.
    """
    if cfg.count_threshold is None:
        raise ParameterError("count_threshold not calibrated")
    for w in windows:
        if w.count > cfg.count_threshold:
            return w.index
    return None


def detect_collision_time(
    events: EventArray, cfg: CollisionConfig, t_start: int, t_end: int | None = None
) -> tuple[int, int] | None:
    """Streaming variant that also reports when the count crossed.

    Returns (window index, timestamp of the event that pushed the window
    count past the threshold).  The window index always agrees with
    detect_collision on the same tiling.
    """
    if cfg.count_threshold is None:
        raise ParameterError("count_threshold not calibrated")
    if len(events) == 0:
        return None
    win = np.asarray((events.t - t_start) // cfg.window_us)
    if t_end is not None:
        top = (t_end - t_start) // cfg.window_us
        keep = win <= top
        win = win[keep]
        ts = events.t[keep]
    else:
        ts = events.t
    if len(win) == 0:
        return None
    valid = win >= 0
    win = win[valid]
    ts = ts[valid]
    counts = np.bincount(win.astype(np.int64))
    over = np.nonzero(counts > cfg.count_threshold)[0]
    if len(over) == 0:
        return None
    w = int(over[0])
    first_in_window = int(np.searchsorted(win, w))
    crossing = first_in_window + cfg.count_threshold  # (threshold+1)-th event
    return w, int(ts[crossing])


def detect_collision_baseline(
    marker_frames: Sequence[np.ndarray],
    init: np.ndarray,
    cfg: BaselineConfig,
) -> int | None:
    """First frame where the summed marker displacement exceeds the
    threshold: D(t) = sum_i ||p_i(t) - p_i(init)||."""
    init = np.asarray(init, dtype=np.float64)
    for i, frame in enumerate(marker_frames):
        frame = np.asarray(frame, dtype=np.float64)
        if frame.shape != init.shape:
            raise InputError(
                f"frame {i} has {frame.shape[0]} markers, expected {init.shape[0]}"
            )
        d = float(np.linalg.norm(frame - init, axis=1).sum())
        if d > cfg.epsilon_threshold:
            return i
    return None


def displacement_sum(frame: np.ndarray, init: np.ndarray) -> float:
    frame = np.asarray(frame, dtype=np.float64)
    init = np.asarray(init, dtype=np.float64)
    if frame.shape != init.shape:
        raise InputError("marker count mismatch")
    return float(np.linalg.norm(frame - init, axis=1).sum())


def run_collision_trial(
    scn: ApproachScenario,
    v_mps: float,
    detector: str,
    reaction: RobotReaction,
    *,
    collision_cfg: CollisionConfig | None = None,
    baseline_cfg: BaselineConfig | None = None,
    noise: NoiseModel | None = None,
) -> CollisionReport:
    """One approach at velocity v with the chosen detector; deterministic
    per noise seed.  Populates the pose triplet (contact, trigger, stop) and
    the detection/overshoot deviations along the approach axis."""
    if detector not in ("event", "baseline"):
        raise ParameterError(f"unknown detector {detector!r}")
    scn = replace(scn, v_mps=v_mps)
    noise = noise or NoiseModel(rate=0.05, seed=0)

    t_trigger_us: float | None = None
    if detector == "event":
        ccfg = collision_cfg or CollisionConfig()
        events, _ = make_approach_stream(scn, noise)
        calib_span = ccfg.quiescent_calibration_windows * ccfg.window_us
        if scn.t_move_start_us < calib_span:
            raise CalibrationError(
                "scenario leaves too little quiescent time before motion"
            )
        quiet = window_stream(events, ccfg.window_us, t_start=0, t_end=calib_span - 1)
        quiet = quiet[: ccfg.quiescent_calibration_windows]
        threshold = calibrate_threshold(quiet, ccfg)
        armed = replace(ccfg, count_threshold=threshold)
        hit = detect_collision_time(
            events[events.t >= calib_span], armed, t_start=calib_span
        )
        if hit is not None:
            t_trigger_us = float(hit[1])
    else:
        bcfg = baseline_cfg or BaselineConfig()
        times, frames = approach_marker_frames(scn, bcfg.frame_rate_hz, seed=noise.seed)
        idx = detect_collision_baseline(frames[1:], frames[0], bcfg)
        if idx is not None:
            t_trigger_us = float(times[idx + 1])

    if t_trigger_us is None:
        return CollisionReport(
            triggered=False,
            t_trigger_us=None,
            x_real_mm=scn.x_real_mm,
            x_collision_mm=None,
            x_stop_mm=None,
            delta_x_p_mm=None,
            delta_x_e_mm=None,
            velocity_mps=v_mps,
            detector=detector,
        )

    x_collision = scn.probe_position_mm(t_trigger_us)
    x_stop = x_collision + reaction.overshoot_mm(v_mps)
    return CollisionReport(
        triggered=True,
        t_trigger_us=int(t_trigger_us),
        x_real_mm=scn.x_real_mm,
        x_collision_mm=x_collision,
        x_stop_mm=x_stop,
        delta_x_p_mm=x_collision - scn.x_real_mm,
        delta_x_e_mm=x_stop - scn.x_real_mm,
        velocity_mps=v_mps,
        detector=detector,
    )
