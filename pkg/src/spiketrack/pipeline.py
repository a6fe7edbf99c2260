"""Wiring between the event stream and the tracker: windowed ingestion into
the state map, denoising, centroid detection, bootstrap calibration, and the
per-window tracking loop.

The state map persists from calibration into tracking (the reconstruction
would otherwise be blind until every marker has moved a full diameter), so
task streams must continue the calibration stream's clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import DenoiserConfig, close_image, denoise
from .errors import CalibrationError
from .events import EventArray, window_stream
from .statemap import StateMap, apply_batch, snapshot
from .tracker import (
    Detection,
    MarkerTrack,
    TrackerConfig,
    calibrate,
    detect_centroids,
    update_tracks,
)

DEFAULT_WINDOW_US = 1000

# quiescence detection for calibration epochs: "strong" activity is a
# window count near the stream's busiest level; an equilibrium epoch is
# captured a fixed delay after the last strong window
STRONG_FRACTION = 0.25
STRONG_FLOOR = 20
SETTLE_DELAY_WINDOWS = 250


@dataclass
class TrackRow:
    t_us: int
    marker_id: int
    det_x: float
    det_y: float
    real_x: float
    real_y: float
    held: bool


@dataclass
class TrackingRun:
    tracks: list[MarkerTrack]
    history: list[TrackRow]
    detections_per_window: list[tuple[int, list[Detection]]] = field(default_factory=list)


def detect_from_map(
    m: StateMap, den_cfg: DenoiserConfig, trk_cfg: TrackerConfig
) -> list[Detection]:
    """Denoised centroid extraction from the current map.

    Fuses the classical denoiser's area filter with blob detection in one
    component-labelling pass; equivalent to detect_centroids(denoise(img))
    because removing sub-threshold components cannot change the surviving
    components' pixels.  Falls back to the staged path for an external
    denoiser backend.
    """
    img = snapshot(m)
    if den_cfg.backend != "classical":
        return detect_centroids(denoise(img, den_cfg), trk_cfg)
    closed = close_image(img, den_cfg.closing_radius)
    min_area = max(den_cfg.min_component_area, trk_cfg.min_blob_area)
    return detect_centroids(
        closed, replace(trk_cfg, min_blob_area=min_area)
    )


def run_calibration(
    events: EventArray,
    m: StateMap,
    trk_cfg: TrackerConfig,
    den_cfg: DenoiserConfig | None = None,
    window_us: int = DEFAULT_WINDOW_US,
) -> list[MarkerTrack]:
    """Feed a bootstrap stream through the map and harvest equilibrium
    epochs for reference calibration.

    The stream is expected to contain full-amplitude motions separated by
    settling pauses.  Window counts near the stream's busiest level mark
    commanded motion; once a settling delay has passed after the last such
    window the markers are at equilibrium (only residual-decay events
    trickle in) and one detection epoch is captured, plus a final epoch at
    stream end if the last stretch was never harvested.
    """
    den_cfg = den_cfg or DenoiserConfig()
    windows = window_stream(events, window_us)
    if not windows:
        raise CalibrationError("calibration stream is empty")
    counts = np.array([w.count for w in windows])
    strong = max(STRONG_FLOOR, STRONG_FRACTION * float(np.percentile(counts, 99)))

    epochs: list[list[Detection]] = []
    since_strong = 0
    captured = False
    for w in windows:
        apply_batch(m, w.events)
        if w.count > strong:
            since_strong = 0
            captured = False
        else:
            since_strong += 1
            if since_strong >= SETTLE_DELAY_WINDOWS and not captured:
                epochs.append(detect_from_map(m, den_cfg, trk_cfg))
                captured = True
    if not captured:
        epochs.append(detect_from_map(m, den_cfg, trk_cfg))
    return calibrate(epochs, trk_cfg)


def run_tracking(
    events: EventArray,
    m: StateMap,
    tracks: list[MarkerTrack],
    trk_cfg: TrackerConfig,
    den_cfg: DenoiserConfig | None = None,
    window_us: int = DEFAULT_WINDOW_US,
    record_detections: bool = False,
    record_history: bool = True,
) -> TrackingRun:
    """Per-window tracking loop over a task stream.

    Each window updates the map, denoises a snapshot, extracts centroids,
    associates them to tracks, and applies the damped update.  The history
    carries one row per track per window.
    """
    den_cfg = den_cfg or DenoiserConfig()
    run = TrackingRun(tracks=tracks, history=[])
    for w in window_stream(events, window_us):
        apply_batch(m, w.events)
        dets = detect_from_map(m, den_cfg, trk_cfg)
        t = w.t0 + w.duration
        update_tracks(dets, tracks, trk_cfg, t)
        if record_detections:
            run.detections_per_window.append((t, dets))
        if record_history:
            for trk in tracks:
                run.history.append(
                    TrackRow(
                        t_us=t,
                        marker_id=trk.id,
                        det_x=float(trk.p_det[0]),
                        det_y=float(trk.p_det[1]),
                        real_x=float(trk.p_real[0]),
                        real_y=float(trk.p_real[1]),
                        held=trk.held,
                    )
                )
    return run


def replay_tracking(
    detections_per_window: list[tuple[int, list[Detection]]],
    calibrated: list[MarkerTrack],
    trk_cfg: TrackerConfig,
) -> list[MarkerTrack]:
    """Re-run association and the damped update over recorded detections.

    Detection does not depend on the tracker settings, so a recorded run can
    be replayed under a different gain configuration without regenerating
    events (used for the damping-on/off comparison).
    """
    tracks = [
        MarkerTrack(
            id=trk.id,
            p_init=trk.p_init.copy(),
            p_det=trk.p_init.copy(),
            p_det_prev=trk.p_init.copy(),
            p_real=trk.p_init.copy(),
            bbox=trk.bbox.copy(),
        )
        for trk in calibrated
    ]
    for t, dets in detections_per_window:
        update_tracks(dets, tracks, trk_cfg, t)
    return tracks
