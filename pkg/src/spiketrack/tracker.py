"""Marker centroid extraction, association, calibration, and the
hysteresis-aware incremental update that keeps the displacement field
anchored to its mechanical neutral point.

The elastomer never springs back perfectly: after unloading, detected
centroids sit a couple of pixels off their rest positions and creep back
slowly.  The tracker absorbs this by damping position increments whenever a
marker is inside an uncertainty window of radius `delta` around its
calibrated reference: increments there are scaled by `gamma` < 1, while
far-field motion passes through unchanged.

The track set is a single sequential state machine; detection itself is a
pure function and may run ahead in a pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import cv2
import numpy as np
from scipy.spatial import cKDTree

from .errors import AssociationError, CalibrationError, ParameterError


@dataclass(frozen=True)
class TrackerConfig:
    delta: float = 4.0          # uncertainty window radius, px
    gamma: float = 0.7          # damping gain inside the window
    assoc_radius: float = 8.0   # nearest-neighbour association radius, px
    expected_markers: int = 64
    min_blob_area: int = 12
    success_radius: float = 5.0

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ParameterError("gamma must be in (0, 1]")
        if self.delta <= 0 or self.assoc_radius <= 0 or self.success_radius <= 0:
            raise ParameterError("delta, assoc_radius, success_radius must be positive")
        if self.expected_markers < 1 or self.min_blob_area < 1:
            raise ParameterError("expected_markers and min_blob_area must be >= 1")


@dataclass(frozen=True)
class Detection:
    """Sub-pixel centroid of one white component."""

    x: float
    y: float
    area: int


@dataclass
class MarkerTrack:
    id: int
    p_init: np.ndarray      # calibrated reference (2,)
    p_det: np.ndarray       # current detection
    p_det_prev: np.ndarray  # previous detection
    p_real: np.ndarray      # damped estimate
    bbox: np.ndarray        # (x_min, y_min, x_max, y_max)
    last_seen_t: int = 0
    held: bool = False

    def fold_observation(self, x: float, y: float) -> None:
        self.bbox[0] = min(self.bbox[0], x)
        self.bbox[1] = min(self.bbox[1], y)
        self.bbox[2] = max(self.bbox[2], x)
        self.bbox[3] = max(self.bbox[3], y)

    @property
    def bbox_center(self) -> np.ndarray:
        return np.array(
            [(self.bbox[0] + self.bbox[2]) / 2.0, (self.bbox[1] + self.bbox[3]) / 2.0]
        )


@dataclass(frozen=True)
class TrackingReport:
    success: bool
    per_marker_error: list[float]
    mean_error: float
    std_error: float


def detect_centroids(image: np.ndarray, cfg: TrackerConfig) -> list[Detection]:
    """One centroid per 8-connected white component with enough area.

    The centroid is the arithmetic mean of member pixel coordinates; the
    list is ordered by (y, x) for determinism.
    """
    img = (np.asarray(image) > 0).astype(np.uint8)
    n, _, stats, cents = cv2.connectedComponentsWithStats(img, connectivity=8)
    if n <= 1:
        return []
    areas = stats[1:, cv2.CC_STAT_AREA]
    keep = np.nonzero(areas >= cfg.min_blob_area)[0]
    out = [
        Detection(x=float(cents[i + 1, 0]), y=float(cents[i + 1, 1]), area=int(areas[i]))
        for i in keep
    ]
    out.sort(key=lambda d: (d.y, d.x))
    return out


def _candidate_pairs(
    anchors: np.ndarray, det_xy: np.ndarray, radius: float
) -> list[tuple[float, int, float, float, int]]:
    """All (anchor, detection) pairs within the association radius.

    Small problems use a dense distance matrix; larger ones a k-d tree.
    Both enumerate exactly the same pairs, so matching results agree.
    """
    pairs = []
    if len(anchors) * len(det_xy) <= 16384:
        d = np.linalg.norm(anchors[:, None, :] - det_xy[None, :, :], axis=2)
        for ti, di in zip(*np.where(d <= radius)):
            pairs.append(
                (float(d[ti, di]), int(ti), float(det_xy[di, 1]), float(det_xy[di, 0]), int(di))
            )
    else:
        tree = cKDTree(det_xy)
        for ti, det_ids in enumerate(tree.query_ball_point(anchors, r=radius)):
            for di in det_ids:
                dist = float(np.hypot(*(det_xy[di] - anchors[ti])))
                pairs.append((dist, ti, float(det_xy[di, 1]), float(det_xy[di, 0]), int(di)))
    return pairs


def _greedy_match(
    pairs: list[tuple[float, int, float, float, int]], n_tracks: int, n_dets: int
) -> dict[int, int]:
    """Greedy one-to-one matching over candidate (distance, track, det) pairs.

    Sorted by ascending distance with ties broken by lower track id, then by
    detection coordinates, so the result does not depend on detection order.
    """
    pairs.sort()
    track_used = [False] * n_tracks
    det_used = [False] * n_dets
    match: dict[int, int] = {}
    for _, ti, _, _, di in pairs:
        if not track_used[ti] and not det_used[di]:
            track_used[ti] = True
            det_used[di] = True
            match[ti] = di
    return match


def associate(
    detections: Sequence[Detection],
    tracks: list[MarkerTrack],
    cfg: TrackerConfig,
    t: int,
) -> list[MarkerTrack]:
    """Match detections to tracks by nearest neighbour within assoc_radius.

    Matching is one-to-one, greedy by ascending distance against each
    track's previous detection.  Unmatched tracks keep their last confirmed
    position (zero-order hold); unmatched detections are discarded.
    """
    prev = np.array([trk.p_det for trk in tracks]) if tracks else np.empty((0, 2))
    match: dict[int, int] = {}
    if len(detections) and len(tracks):
        det_xy = np.array([[d.x, d.y] for d in detections])
        pairs = _candidate_pairs(prev, det_xy, cfg.assoc_radius)
        match = _greedy_match(pairs, len(tracks), len(detections))

    for ti, trk in enumerate(tracks):
        di = match.get(ti)
        if di is None:
            trk.held = True
            trk.p_det_prev = trk.p_det.copy()
        else:
            new = np.array([detections[di].x, detections[di].y])
            # after a hold, restart increments from the fresh detection so
            # resumption does not inject a spurious jump
            trk.p_det_prev = new.copy() if trk.held else trk.p_det.copy()
            trk.p_det = new
            trk.held = False
            trk.last_seen_t = t
    return tracks


def hysteresis_update(track: MarkerTrack, cfg: TrackerConfig) -> np.ndarray:
    """Advance the damped estimate by the current detection increment.

    The increment (current minus previous detection) passes through at unit
    gain while the detection sits at least `delta` away from the reference,
    and is scaled by `gamma` inside that window.  Held tracks have a zero
    increment and leave the estimate untouched.
    """
    dx, dy = float(track.p_det[0]), float(track.p_det[1])
    ax = dx - float(track.p_init[0])
    ay = dy - float(track.p_init[1])
    bx = dx - float(track.p_det_prev[0])
    by = dy - float(track.p_det_prev[1])
    gain = 1.0 if math.hypot(ax, ay) >= cfg.delta else cfg.gamma
    track.p_real = np.array(
        [float(track.p_real[0]) + gain * bx, float(track.p_real[1]) + gain * by]
    )
    return track.p_real


def update_tracks(
    detections: Sequence[Detection],
    tracks: list[MarkerTrack],
    cfg: TrackerConfig,
    t: int,
) -> list[MarkerTrack]:
    """Associate one detection batch, then apply the damped update to every
    track.  One call per reconstruction window."""
    associate(detections, tracks, cfg, t)
    for trk in tracks:
        hysteresis_update(trk, cfg)
    return tracks


def calibrate(
    equilibrium_detections: Sequence[Sequence[Detection]], cfg: TrackerConfig
) -> list[MarkerTrack]:
    """Build reference positions from detections taken at rest.

    Across calibration epochs each marker accumulates a bounding box over
    its observed equilibrium positions; the reference is the box centre,
    which cancels symmetric residual offsets left by opposite sliding
    directions.  The first epoch must contain exactly the expected marker
    count; later epochs are matched by nearest neighbour.
    """
    if not equilibrium_detections:
        raise CalibrationError("at least one calibration epoch is required")
    first = list(equilibrium_detections[0])
    if len(first) != cfg.expected_markers:
        raise CalibrationError(
            f"first calibration epoch has {len(first)} markers, "
            f"expected {cfg.expected_markers}"
        )
    tracks = []
    for i, det in enumerate(first):
        p = np.array([det.x, det.y])
        tracks.append(
            MarkerTrack(
                id=i,
                p_init=p.copy(),
                p_det=p.copy(),
                p_det_prev=p.copy(),
                p_real=p.copy(),
                bbox=np.array([det.x, det.y, det.x, det.y], dtype=np.float64),
            )
        )

    for e, epoch in enumerate(equilibrium_detections[1:], start=1):
        epoch = list(epoch)
        if not epoch:
            continue
        centers = np.array([trk.bbox_center for trk in tracks])
        det_xy = np.array([[d.x, d.y] for d in epoch])
        pairs = _candidate_pairs(centers, det_xy, cfg.assoc_radius)
        match = _greedy_match(pairs, len(tracks), len(epoch))
        matched_dets = set(match.values())
        for di in range(len(epoch)):
            if di not in matched_dets:
                raise AssociationError(
                    f"calibration epoch {e}: detection at "
                    f"({epoch[di].x:.2f}, {epoch[di].y:.2f}) matches no marker "
                    f"within {cfg.assoc_radius} px"
                )
        for ti, di in match.items():
            tracks[ti].fold_observation(epoch[di].x, epoch[di].y)

    for trk in tracks:
        trk.p_init = trk.bbox_center
        trk.p_det = trk.p_init.copy()
        trk.p_det_prev = trk.p_init.copy()
        trk.p_real = trk.p_init.copy()
        trk.held = False
    return tracks


def evaluate_tracking(tracks: Sequence[MarkerTrack], cfg: TrackerConfig) -> TrackingReport:
    """Final-state deviation metrics: per-marker distance of the damped
    estimate from its reference, with success meaning every marker returned
    to within success_radius."""
    errors = [float(np.hypot(*(trk.p_real - trk.p_init))) for trk in tracks]
    arr = np.array(errors) if errors else np.zeros(0)
    mean = float(arr.mean()) if len(arr) else 0.0
    std = float(arr.std()) if len(arr) else 0.0  # population std
    success = bool(all(e < cfg.success_radius for e in errors))
    return TrackingReport(
        success=success, per_marker_error=errors, mean_error=mean, std_error=std
    )
