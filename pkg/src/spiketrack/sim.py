"""Deterministic world model for the synthetic sensor.

Three worlds live here:

* SimScene: an 8x8 grid of white disk markers on a black elastomer skin,
  driven by a commanded displacement field (press, slide, torsion, circular,
  drag-and-release).  Marker motion lags the command through a first-order
  viscoelastic relaxation, and a quick unload makes the skin rebound past
  its rest position before the stored strain bleeds off slowly.  That
  rebound residual is exactly the near-equilibrium offset the tracker's
  damped update has to absorb.

* ApproachScenario: a probe driven at constant velocity into a rigid
  obstacle.  Pre-contact the sensor sees only background noise; contact
  produces an event burst proportional to how fast the probe keeps
  penetrating, plus a marker displacement field for frame-based baselines.

* HoleWorld: plates with circular holes and a contact rule for a probing
  pin: the collision signal fires once the pin has travelled a fixed
  critical displacement past initial wall contact.

Scenes are immutable after construction; rendering and ground-truth queries
are pure functions and parallel-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .events import EventArray, NoiseModel, disk_coverage

DEFAULT_RESOLUTION = 320
DEFAULT_MARKER_RADIUS = 6.0
DEFAULT_GRID_PITCH = 36.0
RENDER_STEP_US = 100

INTERACTION_KINDS = ("press", "slide", "torsion", "circular", "drag_release")


@dataclass(frozen=True)
class HysteresisModel:
    """First-order lag plus a slowly decaying rebound residual.

    tau_ms governs how fast markers chase the commanded field.  On unload
    the skin overshoots: immediately afterwards each marker sits at
    residual_fraction of its peak displacement on the far side of rest, and
    that offset decays with residual_decay_ms.
    """

    tau_ms: float = 15.0
    residual_fraction: float = 0.2
    residual_decay_ms: float = 500.0

    def __post_init__(self):
        if self.tau_ms <= 0 or self.residual_decay_ms <= 0:
            raise ParameterError("hysteresis time constants must be positive")
        if not (0.0 <= self.residual_fraction < 1.0):
            raise ParameterError("residual_fraction must be in [0, 1)")


@dataclass(frozen=True)
class SimScene:
    """Markers on a time grid.  positions[k] are the true (lagged) centres
    at t0_us + k * step_us."""

    width: int
    height: int
    marker_radius: float
    step_us: int
    t0_us: int
    rest: np.ndarray          # (n, 2) rest centres
    positions: np.ndarray     # (n_steps + 1, n, 2) true centres
    kind: str = "static"
    invert: bool = False

    @property
    def n_markers(self) -> int:
        return self.rest.shape[0]

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def t_end_us(self) -> int:
        return self.t0_us + self.n_steps * self.step_us

    def positions_grid(self) -> np.ndarray:
        return self.positions

    def shifted(self, t0_us: int) -> "SimScene":
        return replace(self, t0_us=t0_us)


def grid_rest_positions(
    rows: int = 8,
    cols: int = 8,
    pitch: float = DEFAULT_GRID_PITCH,
    width: int = DEFAULT_RESOLUTION,
    height: int = DEFAULT_RESOLUTION,
) -> np.ndarray:
    """Marker rest centres: a uniform grid centred on the sensor."""
    x0 = (width - (cols - 1) * pitch) / 2.0
    y0 = (height - (rows - 1) * pitch) / 2.0
    pts = [(x0 + c * pitch, y0 + r * pitch) for r in range(rows) for c in range(cols)]
    return np.array(pts, dtype=np.float64)


def render_latent(scene: SimScene, t_us: int) -> np.ndarray:
    """Latent intensity image in [0, 1] at time t (pure function of the
    ground-truth positions)."""
    pos = ground_truth_positions(scene, t_us)
    img = np.zeros((scene.height, scene.width), dtype=np.float64)
    r = scene.marker_radius
    hw = int(math.ceil(r + 1.0))
    for cx, cy in pos:
        ix, iy = int(round(cx)), int(round(cy))
        x_lo, x_hi = max(0, ix - hw), min(scene.width, ix + hw + 1)
        y_lo, y_hi = max(0, iy - hw), min(scene.height, iy + hw + 1)
        xs, ys = np.meshgrid(np.arange(x_lo, x_hi), np.arange(y_lo, y_hi))
        patch = disk_coverage(cx, cy, xs, ys, r)
        np.maximum(img[y_lo:y_hi, x_lo:x_hi], patch, out=img[y_lo:y_hi, x_lo:x_hi])
    if scene.invert:
        img = 1.0 - img
    return img


def render_binary(scene: SimScene, t_us: int) -> np.ndarray:
    """Binary marker silhouette at time t (coverage >= one half)."""
    return (render_latent(scene, t_us) >= 0.5).astype(np.uint8)


def ground_truth_positions(scene: SimScene, t_us: int) -> np.ndarray:
    """Exact marker centres at time t, including hysteresis lag."""
    if not (scene.t0_us <= t_us <= scene.t_end_us):
        raise ParameterError(
            f"t={t_us} outside scene span [{scene.t0_us}, {scene.t_end_us}]"
        )
    s = (t_us - scene.t0_us) / scene.step_us
    k = int(min(math.floor(s), scene.n_steps - 1)) if scene.n_steps else 0
    frac = s - k
    if scene.n_steps == 0:
        return scene.positions[0].copy()
    return (1 - frac) * scene.positions[k] + frac * scene.positions[k + 1]


# ---------------------------------------------------------------------------
# Displacement-field construction
# ---------------------------------------------------------------------------


def _trapezoid(times_ms, start, ramp, hold, release) -> np.ndarray:
    """Piecewise-linear 0->1->0 envelope (C0)."""
    t = np.asarray(times_ms, dtype=np.float64)
    up = np.clip((t - start) / max(ramp, 1e-9), 0.0, 1.0)
    down = np.clip((t - (start + ramp + hold)) / max(release, 1e-9), 0.0, 1.0)
    return up - down


def _first_order_lag(u: np.ndarray, step_ms: float, tau_ms: float) -> np.ndarray:
    """Exact discrete relaxation of x' = (u - x)/tau on the render grid:
    x[k] = x[k-1] + alpha (u[k] - x[k-1]), starting from rest (u[0] must
    be zero)."""
    from scipy.signal import lfilter

    alpha = 1.0 - math.exp(-step_ms / tau_ms)
    shape = u.shape
    flat = u.reshape(shape[0], -1)
    out = lfilter([alpha], [1.0, -(1.0 - alpha)], flat, axis=0)
    return out.reshape(shape)


@dataclass
class _Segment:
    """One commanded motion: a per-marker field scaled by an envelope, plus
    the rebound term injected when this segment unloads."""

    field: np.ndarray       # (n, 2) or (T, n, 2)
    envelope: np.ndarray    # (T,)
    unload_ms: float | None


def _segment_command(seg: _Segment, times_ms: np.ndarray, hyst: HysteresisModel) -> np.ndarray:
    if seg.field.ndim == 2:
        u = seg.envelope[:, None, None] * seg.field[None, :, :]
    else:
        u = seg.envelope[:, None, None] * seg.field
    if seg.unload_ms is not None and hyst.residual_fraction > 0:
        peak_idx = np.argmax(np.linalg.norm(u, axis=2), axis=0)  # per marker
        n = u.shape[1]
        peak_vec = u[peak_idx, np.arange(n)]
        after = times_ms >= seg.unload_ms
        decay = np.exp(-(times_ms[after] - seg.unload_ms) / hyst.residual_decay_ms)
        rebound = -hyst.residual_fraction * decay[:, None, None] * peak_vec[None, :, :]
        u[after] += rebound
    return u


def _build_scene(
    segments: list[_Segment],
    duration_ms: float,
    *,
    kind: str,
    rest: np.ndarray,
    hysteresis: HysteresisModel,
    width: int,
    height: int,
    marker_radius: float,
    step_us: int,
    t0_us: int,
    max_amplitude: float,
    pitch: float,
) -> SimScene:
    if max_amplitude >= pitch / 2.0:
        raise ParameterError(
            f"peak displacement {max_amplitude:.1f} px exceeds half the grid "
            f"pitch ({pitch / 2.0:.1f} px)"
        )
    step_ms = step_us / 1000.0
    n_steps = int(round(duration_ms / step_ms))
    times_ms = np.arange(n_steps + 1) * step_ms
    n = rest.shape[0]
    u = np.zeros((n_steps + 1, n, 2), dtype=np.float64)
    for seg in segments:
        u += _segment_command(seg, times_ms, hysteresis)
    x = _first_order_lag(u, step_ms, hysteresis.tau_ms)
    positions = rest[None, :, :] + x
    return SimScene(
        width=width,
        height=height,
        marker_radius=marker_radius,
        step_us=step_us,
        t0_us=t0_us,
        rest=rest,
        positions=positions,
        kind=kind,
    )


def make_interaction(
    kind: str,
    *,
    amplitude_px: float = 10.0,
    direction: tuple[float, float] = (1.0, 0.0),
    period_ms: float = 250.0,
    angle_rad: float = 0.06,
    clockwise: bool = False,
    hold_ms: float = 120.0,
    release_ms: float = 60.0,
    settle_ms: float = 420.0,
    hysteresis: HysteresisModel | None = None,
    seed: int = 0,
    rows: int = 8,
    cols: int = 8,
    pitch: float = DEFAULT_GRID_PITCH,
    width: int = DEFAULT_RESOLUTION,
    height: int = DEFAULT_RESOLUTION,
    marker_radius: float = DEFAULT_MARKER_RADIUS,
    step_us: int = RENDER_STEP_US,
    t0_us: int = 0,
    press_sigma_px: float = 80.0,
) -> SimScene:
    """Build one contact interaction as a scene with ground truth.

    The commanded field ramps up over period_ms, holds, releases, and
    settles; drag_release uses a deliberately fast release.  All kinds begin
    and end with a zero commanded field.
    """
    if kind not in INTERACTION_KINDS:
        raise ParameterError(f"unknown interaction kind {kind!r}")
    hyst = hysteresis or HysteresisModel()
    rest = grid_rest_positions(rows, cols, pitch, width, height)
    n = rest.shape[0]
    center = rest.mean(axis=0)
    rel = rest - center

    ramp = period_ms
    release = 50.0 if kind == "drag_release" else release_ms
    unload = ramp + hold_ms + release
    duration = unload + settle_ms
    step_ms = step_us / 1000.0
    times_ms = np.arange(int(round(duration / step_ms)) + 1) * step_ms
    env = _trapezoid(times_ms, 0.0, ramp, hold_ms, release)

    if kind in ("slide", "drag_release"):
        d = np.asarray(direction, dtype=np.float64)
        d = d / np.linalg.norm(d)
        fld = np.tile(amplitude_px * d, (n, 1))
        max_amp = amplitude_px
    elif kind == "press":
        r = np.linalg.norm(rel, axis=1)
        gain = amplitude_px * np.exp(-(r**2) / (2 * press_sigma_px**2))
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[:, None] > 0, rel / np.maximum(r, 1e-12)[:, None], 0.0)
        fld = gain[:, None] * unit
        max_amp = amplitude_px
    elif kind == "torsion":
        c, s = math.cos(angle_rad), math.sin(angle_rad)
        rot = np.array([[c, -s], [s, c]])
        fld = rel @ rot.T - rel
        max_amp = float(np.max(np.linalg.norm(fld, axis=1)))
    else:  # circular: every marker orbits a small loop, two turns
        cycles = 2
        omega = 2 * math.pi * cycles / max(ramp + hold_ms + release, 1e-9)
        phase = omega * times_ms * (-1.0 if clockwise else 1.0)
        orbit = np.stack([np.cos(phase) - 1.0, np.sin(phase)], axis=1)  # (T, 2)
        fld = amplitude_px * 0.5 * orbit[:, None, :] * np.ones((1, n, 1))
        max_amp = amplitude_px
    seg = _Segment(field=fld, envelope=env, unload_ms=unload)
    return _build_scene(
        [seg],
        duration,
        kind=kind,
        rest=rest,
        hysteresis=hyst,
        width=width,
        height=height,
        marker_radius=marker_radius,
        step_us=step_us,
        t0_us=t0_us,
        max_amplitude=max_amp,
        pitch=pitch,
    )


def make_calibration_scene(
    *,
    amplitude_px: float = 13.0,
    ramp_ms: float = 200.0,
    hold_ms: float = 80.0,
    back_ms: float = 110.0,
    settle_ms: float = 430.0,
    final_settle_ms: float = 700.0,
    hysteresis: HysteresisModel | None = None,
    rows: int = 8,
    cols: int = 8,
    pitch: float = DEFAULT_GRID_PITCH,
    width: int = DEFAULT_RESOLUTION,
    height: int = DEFAULT_RESOLUTION,
    marker_radius: float = DEFAULT_MARKER_RADIUS,
    step_us: int = RENDER_STEP_US,
    t0_us: int = 0,
) -> SimScene:
    """Bootstrap sequence: four full-amplitude slides (+x, -x, +y, -y) with
    settling pauses.  The first slide exceeds one marker diameter so the
    event-driven reconstruction can paint every marker; the opposed
    directions leave symmetric residuals for the reference calibration to
    cancel."""
    hyst = hysteresis or HysteresisModel()
    rest = grid_rest_positions(rows, cols, pitch, width, height)
    n = rest.shape[0]
    phase_ms = ramp_ms + hold_ms + back_ms + settle_ms
    duration = 4 * phase_ms + final_settle_ms
    step_ms = step_us / 1000.0
    times_ms = np.arange(int(round(duration / step_ms)) + 1) * step_ms

    dirs = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    segments = []
    for i, d in enumerate(dirs):
        start = i * phase_ms
        env = _trapezoid(times_ms, start, ramp_ms, hold_ms, back_ms)
        fld = np.tile(amplitude_px * np.asarray(d), (n, 1))
        segments.append(
            _Segment(field=fld, envelope=env, unload_ms=start + ramp_ms + hold_ms + back_ms)
        )
    return _build_scene(
        segments,
        duration,
        kind="calibration",
        rest=rest,
        hysteresis=hyst,
        width=width,
        height=height,
        marker_radius=marker_radius,
        step_us=step_us,
        t0_us=t0_us,
        max_amplitude=amplitude_px,
        pitch=pitch,
    )


def make_translation_scene(
    *,
    radius_px: float = 8.0,
    start: tuple[float, float] = (40.0, 64.0),
    displacement: tuple[float, float] = (16.0, 0.0),
    duration_ms: float = 40.0,
    width: int = 128,
    height: int = 128,
    step_us: int = RENDER_STEP_US,
    t0_us: int = 0,
    invert: bool = False,
) -> SimScene:
    """Single disk in steady translation; the canonical reconstruction test
    scene (translating by one diameter repaints the full silhouette)."""
    step_ms = step_us / 1000.0
    n_steps = int(round(duration_ms / step_ms))
    frac = np.linspace(0.0, 1.0, n_steps + 1)
    rest = np.array([start], dtype=np.float64)
    disp = np.asarray(displacement, dtype=np.float64)
    positions = rest[None, :, :] + frac[:, None, None] * disp[None, None, :]
    return SimScene(
        width=width,
        height=height,
        marker_radius=radius_px,
        step_us=step_us,
        t0_us=t0_us,
        rest=rest,
        positions=positions,
        kind="translation",
        invert=invert,
    )


def make_static_scene(
    *,
    positions: np.ndarray | None = None,
    duration_ms: float = 10.0,
    width: int = 128,
    height: int = 128,
    marker_radius: float = 6.0,
    step_us: int = RENDER_STEP_US,
    t0_us: int = 0,
) -> SimScene:
    """Markers that never move; generates no signal events."""
    if positions is None:
        positions = np.array([[width / 2.0, height / 2.0]])
    rest = np.asarray(positions, dtype=np.float64)
    n_steps = int(round(duration_ms / (step_us / 1000.0)))
    pos = np.repeat(rest[None, :, :], n_steps + 1, axis=0)
    return SimScene(
        width=width,
        height=height,
        marker_radius=marker_radius,
        step_us=step_us,
        t0_us=t0_us,
        rest=rest,
        positions=pos,
        kind="static",
    )


# ---------------------------------------------------------------------------
# Approach-and-impact scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproachScenario:
    """Probe approaching a rigid obstacle along one axis at constant speed.

    Units: poses in mm along the approach axis, velocity in m/s (which is
    numerically mm/ms).  The sensor sees pure background noise until contact
    and an event burst of burst_per_mm events per millimetre of penetration
    afterwards, spread over a circular contact patch.
    """

    v_mps: float
    x_real_mm: float = 50.0
    approach_mm: float = 2.0
    t_move_start_us: int = 250_000
    post_contact_ms: float = 100.0
    burst_per_mm: float = 5000.0
    contact_patch_radius_px: float = 30.0
    marker_gain_px_per_mm: float = 5.0
    frame_jitter_px: float = 0.05
    start_jitter_mm: float = 0.0
    width: int = DEFAULT_RESOLUTION
    height: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.v_mps < 0:
            raise ParameterError("approach velocity must be non-negative")
        if self.burst_per_mm <= 0:
            raise ParameterError("burst rate must be positive")

    @property
    def t_contact_us(self) -> int | None:
        if self.v_mps == 0:
            return None
        travel_ms = self.approach_mm / self.v_mps  # v in mm/ms
        return int(round(self.t_move_start_us + travel_ms * 1000.0))

    @property
    def t_end_us(self) -> int:
        base = self.t_contact_us
        if base is None:
            base = self.t_move_start_us + 500_000
        return int(base + self.post_contact_ms * 1000.0)

    def probe_position_mm(self, t_us: float) -> float:
        """Probe pose along the approach axis, ignoring any braking."""
        x0 = self.x_real_mm - self.approach_mm
        if t_us <= self.t_move_start_us:
            return x0
        return x0 + self.v_mps * (t_us - self.t_move_start_us) / 1000.0

    def penetration_mm(self, t_us: float) -> float:
        return max(0.0, self.probe_position_mm(t_us) - self.x_real_mm)


@dataclass(frozen=True)
class RobotReaction:
    """Braking model after the stop command: a fixed command latency, then
    constant deceleration."""

    command_latency_ms: float = 8.0
    deceleration_m_s2: float = 2.0

    def __post_init__(self):
        if self.command_latency_ms <= 0 or self.deceleration_m_s2 <= 0:
            raise ParameterError("reaction parameters must be positive")

    def overshoot_mm(self, v_mps: float) -> float:
        # v [mm/ms] * latency [ms] + v^2 / (2 a), with a in mm/ms^2
        a = self.deceleration_m_s2 * 1e-3
        return v_mps * self.command_latency_ms + v_mps**2 / (2 * a)


def make_approach_stream(
    scn: ApproachScenario, noise: NoiseModel
) -> tuple[EventArray, int | None]:
    """Event stream for one approach trial plus the true contact time.

    Noise covers the whole span; after contact, burst events arrive at a
    rate proportional to the penetration rate, uniformly over the contact
    patch with random polarity.  Deterministic per noise seed.
    """
    from .events import _noise_events  # stream assembly shares the noise path

    t_end = scn.t_end_us
    bg = _noise_events(noise, scn.width, scn.height, 0, t_end)
    t_c = scn.t_contact_us
    if t_c is None or t_c >= t_end:
        return bg, None
    rng = np.random.default_rng(np.random.SeedSequence([noise.seed, 0xB0]))
    pen_total = scn.v_mps * (t_end - t_c) / 1000.0
    n_burst = int(rng.poisson(scn.burst_per_mm * pen_total))
    if n_burst:
        t = np.sort(rng.integers(t_c, t_end, size=n_burst, dtype=np.int64))
        rr = scn.contact_patch_radius_px * np.sqrt(rng.random(n_burst))
        th = rng.random(n_burst) * 2 * math.pi
        cx, cy = scn.width / 2.0, scn.height / 2.0
        x = np.clip(np.round(cx + rr * np.cos(th)), 0, scn.width - 1).astype(np.int32)
        y = np.clip(np.round(cy + rr * np.sin(th)), 0, scn.height - 1).astype(np.int32)
        p = rng.choice(np.array([-1, 1], dtype=np.int8), size=n_burst)
        burst = EventArray(x, y, p, t)
    else:
        burst = EventArray.empty()
    merged = EventArray.concatenate([bg, burst]).sorted_by_time()
    return merged, t_c


def approach_marker_frames(
    scn: ApproachScenario, frame_rate_hz: float, seed: int = 0
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Frame-sampled marker positions for the frame-based baseline.

    Markers displace along a fixed direction in proportion to penetration,
    with small per-frame detection jitter.  The exposure phase relative to
    the motion is uniformly random per seed, as for a free-running camera.
    Returns (frame times in us, list of (n, 2) position arrays)."""
    if frame_rate_hz <= 0:
        raise ParameterError("frame rate must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF0]))
    rest = grid_rest_positions(width=scn.width, height=scn.height)
    period_us = 1e6 / frame_rate_hz
    phase = rng.uniform(0.0, period_us)
    times = np.arange(phase, scn.t_end_us, period_us)
    frames = []
    direction = np.array([0.0, 1.0])
    for t in times:
        pen = scn.penetration_mm(t)
        jitter = rng.normal(0.0, scn.frame_jitter_px, size=rest.shape)
        frames.append(rest + scn.marker_gain_px_per_mm * pen * direction + jitter)
    return times.astype(np.int64), frames


# ---------------------------------------------------------------------------
# Hole world
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hole:
    x_mm: float
    y_mm: float
    r_mm: float


@dataclass(frozen=True)
class HoleWorld:
    """Circular holes in a plate parallel to the probing plane.

    The collision signal for a probing pin fires once the pin axis has
    travelled delta_crit past the point where the pin edge first meets the
    hole wall; recorded contact coordinates optionally carry Gaussian noise
    along the motion axis.
    """

    holes: tuple[Hole, ...]
    noise_sigma_mm: float = 0.0

    def __post_init__(self):
        for h in self.holes:
            if not (0.7 <= h.r_mm <= 5.0):
                raise ParameterError(
                    f"hole radius {h.r_mm} mm outside the supported 0.7-5.0 mm range"
                )
        for i, a in enumerate(self.holes):
            for b in self.holes[i + 1 :]:
                if math.hypot(a.x_mm - b.x_mm, a.y_mm - b.y_mm) <= a.r_mm + b.r_mm:
                    raise ParameterError("holes must not overlap")

    def find_hole(self, x_mm: float, y_mm: float) -> Hole | None:
        for h in self.holes:
            if math.hypot(x_mm - h.x_mm, y_mm - h.y_mm) < h.r_mm:
                return h
        return None

    @staticmethod
    def wall_contact_travel(
        hole: Hole, p0: np.ndarray, direction: np.ndarray, probe_radius_mm: float
    ) -> float:
        """Travel along `direction` from p0 until the probe edge meets the
        wall, i.e. until the probe axis is (hole radius - probe radius) from
        the hole centre."""
        reach = hole.r_mm - probe_radius_mm
        if reach <= 0:
            raise ParameterError("probe does not fit inside the hole")
        rel = p0 - np.array([hole.x_mm, hole.y_mm])
        b = float(np.dot(rel, direction))
        c = float(np.dot(rel, rel)) - reach * reach
        disc = b * b - c
        if disc < 0 or c > 0:
            raise ParameterError("probe start is not inside the reachable area")
        return -b + math.sqrt(disc)


def make_hole_bench(n: int = 10, noise_sigma_mm: float = 0.0) -> HoleWorld:
    """A row of holes with radii spanning the supported range."""
    radii = np.linspace(0.7, 5.0, n)
    xs = np.cumsum(2 * radii + 6.0) - radii - 3.0
    holes = tuple(Hole(float(x), 0.0, float(r)) for x, r in zip(xs, radii))
    return HoleWorld(holes=holes, noise_sigma_mm=noise_sigma_mm)
