"""Reusable experiment protocols: the return-to-origin tracking suite, the
collision-detection velocity sweep, and the hole-estimation benchmark.

These drive the library end to end against the simulator's ground truth and
are shared by the experiment scripts and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .collision import BaselineConfig, CollisionConfig, CollisionReport, run_collision_trial
from .events import NoiseModel, generate_events
from .geometry import HoleEvaluation, ProbeSpec, cross_search, evaluate_holes
from .pipeline import replay_tracking, run_calibration, run_tracking
from .sim import (
    ApproachScenario,
    HoleWorld,
    RobotReaction,
    make_calibration_scene,
    make_hole_bench,
    make_interaction,
)
from .statemap import new_state_map
from .tracker import MarkerTrack, TrackerConfig, TrackingReport, evaluate_tracking

TRACKING_NOISE_RATE = 0.01  # events/px/s; keeps the persistent map sparse
COLLISION_NOISE_RATE = 0.05

# the ten-interaction stability suite: one press, two slides, two torsions,
# two circular rubs, three drag-and-release motions
TRACKING_SUITE = [
    ("press", dict(amplitude_px=10.0)),
    ("slide", dict(amplitude_px=12.0, direction=(1.0, 0.0))),
    ("slide", dict(amplitude_px=12.0, direction=(0.0, 1.0))),
    ("torsion", dict(angle_rad=0.06)),
    ("torsion", dict(angle_rad=-0.06)),
    ("circular", dict(amplitude_px=8.0)),
    ("circular", dict(amplitude_px=8.0, clockwise=True)),
    ("drag_release", dict(amplitude_px=12.0, direction=(1.0, 0.0))),
    ("drag_release", dict(amplitude_px=12.0, direction=(0.0, 1.0))),
    ("drag_release", dict(amplitude_px=12.0, direction=(1.0, 1.0))),
]


def clone_tracks(tracks: list[MarkerTrack]) -> list[MarkerTrack]:
    return [
        MarkerTrack(
            id=t.id,
            p_init=t.p_init.copy(),
            p_det=t.p_det.copy(),
            p_det_prev=t.p_det_prev.copy(),
            p_real=t.p_real.copy(),
            bbox=t.bbox.copy(),
            last_seen_t=t.last_seen_t,
            held=t.held,
        )
        for t in tracks
    ]


@dataclass(frozen=True)
class TrajectoryResult:
    name: str
    damped: TrackingReport
    undamped: TrackingReport
    n_events: int


@dataclass(frozen=True)
class TrackingSuiteResult:
    trajectories: list[TrajectoryResult]
    calibration_error_px: float  # mean reference error vs true rest grid

    @property
    def success_rate(self) -> float:
        ok = sum(1 for t in self.trajectories if t.damped.success)
        return ok / len(self.trajectories)

    @property
    def mean_error(self) -> float:
        return float(np.mean([t.damped.mean_error for t in self.trajectories]))

    @property
    def n_undamped_worse(self) -> int:
        return sum(
            1
            for t in self.trajectories
            if t.undamped.mean_error > t.damped.mean_error
        )


def run_tracking_suite(
    seed: int = 0,
    cfg: TrackerConfig | None = None,
    noise_rate: float = TRACKING_NOISE_RATE,
    window_us: int = 1000,
) -> TrackingSuiteResult:
    """Calibrate once, then run every suite interaction from the calibrated
    state, scoring return-to-origin both with the damped update and with
    the gain forced to one."""
    cfg = cfg or TrackerConfig()
    seeds = np.random.SeedSequence(seed).generate_state(len(TRACKING_SUITE) + 1, np.uint64)

    calib_scene = make_calibration_scene()
    calib_events = generate_events(
        calib_scene, noise=NoiseModel(rate=noise_rate, seed=int(seeds[0]))
    )
    map0 = new_state_map(calib_scene.width, calib_scene.height)
    tracks0 = run_calibration(calib_events, map0, cfg, window_us=window_us)
    p_init = np.array([t.p_init for t in tracks0])
    d = np.linalg.norm(p_init[:, None, :] - calib_scene.rest[None, :, :], axis=2)
    calib_err = float(d.min(axis=1).mean())

    undamped_cfg = replace(cfg, gamma=1.0)
    results = []
    for i, (kind, params) in enumerate(TRACKING_SUITE):
        scene = make_interaction(kind, t0_us=calib_scene.t_end_us, **params)
        events = generate_events(
            scene, noise=NoiseModel(rate=noise_rate, seed=int(seeds[i + 1]))
        )
        m = map0.copy()
        tracks = clone_tracks(tracks0)
        run = run_tracking(
            events, m, tracks, cfg,
            window_us=window_us,
            record_detections=True,
            record_history=False,
        )
        damped = evaluate_tracking(tracks, cfg)
        ghost = replay_tracking(run.detections_per_window, tracks0, undamped_cfg)
        undamped = evaluate_tracking(ghost, undamped_cfg)
        label = kind if sum(1 for k, _ in TRACKING_SUITE if k == kind) == 1 else f"{kind}[{i}]"
        results.append(
            TrajectoryResult(
                name=label, damped=damped, undamped=undamped, n_events=len(events)
            )
        )
    return TrackingSuiteResult(trajectories=results, calibration_error_px=calib_err)


# ---------------------------------------------------------------------------
# collision sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    velocities: list[float]
    reports: dict[str, list[list[CollisionReport]]]  # detector -> [per v][per seed]

    def mean_delta_x_p(self, detector: str) -> list[float]:
        return [
            float(np.mean([r.delta_x_p_mm for r in per_v if r.triggered]))
            for per_v in self.reports[detector]
        ]

    def mean_delta_x_e(self, detector: str) -> list[float]:
        return [
            float(np.mean([r.delta_x_e_mm for r in per_v if r.triggered]))
            for per_v in self.reports[detector]
        ]


def run_collision_sweep(
    velocities: list[float] | None = None,
    n_seeds: int = 5,
    seed: int = 0,
    detectors: tuple[str, ...] = ("event", "baseline"),
    reaction: RobotReaction | None = None,
) -> SweepResult:
    if velocities is None:
        velocities = [round(0.01 * k, 10) for k in range(1, 19)]
    reaction = reaction or RobotReaction()
    scn = ApproachScenario(v_mps=0.0)
    seeds = np.random.SeedSequence(seed).generate_state(n_seeds, np.uint64)
    reports: dict[str, list[list[CollisionReport]]] = {}
    for det in detectors:
        per_det = []
        for v in velocities:
            per_v = [
                run_collision_trial(
                    scn, v, det, reaction,
                    noise=NoiseModel(rate=COLLISION_NOISE_RATE, seed=int(s)),
                )
                for s in seeds
            ]
            per_det.append(per_v)
        reports[det] = per_det
    return SweepResult(velocities=list(velocities), reports=reports)


# ---------------------------------------------------------------------------
# hole estimation benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HoleBenchResult:
    per_seed: list[HoleEvaluation]

    @property
    def mean_pos_rmse(self) -> float:
        return float(np.mean([e.pos_rmse_mm for e in self.per_seed]))

    @property
    def mean_abs_radius_error(self) -> float:
        return float(
            np.mean([np.abs(e.per_hole_radius_error_mm).mean() for e in self.per_seed])
        )


def run_hole_benchmark(
    n_holes: int = 10,
    noise_sigma_mm: float = 0.05,
    n_seeds: int = 20,
    seed: int = 0,
    probe: ProbeSpec | None = None,
    start_fraction: float = 0.7,
) -> HoleBenchResult:
    """Cross-search every hole from a random interior start, for several
    seeds, and score centre and radius accuracy against the model."""
    probe = probe or ProbeSpec()
    world = make_hole_bench(n_holes, noise_sigma_mm)
    seeds = np.random.SeedSequence(seed).generate_state(n_seeds, np.uint64)
    evaluations = []
    for s in seeds:
        rng = np.random.default_rng(int(s))
        estimates = []
        for hole in world.holes:
            reach = hole.r_mm - probe.radius_mm
            ang = rng.uniform(0, 2 * np.pi)
            rad = rng.uniform(0, start_fraction * reach)
            start = (hole.x_mm + rad * np.cos(ang), hole.y_mm + rad * np.sin(ang))
            estimates.append(cross_search(world, start, probe, rng=rng))
        evaluations.append(evaluate_holes(estimates, list(world.holes)))
    return HoleBenchResult(per_seed=evaluations)
