"""Tactile cross-search hole estimation, radius compensation, and rigid
alignment metrics.

A pin probes outward from inside a hole along +x, -x, then from the
corrected x-centre along +y, -y.  Each leg ends when the collision signal
fires, which happens a fixed critical displacement after the pin edge meets
the wall; the recorded pose is the pin axis, so the measured radius is
corrected by the pin radius and the critical displacement.

Alignment of estimated centres to a reference model uses the closed-form
least-squares rigid transform (rotation plus translation, reflection
excluded).  All computations here are pure; hole trials are independent and
parallelisable per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InputError,
    ParameterError,
    SearchFailureError,
    ValidationError,
)
from .sim import Hole, HoleWorld

LEG_NAMES = ("+x", "-x", "+y", "-y")


@dataclass(frozen=True)
class ProbeSpec:
    diameter_mm: float = 0.75
    delta_crit_mm: float = 0.4  # travel past wall contact before the signal fires
    speed_mm_s: float = 0.8

    def __post_init__(self):
        if self.diameter_mm <= 0:
            raise ParameterError("probe diameter must be positive")
        if self.delta_crit_mm < 0:
            raise ParameterError("delta_crit must be non-negative")

    @property
    def radius_mm(self) -> float:
        return self.diameter_mm / 2.0


@dataclass(frozen=True)
class HoleEstimate:
    contact_points: tuple[tuple[float, float], ...]  # P1..P4
    x_c_mm: float
    y_c_mm: float
    r_measured_mm: float
    r_real_mm: float


@dataclass(frozen=True)
class AlignmentResult:
    rotation: np.ndarray      # 2x2, orthogonal, det +1
    translation: np.ndarray   # (2,)
    rmse: float
    per_point_error: list[float]

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation


@dataclass(frozen=True)
class HoleEvaluation:
    pos_rmse_mm: float
    radius_mean_abs_error_mm: float
    radius_mean_signed_error_mm: float
    per_hole_pos_error_mm: list[float]
    per_hole_radius_error_mm: list[float]
    alignment: AlignmentResult | None


DEFAULT_STEP_MM = 0.05


def _leg_travel(
    world: HoleWorld,
    hole: Hole,
    p0: np.ndarray,
    direction: np.ndarray,
    probe: ProbeSpec,
    step_mm: float,
    leg: str,
) -> float:
    """Advance the probe until the collision signal fires; refine the
    crossing by bisection so the recorded travel is exact to solver
    precision, then the spec of the world's trigger rule."""
    s_wall = HoleWorld.wall_contact_travel(hole, p0, direction, probe.radius_mm)
    s_trigger = s_wall + probe.delta_crit_mm
    budget = 2 * hole.r_mm + probe.delta_crit_mm + 4 * step_mm
    fired = lambda s: s >= s_trigger
    s = 0.0
    while not fired(s):
        s += step_mm
        if s > budget:
            raise SearchFailureError(f"no trigger within travel budget on leg {leg}")
    lo, hi = max(0.0, s - step_mm), s
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if fired(mid):
            hi = mid
        else:
            lo = mid
    return hi


def cross_search(
    world: HoleWorld,
    start: tuple[float, float],
    probe: ProbeSpec,
    rng: np.random.Generator | None = None,
    step_mm: float = DEFAULT_STEP_MM,
) -> HoleEstimate:
    """Estimate a hole's centre and radius by axis-aligned probing.

    From the start point the probe travels +x then -x, giving the x-centre
    as the midpoint of the two contacts; it is repositioned to the corrected
    x before probing +y and -y.  The radius is the mean distance from the
    estimated centre to the four contacts, compensated for the probe radius
    and the trigger displacement.  Contact coordinates carry the world's
    Gaussian noise along the motion axis (rng required if the world is
    noisy).
    """
    start_pt = np.asarray(start, dtype=np.float64)
    hole = world.find_hole(start_pt[0], start_pt[1])
    if hole is None:
        raise ParameterError(f"start point {tuple(start_pt)} is not inside any hole")
    centre = np.array([hole.x_mm, hole.y_mm])
    if np.linalg.norm(start_pt - centre) >= hole.r_mm - probe.radius_mm:
        raise ParameterError("probe does not fit in the hole at the start point")
    if world.noise_sigma_mm > 0 and rng is None:
        raise ParameterError("noisy world needs an rng for contact noise")

    def contact(p0: np.ndarray, direction: np.ndarray, leg: str) -> np.ndarray:
        s = _leg_travel(world, hole, p0, direction, probe, step_mm, leg)
        if world.noise_sigma_mm > 0:
            s += float(rng.normal(0.0, world.noise_sigma_mm))
        return p0 + s * direction

    plus_x = np.array([1.0, 0.0])
    plus_y = np.array([0.0, 1.0])
    p1 = contact(start_pt, plus_x, "+x")
    p2 = contact(start_pt, -plus_x, "-x")
    x_c = (p1[0] + p2[0]) / 2.0
    mid = np.array([x_c, start_pt[1]])
    p3 = contact(mid, plus_y, "+y")
    p4 = contact(mid, -plus_y, "-y")
    y_c = (p3[1] + p4[1]) / 2.0

    centre_est = np.array([x_c, y_c])
    contacts = (p1, p2, p3, p4)
    r_measured = float(np.mean([np.linalg.norm(p - centre_est) for p in contacts]))
    r_real = r_measured + probe.radius_mm - probe.delta_crit_mm
    if r_real <= 0:
        raise ValidationError(f"compensated radius {r_real:.3f} mm is not positive")
    return HoleEstimate(
        contact_points=tuple((float(p[0]), float(p[1])) for p in contacts),
        x_c_mm=float(x_c),
        y_c_mm=float(y_c),
        r_measured_mm=r_measured,
        r_real_mm=float(r_real),
    )


def kabsch_align(estimated: np.ndarray, reference: np.ndarray) -> AlignmentResult:
    """Closed-form least-squares rigid alignment of 2-D point sets.

    Finds rotation R (det +1, no reflection) and translation t minimising
    sum ||R p_i + t - q_i||^2, and reports the per-point residuals after
    applying the transform.
    """
    p = np.asarray(estimated, dtype=np.float64)
    q = np.asarray(reference, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 2 or p.shape[1] != 2:
        raise InputError("point lists must both be (n, 2)")
    n = p.shape[0]
    if n < 2:
        raise DegenerateInputError("alignment needs at least two points")
    pc = p - p.mean(axis=0)
    qc = q - q.mean(axis=0)
    h = pc.T @ qc
    u, s, vt = np.linalg.svd(h)
    if s[0] <= 0:
        raise DegenerateInputError("all points coincide; alignment undefined")
    d = float(np.sign(np.linalg.det(vt.T @ u.T)))
    if d < 0 and s[1] <= 1e-12 * s[0]:
        raise DegenerateInputError(
            "collinear points with reflection ambiguity; alignment undefined"
        )
    r = vt.T @ np.diag([1.0, d]) @ u.T
    t = q.mean(axis=0) - r @ p.mean(axis=0)
    aligned = p @ r.T + t
    residuals = np.linalg.norm(aligned - q, axis=1)
    return AlignmentResult(
        rotation=r,
        translation=t,
        rmse=float(np.sqrt(np.mean(residuals**2))),
        per_point_error=[float(e) for e in residuals],
    )


def hole_error_summary(
    pos_errors: np.ndarray, radius_errors: np.ndarray
) -> tuple[float, float, float]:
    """Aggregate per-hole errors: (position RMSE, mean absolute radius
    error, mean signed radius error)."""
    pos = np.asarray(pos_errors, dtype=np.float64)
    rad = np.asarray(radius_errors, dtype=np.float64)
    return (
        float(np.sqrt(np.mean(pos**2))),
        float(np.mean(np.abs(rad))),
        float(np.mean(rad)),
    )


def evaluate_holes(
    estimates: list[HoleEstimate], model: list[Hole]
) -> HoleEvaluation:
    """Compare estimates to ground truth, index-aligned.

    Estimated centres are rigidly aligned to the model first (a single hole
    skips alignment); position errors are the aligned residuals, radius
    errors are signed with both the signed and absolute mean reported.
    """
    if len(estimates) != len(model):
        raise InputError(
            f"{len(estimates)} estimates for {len(model)} model holes"
        )
    if not estimates:
        raise InputError("no holes to evaluate")
    est_centres = np.array([[e.x_c_mm, e.y_c_mm] for e in estimates])
    ref_centres = np.array([[h.x_mm, h.y_mm] for h in model])
    if len(estimates) == 1:
        alignment = None
        pos_errors = np.linalg.norm(est_centres - ref_centres, axis=1)
    else:
        alignment = kabsch_align(est_centres, ref_centres)
        pos_errors = np.asarray(alignment.per_point_error)
    rad_errors = np.array(
        [e.r_real_mm - h.r_mm for e, h in zip(estimates, model)]
    )
    pos_rmse, rad_abs, rad_signed = hole_error_summary(pos_errors, rad_errors)
    return HoleEvaluation(
        pos_rmse_mm=pos_rmse,
        radius_mean_abs_error_mm=rad_abs,
        radius_mean_signed_error_mm=rad_signed,
        per_hole_pos_error_mm=[float(e) for e in pos_errors],
        per_hole_radius_error_mm=[float(e) for e in rad_errors],
        alignment=alignment,
    )
