"""Command-line front-end: simulate, statemap, denoise, track, eval,
collide, holes, bench.

Results are CSV/JSON plus minimal static SVG plots.  Outputs are written to
a temporary file and renamed into place only on success, so failures never
leave partial artifacts.  A run manifest (inputs, outputs, configuration
snapshot, seeds, stage timings) is written before exit on success or
failure.  All randomness derives from the single --seed flag through a
counter-based seed splitter.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .collision import BaselineConfig, CollisionConfig, run_collision_trial
from .configio import load_tracker_config, parse_kv_file
from .denoise import DenoiserConfig, denoise
from .errors import ParameterError, SpiketrackError
from .events import (
    EventArray,
    EventStreamHeader,
    NoiseModel,
    generate_events,
    read_event_file,
    window_stream,
    write_event_file,
)
from .geometry import ProbeSpec, cross_search, evaluate_holes
from .pipeline import (
    DEFAULT_WINDOW_US,
    detect_from_map,
    run_calibration,
    run_tracking,
)
from .sim import (
    ApproachScenario,
    Hole,
    HoleWorld,
    HysteresisModel,
    RobotReaction,
    ground_truth_positions,
    make_calibration_scene,
    make_interaction,
)
from .statemap import apply_batch, new_state_map, read_pgm, snapshot, write_pgm
from .svg import SvgPlot
from .tracker import MarkerTrack, TrackerConfig, evaluate_tracking

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2


class _Manifest:
    def __init__(self, command: str, out_dir: Path, quiet: bool):
        self.data = {
            "command": command,
            "tool_version": __version__,
            "config": {},
            "seeds": [],
            "inputs": [],
            "outputs": [],
            "stage_seconds": {},
            "status": "running",
        }
        self.out_dir = out_dir
        self.quiet = quiet
        self._stage_start = time.perf_counter()
        self._stage = None

    def config(self, **kv):
        self.data["config"].update({k: v for k, v in kv.items() if v is not None})

    def stage(self, name: str):
        now = time.perf_counter()
        if self._stage:
            self.data["stage_seconds"][self._stage] = round(now - self._stage_start, 4)
        self._stage = name
        self._stage_start = now

    def note_input(self, path):
        self.data["inputs"].append(str(path))

    def note_output(self, path):
        self.data["outputs"].append(str(path))

    def info(self, msg: str):
        if not self.quiet:
            print(msg)

    def finish(self, status: str, error: str | None = None):
        self.stage("")
        self.data["status"] = status
        if error:
            self.data["error"] = error
        self.out_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write_text(
            self.out_dir / "run-manifest.json",
            json.dumps(self.data, indent=2, sort_keys=True) + "\n",
        )


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _atomic(path: Path, writer) -> None:
    """Run writer(tmp_path); move the result into place only on success."""
    tmp = path.with_name(path.name + ".tmp")
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if tmp.exists():
            tmp.unlink()
        raise


def _resolve(out_dir: Path, name: str | None, default: str) -> Path:
    p = Path(name) if name else Path(default)
    return p if p.is_absolute() else out_dir / p


def _split_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, np.uint64)]


def _parse_resolution(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ParameterError(f"bad --resolution {text!r}, expected WxH") from exc


def _write_csv(path: Path, headers: list[str], rows: list[list]) -> None:
    def writer(tmp: Path):
        with open(tmp, "w") as f:
            f.write(",".join(headers) + "\n")
            for row in rows:
                f.write(",".join(_cell(v) for v in row) + "\n")

    _atomic(path, writer)


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _scenario_kwargs(raw: dict[str, str], seed: int) -> dict:
    hyst = HysteresisModel(
        tau_ms=float(raw.get("tau_ms", 15.0)),
        residual_fraction=float(raw.get("residual_fraction", 0.2)),
        residual_decay_ms=float(raw.get("residual_decay_ms", 500.0)),
    )
    direction = tuple(float(v) for v in raw.get("direction", "1,0").split(","))
    kwargs = dict(
        amplitude_px=float(raw.get("amplitude_px", 10.0)),
        period_ms=float(raw.get("period_ms", 250.0)),
        settle_ms=float(raw.get("settle_ms", 420.0)),
        direction=direction,
        hysteresis=hyst,
        seed=int(raw.get("seed", seed)),
    )
    if "angle_rad" in raw:
        kwargs["angle_rad"] = float(raw["angle_rad"])
    if "rows" in raw:
        kwargs["rows"] = int(raw["rows"])
    if "cols" in raw:
        kwargs["cols"] = int(raw["cols"])
    if "pitch" in raw:
        kwargs["pitch"] = float(raw["pitch"])
    return kwargs


def cmd_simulate(args, man: _Manifest) -> int:
    raw = parse_kv_file(args.scenario)
    man.note_input(args.scenario)
    kind = raw.get("kind", "slide")
    width, height = _parse_resolution(args.resolution)
    noise_rate = float(raw.get("noise_rate", args.noise_rate))
    seeds = _split_seeds(args.seed, 4)
    man.data["seeds"] = seeds
    kwargs = _scenario_kwargs(raw, args.seed)
    man.config(kind=kind, resolution=args.resolution, noise_rate=noise_rate, **{
        k: v for k, v in kwargs.items() if isinstance(v, (int, float, str))
    })

    man.stage("simulate")
    t0 = 0
    calib_path = None
    if args.calib_out:
        calib_scene = make_calibration_scene(
            width=width, height=height, hysteresis=kwargs["hysteresis"],
            rows=kwargs.get("rows", 8), cols=kwargs.get("cols", 8),
            pitch=kwargs.get("pitch", 36.0),
        )
        calib_events = generate_events(
            calib_scene, noise=NoiseModel(rate=noise_rate, seed=seeds[0])
        )
        calib_path = _resolve(man.out_dir, args.calib_out, "calib.evt")
        header = EventStreamHeader(
            width, height, calib_scene.t0_us, calib_scene.t_end_us, len(calib_events)
        )
        _atomic(calib_path, lambda p: write_event_file(header, calib_events, p))
        man.note_output(calib_path)
        t0 = calib_scene.t_end_us

    scene = make_interaction(kind, width=width, height=height, t0_us=t0, **kwargs)
    events = generate_events(scene, noise=NoiseModel(rate=noise_rate, seed=seeds[1]))
    out_path = _resolve(man.out_dir, args.out, "stream.evt")
    header = EventStreamHeader(width, height, scene.t0_us, scene.t_end_us, len(events))
    _atomic(out_path, lambda p: write_event_file(header, events, p))
    man.note_output(out_path)

    man.stage("truth")
    truth_path = _resolve(man.out_dir, args.truth, "truth.csv")
    rows = []
    for t_us in range(scene.t0_us, scene.t_end_us + 1, 1000):
        pos = ground_truth_positions(scene, t_us)
        for i, (x, y) in enumerate(pos):
            rows.append([t_us, i, float(x), float(y)])
    _write_csv(truth_path, ["t_us", "marker_id", "x_px", "y_px"], rows)
    man.note_output(truth_path)
    man.info(
        f"simulated {kind}: {len(events)} events over "
        f"{(scene.t_end_us - scene.t0_us) / 1e6:.2f} s -> {out_path}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# statemap / denoise
# ---------------------------------------------------------------------------


def cmd_statemap(args, man: _Manifest) -> int:
    man.note_input(args.infile)
    man.stage("ingest")
    header, events = read_event_file(args.infile)
    m = new_state_map(header.width, header.height)
    apply_batch(m, events)
    out_path = _resolve(man.out_dir, args.out, "map.pgm")
    _atomic(out_path, lambda p: write_pgm(snapshot(m), p))
    man.note_output(out_path)
    man.info(f"ingested {len(events)} events -> {out_path}")
    return EXIT_OK


def cmd_denoise(args, man: _Manifest) -> int:
    man.note_input(args.infile)
    cfg = DenoiserConfig(min_component_area=args.min_area, closing_radius=args.closing)
    man.config(min_area=args.min_area, closing=args.closing)
    man.stage("denoise")
    img = read_pgm(args.infile)
    clean = denoise(img, cfg)
    out_path = _resolve(man.out_dir, args.out, "clean.pgm")
    _atomic(out_path, lambda p: write_pgm(clean, p))
    man.note_output(out_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# track / eval
# ---------------------------------------------------------------------------


def _tracker_settings(args) -> tuple[TrackerConfig, int]:
    if args.config:
        return load_tracker_config(args.config)
    return TrackerConfig(), DEFAULT_WINDOW_US


def cmd_track(args, man: _Manifest) -> int:
    trk_cfg, window_us = _tracker_settings(args)
    if args.config:
        man.note_input(args.config)
    man.config(window_us=window_us, delta=trk_cfg.delta, gamma=trk_cfg.gamma)
    man.note_input(args.calib)
    man.note_input(args.infile)

    man.stage("calibrate")
    calib_header, calib_events = read_event_file(args.calib)
    m = new_state_map(calib_header.width, calib_header.height)
    tracks = run_calibration(calib_events, m, trk_cfg, window_us=window_us)

    man.stage("track")
    header, events = read_event_file(args.infile)
    if (header.width, header.height) != (calib_header.width, calib_header.height):
        raise ParameterError("task and calibration streams disagree on resolution")
    run = run_tracking(events, m, tracks, trk_cfg, window_us=window_us)

    man.stage("write")
    out_path = _resolve(man.out_dir, args.out, "tracks.csv")
    rows = [
        [r.t_us, r.marker_id, r.det_x, r.det_y, r.real_x, r.real_y, int(r.held)]
        for r in run.history
    ]
    _write_csv(
        out_path,
        ["t_us", "marker_id", "det_x", "det_y", "real_x", "real_y", "held"],
        rows,
    )
    man.note_output(out_path)
    report = evaluate_tracking(tracks, trk_cfg)
    man.info(
        f"tracked {trk_cfg.expected_markers} markers over {len(run.history)} rows; "
        f"final mean error {report.mean_error:.3f} px"
    )
    return EXIT_OK


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParameterError(f"{path} is empty")
    headers = lines[0].split(",")
    return headers, [line.split(",") for line in lines[1:] if line]


def cmd_eval(args, man: _Manifest) -> int:
    man.note_input(args.tracks)
    man.note_input(args.truth)
    trk_cfg, _ = _tracker_settings(args)
    man.stage("eval")

    headers, rows = _read_csv(args.tracks)
    col = {h: i for i, h in enumerate(headers)}
    first: dict[int, tuple[float, float]] = {}
    final: dict[int, tuple[float, float]] = {}
    for row in rows:
        mid = int(row[col["marker_id"]])
        pos = (float(row[col["real_x"]]), float(row[col["real_y"]]))
        first.setdefault(mid, pos)
        final[mid] = pos

    theaders, trows = _read_csv(args.truth)
    tcol = {h: i for i, h in enumerate(theaders)}
    rest: dict[int, tuple[float, float]] = {}
    for row in trows:
        mid = int(row[tcol["marker_id"]])
        if mid not in rest:  # first row per marker is the rest position
            rest[mid] = (float(row[tcol["x_px"]]), float(row[tcol["y_px"]]))

    if len(final) != len(rest):
        raise ParameterError(
            f"{len(final)} tracked markers but {len(rest)} truth markers"
        )
    # pair tracks with truth markers by proximity of their starting
    # positions (track numbering follows detection order, not grid order)
    track_ids = sorted(final)
    truth_ids = sorted(rest)
    start_xy = np.array([first[m] for m in track_ids])
    rest_xy = np.array([rest[m] for m in truth_ids])
    d = np.linalg.norm(start_xy[:, None, :] - rest_xy[None, :, :], axis=2)
    nearest = d.argmin(axis=1)
    if len(set(nearest.tolist())) != len(track_ids):
        raise ParameterError("could not pair tracked markers with truth markers")
    errs = []
    for ti, mid in enumerate(track_ids):
        rx, ry = rest_xy[nearest[ti]]
        errs.append(float(np.hypot(final[mid][0] - rx, final[mid][1] - ry)))
    err = np.array(errs)
    errors = dict(zip(track_ids, errs))
    report = {
        "success": bool((err < trk_cfg.success_radius).all()),
        "success_radius_px": trk_cfg.success_radius,
        "mean_error_px": float(err.mean()),
        "std_error_px": float(err.std()),
        "per_marker_error_px": [errors[m] for m in sorted(errors)],
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        out_path = _resolve(man.out_dir, args.out, "report.json")
        _atomic_write_text(out_path, text)
        man.note_output(out_path)
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# collide
# ---------------------------------------------------------------------------


def _parse_sweep(text: str) -> list[float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ParameterError(f"bad --sweep {text!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise ParameterError("sweep requires lo <= hi and step > 0")
    n = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(n)]


def cmd_collide(args, man: _Manifest) -> int:
    velocities = _parse_sweep(args.sweep)
    detectors = ["event", "baseline"] if args.detector == "both" else [args.detector]
    seeds = _split_seeds(args.seed, args.seeds)
    man.data["seeds"] = seeds
    man.config(sweep=args.sweep, detector=args.detector, n_seeds=args.seeds)
    reaction = RobotReaction()
    scn = ApproachScenario(v_mps=0.0)

    man.stage("trials")
    rows = []
    series: dict[str, dict[float, list[float]]] = {}
    for det in detectors:
        for v in velocities:
            for seed in seeds:
                rep = run_collision_trial(
                    scn, v, det, reaction, noise=NoiseModel(rate=0.05, seed=seed)
                )
                if not rep.triggered:
                    continue
                rows.append(
                    [v, det, rep.delta_x_p_mm, rep.delta_x_e_mm, rep.t_trigger_us]
                )
                series.setdefault(det, {}).setdefault(v, []).append(rep.delta_x_p_mm)

    out_path = _resolve(man.out_dir, args.out, "sweep.csv")
    _write_csv(
        out_path,
        ["v_mps", "detector", "delta_x_p_mm", "delta_x_e_mm", "t_trigger_us"],
        rows,
    )
    man.note_output(out_path)

    if args.plot:
        man.stage("plot")
        plot = SvgPlot(
            title="Collision detection deviation vs approach velocity",
            x_label="velocity [m/s]",
            y_label="detection deviation [mm]",
        )
        for det in detectors:
            vs = sorted(series.get(det, {}))
            means = [float(np.mean(series[det][v])) for v in vs]
            plot.add_line(vs, means, label=det, dashed=(det == "baseline"))
        plot_path = _resolve(man.out_dir, args.plot, "sweep.svg")
        _atomic(plot_path, lambda p: plot.save(p))
        man.note_output(plot_path)
    man.info(f"{len(rows)} trials -> {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# holes
# ---------------------------------------------------------------------------


def cmd_holes(args, man: _Manifest) -> int:
    man.note_input(args.model)
    with open(args.model) as f:
        model_raw = json.load(f)
    holes = [Hole(h["x_mm"], h["y_mm"], h["r_mm"]) for h in model_raw]
    world = HoleWorld(holes=tuple(holes), noise_sigma_mm=args.noise)
    probe = ProbeSpec()
    seeds = _split_seeds(args.seed, args.seeds)
    man.data["seeds"] = seeds
    man.config(noise=args.noise, n_seeds=args.seeds, n_holes=len(holes))

    man.stage("search")
    rows = []
    mean_est: dict[int, list] = {i: [] for i in range(len(holes))}
    for seed in seeds:
        rng = np.random.default_rng(seed)
        estimates = []
        for hole in holes:
            reach = hole.r_mm - probe.radius_mm
            angle = rng.uniform(0, 2 * np.pi)
            radius = rng.uniform(0, 0.7 * reach)
            start = (
                hole.x_mm + radius * np.cos(angle),
                hole.y_mm + radius * np.sin(angle),
            )
            estimates.append(cross_search(world, start, probe, rng=rng))
        ev = evaluate_holes(estimates, holes)
        for i, (est, hole) in enumerate(zip(estimates, holes)):
            rows.append(
                [
                    i,
                    int(seed),
                    hole.x_mm,
                    hole.y_mm,
                    hole.r_mm,
                    est.x_c_mm,
                    est.y_c_mm,
                    est.r_real_mm,
                    ev.per_hole_pos_error_mm[i],
                    ev.per_hole_radius_error_mm[i],
                ]
            )
            mean_est[i].append((est.x_c_mm, est.y_c_mm, est.r_real_mm))

    out_path = _resolve(man.out_dir, args.out, "holes.csv")
    _write_csv(
        out_path,
        [
            "hole_id",
            "seed",
            "true_x_mm",
            "true_y_mm",
            "true_r_mm",
            "est_x_mm",
            "est_y_mm",
            "est_r_mm",
            "pos_error_mm",
            "radius_error_mm",
        ],
        rows,
    )
    man.note_output(out_path)

    if args.plot:
        man.stage("plot")
        plot = SvgPlot(
            title="Hole estimates vs model",
            x_label="x [mm]",
            y_label="y [mm]",
            height=360,
        )
        for hole in holes:
            plot.add_circle(hole.x_mm, hole.y_mm, hole.r_mm, "#d62728")
        for i in mean_est:
            xs, ys, rs = zip(*mean_est[i])
            plot.add_circle(
                float(np.mean(xs)), float(np.mean(ys)), float(np.mean(rs)),
                "#1f77b4", dashed=True,
            )
        plot_path = _resolve(man.out_dir, args.plot, "holes.svg")
        _atomic(plot_path, lambda p: plot.save(p))
        man.note_output(plot_path)
    man.info(f"{len(rows)} hole trials -> {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def cmd_bench(args, man: _Manifest) -> int:
    man.note_input(args.infile)
    header, events = read_event_file(args.infile)
    window_us = args.window_us
    report = {
        "events_total": len(events),
        "windows": 0,
        "ingest_events_per_s": 0.0,
        "pipeline_updates_per_s": 0.0,
    }
    if len(events):
        man.stage("ingest")
        windows = window_stream(events, window_us)
        report["windows"] = len(windows)
        m = new_state_map(header.width, header.height)
        start = time.perf_counter()
        for w in windows:
            apply_batch(m, w.events)
        elapsed = time.perf_counter() - start
        report["ingest_events_per_s"] = len(events) / elapsed if elapsed > 0 else 0.0

        man.stage("pipeline")
        trk_cfg = TrackerConfig()
        den_cfg = DenoiserConfig()
        m2 = new_state_map(header.width, header.height)
        warmup = max(1, len(windows) // 4)
        for w in windows[:warmup]:
            apply_batch(m2, w.events)
        dets = detect_from_map(m2, den_cfg, trk_cfg)
        tracks = [
            MarkerTrack(
                id=i,
                p_init=np.array([d.x, d.y]),
                p_det=np.array([d.x, d.y]),
                p_det_prev=np.array([d.x, d.y]),
                p_real=np.array([d.x, d.y]),
                bbox=np.array([d.x, d.y, d.x, d.y]),
            )
            for i, d in enumerate(dets)
        ]
        measured = windows[warmup:]
        if measured:
            start = time.perf_counter()
            run_tracking(
                EventArray.concatenate([w.events for w in measured]),
                m2,
                tracks,
                trk_cfg,
                den_cfg,
                window_us=window_us,
                record_history=False,
            )
            elapsed = time.perf_counter() - start
            report["pipeline_updates_per_s"] = (
                len(measured) / elapsed if elapsed > 0 else 0.0
            )
            report["tracked_markers"] = len(tracks)

    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        out_path = _resolve(man.out_dir, args.out, "bench.json")
        _atomic_write_text(out_path, text)
        man.note_output(out_path)
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiketrack",
        description="Event-driven tactile marker tracking toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master random seed")
        p.add_argument("--config", default=None, help="tracker config file")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("simulate", help="generate a synthetic event stream")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default="stream.evt")
    p.add_argument("--truth", default="truth.csv")
    p.add_argument("--calib-out", default=None, help="also emit a bootstrap stream")
    p.add_argument("--resolution", default="320x320")
    # multi-second streams accumulate background activity in the persistent
    # map, so the simulator default keeps the classical denoiser's
    # isolated-noise regime; burst-count scenarios use higher rates
    p.add_argument("--noise-rate", type=float, default=0.01, help="events/px/s")
    common(p)

    p = sub.add_parser("statemap", help="reconstruct the occupancy grid")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default="map.pgm")
    common(p)

    p = sub.add_parser("denoise", help="clean a reconstructed map")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default="clean.pgm")
    p.add_argument("--min-area", type=int, default=12)
    p.add_argument("--closing", type=int, default=1)
    common(p)

    p = sub.add_parser("track", help="calibrate and track markers")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--calib", required=True)
    p.add_argument("--out", default="tracks.csv")
    common(p)

    p = sub.add_parser("eval", help="end-point tracking metrics")
    p.add_argument("--tracks", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    common(p)

    p = sub.add_parser("collide", help="collision detection velocity sweep")
    p.add_argument("--sweep", default="0.01:0.18:0.01")
    p.add_argument("--detector", choices=["event", "baseline", "both"], default="both")
    p.add_argument("--seeds", type=int, default=1, help="trials per velocity")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--plot", default=None)
    common(p)

    p = sub.add_parser("holes", help="tactile hole geometry estimation")
    p.add_argument("--model", required=True, help="holes.json")
    p.add_argument("--noise", type=float, default=0.05, help="contact noise sigma, mm")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", default="holes.csv")
    p.add_argument("--plot", default=None)
    common(p)

    p = sub.add_parser("bench", help="throughput measurement")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--window-us", type=int, default=1000)
    common(p)

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "statemap": cmd_statemap,
    "denoise": cmd_denoise,
    "track": cmd_track,
    "eval": cmd_eval,
    "collide": cmd_collide,
    "holes": cmd_holes,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out_dir = Path(args.out_dir)
    man = _Manifest(args.command, out_dir, args.quiet)
    man.config(seed=args.seed)
    try:
        code = _COMMANDS[args.command](args, man)
        man.finish("ok")
        return code
    except SpiketrackError as exc:
        man.finish("error", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        man.finish("error", str(exc))
        print(f"io-error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
