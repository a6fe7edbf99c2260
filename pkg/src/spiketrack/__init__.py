"""Event-driven tactile marker tracking toolkit.

High-rate event streams from a visuotactile sensor are reconstructed into a
persistent binary state map, denoised, and tracked as a 64-point marker
displacement field with a hysteresis-aware damped update.  The same streams
drive millisecond-window collision detection and tactile hole-geometry
estimation.  A deterministic simulator provides ground truth for all of it.
"""

__version__ = "0.1.0"

from .events import (  # noqa: F401
    Event,
    EventArray,
    EventStreamHeader,
    EventWindow,
    NoiseModel,
    generate_events,
    read_event_file,
    window_stream,
    write_event_file,
)
from .statemap import StateMap, apply_batch, apply_event, new_state_map, snapshot  # noqa: F401
from .denoise import DenoiserConfig, denoise, register_denoiser  # noqa: F401
from .tracker import (  # noqa: F401
    Detection,
    MarkerTrack,
    TrackerConfig,
    TrackingReport,
    associate,
    calibrate,
    detect_centroids,
    evaluate_tracking,
    hysteresis_update,
)
from .collision import (  # noqa: F401
    BaselineConfig,
    CollisionConfig,
    CollisionReport,
    calibrate_threshold,
    detect_collision,
    detect_collision_baseline,
    run_collision_trial,
)
from .geometry import (  # noqa: F401
    AlignmentResult,
    HoleEstimate,
    ProbeSpec,
    cross_search,
    evaluate_holes,
    kabsch_align,
)
from .sim import (  # noqa: F401
    ApproachScenario,
    Hole,
    HoleWorld,
    HysteresisModel,
    RobotReaction,
    SimScene,
    ground_truth_positions,
    make_approach_stream,
    make_calibration_scene,
    make_interaction,
)
