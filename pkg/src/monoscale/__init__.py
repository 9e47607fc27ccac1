"""monoscale: metric scale recovery for monocular visual odometry.

Selects road-surface points from two-view reconstructions with
depth-consistency voting and a road-model pitch gate, fits the road plane
robustly, and converts the measured camera mounting height into per-frame
metric scales smoothed by a Gaussian+median mixed filter.
"""

from .alignment import TrajectoryAligner, umeyama_alignment
from .config import PipelineConfig, load_config
from .delaunay import delaunay
from .epipolar import (
    EssentialMatrixRansac,
    RelativeMotion,
    decompose_essential,
    essential_from_motion,
)
from .geometry import (
    CameraModel,
    Pose,
    Similarity,
    TrackedPoints,
    Trajectory,
    ground_depth_from_row,
    skew,
)
from .masks import LabelMask, filter_dynamic, filter_road
from .metrics import MetricsReport, ate_rmse, evaluate_trajectories, rpe_kitti
from .pipeline import run_eval, run_plot, run_recover, run_synth
from .plane import PlaneModel, PlaneRansac, scale_from_plane
from .pnp import refine_pose_pnp
from .road_selection import (
    RoadPointSelector,
    compute_votes,
    depth_consistency,
    motion_pitch,
    road_model_select,
    triangle_plane,
    vote_select,
)
from .scale import FrameScale, ScaleTracker, apply_scales, mixed_filter
from .synth import (
    PathSegment,
    SceneSpec,
    SequenceTruth,
    generate_sequence,
    relative_motions,
    unscale_trajectory,
)
from .triangulation import triangulate

__version__ = "0.1.0"

__all__ = [
    "CameraModel",
    "EssentialMatrixRansac",
    "FrameScale",
    "LabelMask",
    "MetricsReport",
    "PathSegment",
    "PipelineConfig",
    "PlaneModel",
    "PlaneRansac",
    "Pose",
    "RelativeMotion",
    "RoadPointSelector",
    "ScaleTracker",
    "SceneSpec",
    "SequenceTruth",
    "Similarity",
    "TrackedPoints",
    "Trajectory",
    "TrajectoryAligner",
    "apply_scales",
    "ate_rmse",
    "compute_votes",
    "decompose_essential",
    "delaunay",
    "depth_consistency",
    "essential_from_motion",
    "evaluate_trajectories",
    "filter_dynamic",
    "filter_road",
    "generate_sequence",
    "ground_depth_from_row",
    "load_config",
    "mixed_filter",
    "motion_pitch",
    "refine_pose_pnp",
    "relative_motions",
    "road_model_select",
    "rpe_kitti",
    "run_eval",
    "run_plot",
    "run_recover",
    "run_synth",
    "scale_from_plane",
    "skew",
    "triangle_plane",
    "triangulate",
    "umeyama_alignment",
    "unscale_trajectory",
    "vote_select",
]
