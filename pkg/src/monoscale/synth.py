"""Deterministic synthetic driving scenes with exact ground truth.

Each consecutive frame pair gets its own point sample expressed in the
earlier camera frame, where the local road is exactly the plane y = camera
height (the camera follows the road tangentially, so the local ground stays
level in camera coordinates even on arcs and grades). This gives every test
an exact oracle: true per-frame motion, true point classes, a rasterized
label mask consistent with those classes, and a reconstruction whose global
scale can be removed to produce the input the recovery pipeline must fix.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptySceneError
from .geometry import (
    CameraModel,
    Pose,
    Trajectory,
    rotation_about_x,
    rotation_about_y,
)
from .masks import LabelMask
from .validation import check_positive

CLASS_ROAD = 0
CLASS_CLUTTER = 1
CLASS_DYNAMIC = 2

ROAD_LABEL = 1
DYNAMIC_LABEL = 2

# Mask raster corridor: slightly wider than the sampling strip and reaching
# far ahead, so elevated clutter can land on road-labeled pixels and must be
# rejected by geometry, not by the mask.
MASK_EXTENT_MARGIN_M = 0.5
MASK_Z_MIN_M = 1.0
MASK_Z_MAX_M = 500.0
SAMPLE_MARGIN_M = 0.3
EDGE_MARGIN_PX = 2.0
MAX_ATTEMPTS = 200


@dataclass(frozen=True)
class PathSegment:
    """One piece of the camera path, expanded into per-frame steps.

    kind is "straight", "arc" (yaw by turn_deg each step) or "slope"
    (constant grade; the pitch change happens on the segment's first step).
    """

    kind: str
    n_steps: int
    step_m: float = 1.0
    turn_deg: float = 0.0
    grade_percent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("straight", "arc", "slope"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.n_steps < 1:
            raise ValueError("segment must have at least one step")
        check_positive(self.step_m, "step_m")


@dataclass(frozen=True)
class SceneSpec:
    """Full description of a synthetic sequence; same spec, same bytes."""

    camera: CameraModel
    segments: tuple = (PathSegment("straight", 20),)
    image_width: int = 1280
    image_height: int = 720
    n_road: int = 100
    n_clutter: int = 30
    n_dynamic: int = 10
    plane_extent_m: float = 8.0
    depth_near_m: float = 4.0
    depth_far_m: float = 28.0
    clutter_height_m: tuple = (0.5, 3.0)
    dynamic_velocity_mps: float = 8.0
    frame_dt_s: float = 0.1
    pixel_noise_px: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for name in ("n_road", "n_clutter", "n_dynamic"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def n_frames(self):
        return 1 + sum(seg.n_steps for seg in self.segments)


@dataclass(frozen=True)
class FramePair:
    """Ground truth for the transition into frame `index`.

    `motion` is the metric pose delta T with P_t = P_{t-1} . T; pixels and
    the mask belong to the earlier frame (pixels_prev) and later frame
    (pixels_next) of the pair.
    """

    index: int
    pixels_prev: np.ndarray
    pixels_next: np.ndarray
    classes: np.ndarray
    mask: LabelMask
    motion: Pose

    @property
    def matches(self):
        return np.hstack([self.pixels_prev, self.pixels_next])


@dataclass(frozen=True)
class SequenceTruth:
    spec: SceneSpec
    trajectory: Trajectory
    pairs: tuple = field(default_factory=tuple)

    @property
    def camera(self):
        return self.spec.camera


def build_trajectory(spec: SceneSpec) -> Trajectory:
    """Expand the path segments into metric world-from-camera poses."""
    r = np.eye(3)
    p = np.zeros(3)
    pitch = 0.0
    poses = [Pose(r, p)]
    for seg in spec.segments:
        target_pitch = (
            np.arctan(seg.grade_percent / 100.0) if seg.kind == "slope" else 0.0
        )
        for step in range(seg.n_steps):
            if step == 0 and target_pitch != pitch:
                r = r @ rotation_about_x(target_pitch - pitch)
                pitch = target_pitch
            if seg.kind == "arc":
                r = r @ rotation_about_y(np.deg2rad(seg.turn_deg))
            p = p + r @ np.array([0.0, 0.0, seg.step_m])
            poses.append(Pose(r, p))
    return Trajectory(poses)


def _rasterize_road(spec: SceneSpec):
    cam = spec.camera
    h0 = cam.height_m
    vv = np.arange(spec.image_height, dtype=np.float64)[:, None]
    uu = np.arange(spec.image_width, dtype=np.float64)[None, :]
    dv = vv - cam.cy
    below = dv > 0.5
    z = h0 * cam.fy / np.where(below, dv, 1.0)
    x = (uu - cam.cx) * z / cam.fx
    road = (
        below
        & (z >= MASK_Z_MIN_M)
        & (z <= MASK_Z_MAX_M)
        & (np.abs(x) <= spec.plane_extent_m + MASK_EXTENT_MARGIN_M)
    )
    labels = np.zeros((spec.image_height, spec.image_width), dtype=np.uint8)
    labels[road] = ROAD_LABEL
    return labels


def _splat_disk(labels, center_uv, radius_px, value):
    h, w = labels.shape
    u0, v0 = center_uv
    r = int(np.ceil(radius_px))
    ui = int(np.floor(u0 + 0.5))
    vi = int(np.floor(v0 + 0.5))
    lo_u, hi_u = max(ui - r, 0), min(ui + r + 1, w)
    lo_v, hi_v = max(vi - r, 0), min(vi + r + 1, h)
    if lo_u >= hi_u or lo_v >= hi_v:
        return
    cols = np.arange(lo_u, hi_u)[None, :]
    rows = np.arange(lo_v, hi_v)[:, None]
    disk = (cols - u0) ** 2 + (rows - v0) ** 2 <= radius_px**2
    patch = labels[lo_v:hi_v, lo_u:hi_u]
    patch[disk] = value


def _in_bounds(spec, uv):
    return (
        (uv[0] >= EDGE_MARGIN_PX)
        and (uv[0] <= spec.image_width - 1 - EDGE_MARGIN_PX)
        and (uv[1] >= EDGE_MARGIN_PX)
        and (uv[1] <= spec.image_height - 1 - EDGE_MARGIN_PX)
    )


def _project_pair(cam, r_map, t_map, point, shift=None):
    """(pixel_prev, pixel_next) or None if either view rejects the point."""
    moved = point if shift is None else point + shift
    nxt = r_map @ moved + t_map
    if point[2] <= 0 or nxt[2] <= 0:
        return None
    return cam.project(point), cam.project(nxt)


def _generate_pair(spec: SceneSpec, rng, index, motion: Pose, road_raster):
    cam = spec.camera
    h0 = cam.height_m
    ext = spec.plane_extent_m - SAMPLE_MARGIN_M
    r_map = motion.r.T
    t_map = -motion.r.T @ motion.t

    labels = road_raster.copy()
    pts_prev, pts_next, classes = [], [], []

    # Dynamic points first so their occupancy disks exist before the static
    # samples check the mask.
    speed = spec.dynamic_velocity_mps * spec.frame_dt_s
    for _ in range(spec.n_dynamic):
        for _ in range(MAX_ATTEMPTS):
            x = rng.uniform(-2.0 * ext, 2.0 * ext)
            y = h0 - rng.uniform(0.2, 1.6)
            z = rng.uniform(spec.depth_near_m, spec.depth_far_m)
            phi = rng.uniform(0.0, 2.0 * np.pi)
            shift = speed * np.array([np.cos(phi), 0.0, np.sin(phi)])
            pair = _project_pair(cam, r_map, t_map, np.array([x, y, z]), shift)
            if pair is None or not (_in_bounds(spec, pair[0]) and _in_bounds(spec, pair[1])):
                continue
            radius = float(np.clip(0.9 * cam.fy / z, 3.0, 60.0))
            _splat_disk(labels, pair[0], radius, DYNAMIC_LABEL)
            pts_prev.append(pair[0])
            pts_next.append(pair[1])
            classes.append(CLASS_DYNAMIC)
            break

    def label_at(uv):
        col = int(np.floor(uv[0] + 0.5))
        row = int(np.floor(uv[1] + 0.5))
        return labels[row, col]

    for _ in range(spec.n_road):
        for _ in range(MAX_ATTEMPTS):
            x = rng.uniform(-ext, ext)
            z = rng.uniform(spec.depth_near_m, spec.depth_far_m)
            pair = _project_pair(cam, r_map, t_map, np.array([x, h0, z]))
            if pair is None or not (_in_bounds(spec, pair[0]) and _in_bounds(spec, pair[1])):
                continue
            if label_at(pair[0]) != ROAD_LABEL:
                continue
            pts_prev.append(pair[0])
            pts_next.append(pair[1])
            classes.append(CLASS_ROAD)
            break

    lo, hi = spec.clutter_height_m
    for _ in range(spec.n_clutter):
        for _ in range(MAX_ATTEMPTS):
            x = rng.uniform(-ext, ext)
            y = h0 - rng.uniform(lo, hi)
            z = rng.uniform(spec.depth_near_m, spec.depth_far_m)
            pair = _project_pair(cam, r_map, t_map, np.array([x, y, z]))
            if pair is None or not (_in_bounds(spec, pair[0]) and _in_bounds(spec, pair[1])):
                continue
            if label_at(pair[0]) == DYNAMIC_LABEL:
                continue
            pts_prev.append(pair[0])
            pts_next.append(pair[1])
            classes.append(CLASS_CLUTTER)
            break

    n = len(pts_prev)
    pixels_prev = np.array(pts_prev).reshape(n, 2)
    pixels_next = np.array(pts_next).reshape(n, 2)
    if spec.pixel_noise_px > 0 and n:
        pixels_prev = pixels_prev + rng.normal(0.0, spec.pixel_noise_px, (n, 2))
        pixels_next = pixels_next + rng.normal(0.0, spec.pixel_noise_px, (n, 2))
    return FramePair(
        index=index,
        pixels_prev=pixels_prev,
        pixels_next=pixels_next,
        classes=np.array(classes, dtype=np.int64).reshape(n),
        mask=LabelMask(labels, road_label=ROAD_LABEL, dynamic_labels=frozenset({DYNAMIC_LABEL})),
        motion=motion,
    )


def generate_sequence(spec: SceneSpec) -> SequenceTruth:
    """Generate the full sequence of frame pairs with ground truth."""
    if spec.n_road + spec.n_clutter + spec.n_dynamic == 0:
        raise EmptySceneError("scene has no road, clutter or dynamic points")
    trajectory = build_trajectory(spec)
    road_raster = _rasterize_road(spec)
    rng = np.random.default_rng(spec.seed)
    pairs = []
    for t in range(1, len(trajectory)):
        motion = trajectory[t - 1].inverse().compose(trajectory[t])
        pairs.append(_generate_pair(spec, rng, t, motion, road_raster))
    return SequenceTruth(spec=spec, trajectory=trajectory, pairs=tuple(pairs))


def unscale_trajectory(trajectory: Trajectory, global_scale) -> Trajectory:
    """Divide every pose translation by the global scale.

    The result mimics a monocular reconstruction whose true per-frame scale
    is exactly `global_scale`.
    """
    check_positive(global_scale, "global_scale")
    return Trajectory([Pose(p.r, p.t / global_scale) for p in trajectory])


def unscale_points(xyz, global_scale):
    """Scale triangulated points the same way `unscale_trajectory` scales poses."""
    check_positive(global_scale, "global_scale")
    return np.asarray(xyz, dtype=np.float64) / global_scale


def relative_motions(trajectory: Trajectory):
    """Pose deltas T_t with P_t = P_{t-1} . T_t, for t = 1..n-1."""
    return [
        trajectory[t - 1].inverse().compose(trajectory[t])
        for t in range(1, len(trajectory))
    ]
