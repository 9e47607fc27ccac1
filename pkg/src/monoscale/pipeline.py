"""Command implementations: synth, recover, eval and plot.

`run_recover` drives the per-frame chain: dynamic-mask filtering, motion
(estimated from the matches, or taken from an input trajectory when one is
provided), triangulation, road-point selection, robust plane fitting, the
height-ratio scale, mixed filtering, and finally re-chaining the scaled
motions into a metric trajectory.
"""

import os
import re
from dataclasses import dataclass

import numpy as np

from . import io as mio
from .config import PipelineConfig
from .epipolar import (
    EssentialMatrixRansac,
    RelativeMotion,
)
from .exceptions import (
    AmbiguousCheiralityError,
    DegenerateConfigurationError,
    InsufficientMatchesError,
    ParseError,
    SingularNormalEquationsError,
    TooFewPointsError,
)
from .geometry import Pose, TrackedPoints, Trajectory
from .masks import dynamic_free_mask
from .metrics import evaluate_trajectories
from .plotting import write_trajectory_plot
from .pnp import refine_pose_pnp
from .road_selection import RoadPointSelector
from .scale import ScaleTracker, apply_scales
from .synth import (
    SceneSpec,
    generate_sequence,
    unscale_trajectory,
)
from .triangulation import triangulate

UNSCALED_POSES = "unscaled_poses.txt"
REFERENCE_POSES = "reference_poses.txt"
SCALED_POSES = "scaled_poses.txt"
SCALES_CSV = "scales.csv"
RECOVER_LOG = "recover_log.txt"
MATCHES_DIR = "matches"
MASKS_DIR = "masks"

_PAIR_RE = re.compile(r"^(\d{6})_(\d{6})\.csv$")


@dataclass(frozen=True)
class FrameRecord:
    index: int
    raw_scale: float
    filtered_scale: float
    mode: str
    n_matches: int
    n_selected: int
    note: str = ""


@dataclass(frozen=True)
class RecoverResult:
    trajectory: Trajectory
    records: tuple
    used_input_poses: bool


def _discover_pairs(matches_dir):
    pairs = []
    for name in sorted(os.listdir(matches_dir)):
        m = _PAIR_RE.match(name)
        if m:
            pairs.append((int(m.group(1)), int(m.group(2)), name))
    if not pairs:
        raise ParseError("no NNNNNN_NNNNNN.csv match files found", path=matches_dir)
    pairs.sort()
    for k, (prev, nxt, name) in enumerate(pairs):
        if prev != k or nxt != k + 1:
            raise ParseError(
                f"match files must cover consecutive pairs from 000000; "
                f"found {name} at position {k}",
                path=matches_dir,
            )
    return pairs


def _estimate_motion(matches, camera, config: PipelineConfig, seed):
    """Full two-view estimation: essential RANSAC, then PnP polish."""
    estimator = EssentialMatrixRansac(
        camera=camera,
        n_iters=config.essential_iters,
        sampson_px=config.sampson_px,
        min_disparity_px=config.min_disparity_px,
        confidence=config.essential_confidence,
        random_state=np.random.default_rng(seed),
    )
    estimator.fit(matches)
    motion = estimator.motion_
    inliers = matches[estimator.inlier_mask_]
    points = triangulate(motion, inliers, camera)
    note = ""
    if len(points) >= 4:
        try:
            initial = Pose(motion.r_map, motion.t_map)
            refined = refine_pose_pnp(
                points.xyz, points.pixels_next, camera, initial
            )
            direction = -refined.r.T @ refined.t
            norm = np.linalg.norm(direction)
            if norm > 1e-12:
                motion = RelativeMotion(refined.r, direction / norm)
                points = triangulate(motion, inliers, camera)
        except (TooFewPointsError, SingularNormalEquationsError, ValueError):
            note = "pnp_skipped"
    return motion, points, inliers, note


def run_recover(config: PipelineConfig, input_dir, output_dir) -> RecoverResult:
    camera = config.camera()
    matches_dir = os.path.join(input_dir, MATCHES_DIR)
    masks_dir = os.path.join(input_dir, MASKS_DIR)
    pairs = _discover_pairs(matches_dir)
    n_frames = len(pairs) + 1

    poses_path = os.path.join(input_dir, UNSCALED_POSES)
    input_traj = None
    if os.path.exists(poses_path):
        input_traj = mio.read_poses_kitti(poses_path)
        if len(input_traj) != n_frames:
            raise ParseError(
                f"input trajectory has {len(input_traj)} poses but the match "
                f"files imply {n_frames} frames",
                path=poses_path,
            )

    selector = RoadPointSelector(beta_a=config.beta_a, theta0_deg=config.theta0_deg)
    tracker = ScaleTracker(
        camera,
        window=config.window_q,
        sigma=config.filter_sigma,
        min_points=config.min_points,
        plane_iters=config.plane_iters,
        plane_dist_tol=config.plane_dist_tol,
        plane_min_inliers=config.plane_min_inliers,
        random_state=config.seed,
    )

    deltas = []
    scales = []
    records = []
    last_delta = Pose.identity()
    for prev_idx, next_idx, name in pairs:
        matches = mio.read_matches(os.path.join(matches_dir, name))
        mask = mio.read_mask(
            os.path.join(masks_dir, f"{prev_idx:06d}.pgm"),
            road_label=config.road_label,
            dynamic_labels=config.dynamic_labels,
            expected_size=(config.image_width, config.image_height),
        )
        if len(matches):
            matches = matches[dynamic_free_mask(matches[:, :2], mask)]

        note = ""
        points = TrackedPoints.empty()
        direction = None
        baseline = None
        if input_traj is not None:
            delta = input_traj[prev_idx].inverse().compose(input_traj[next_idx])
            step = float(np.linalg.norm(delta.t))
            if step > 1e-9:
                baseline = step
                direction = delta.t / step
                motion = RelativeMotion(delta.r.T, direction)
                work = matches
                if len(matches) >= 8:
                    try:
                        probe = EssentialMatrixRansac(
                            camera=camera,
                            n_iters=config.essential_iters,
                            sampson_px=config.sampson_px,
                            min_disparity_px=config.min_disparity_px,
                            confidence=config.essential_confidence,
                            random_state=np.random.default_rng(
                                [config.seed, next_idx]
                            ),
                        ).fit(matches)
                        work = matches[probe.inlier_mask_]
                    except (
                        InsufficientMatchesError,
                        DegenerateConfigurationError,
                        AmbiguousCheiralityError,
                    ):
                        note = "epipolar_filter_skipped"
                points = triangulate(motion, work, camera)
            else:
                note = "zero_baseline"
        else:
            try:
                motion, points, _, note = _estimate_motion(
                    matches, camera, config, seed=[config.seed, next_idx]
                )
                baseline = 1.0
                direction = motion.direction
                delta = Pose(motion.r_map.T, motion.direction)
            except (
                InsufficientMatchesError,
                DegenerateConfigurationError,
                AmbiguousCheiralityError,
            ) as exc:
                delta = last_delta
                note = f"motion_reused ({type(exc).__name__})"

        selected = selector.select(points, motion_dir=direction, mask=mask)
        frame = tracker.update(selected, baseline=baseline)
        deltas.append(delta)
        scales.append(frame.filtered)
        last_delta = delta
        records.append(
            FrameRecord(
                index=next_idx,
                raw_scale=frame.raw,
                filtered_scale=frame.filtered,
                mode=frame.mode,
                n_matches=len(matches),
                n_selected=len(selected),
                note=note,
            )
        )

    trajectory = apply_scales(deltas, scales)

    os.makedirs(output_dir, exist_ok=True)
    mio.write_poses_kitti(trajectory, os.path.join(output_dir, SCALED_POSES))
    mio.write_scales_csv(
        [(r.index, r.raw_scale, r.filtered_scale, r.mode) for r in records],
        os.path.join(output_dir, SCALES_CSV),
    )
    log_lines = [
        f"input_poses={'yes' if input_traj is not None else 'no'}",
    ]
    for r in records:
        line = (
            f"pair {r.index:06d}: matches={r.n_matches} selected={r.n_selected} "
            f"mode={r.mode} raw={r.raw_scale:.6g} filtered={r.filtered_scale:.6g}"
        )
        if r.note:
            line += f" note={r.note}"
        log_lines.append(line)
    mio.atomic_write_text(
        os.path.join(output_dir, RECOVER_LOG), "\n".join(log_lines) + "\n"
    )
    return RecoverResult(
        trajectory=trajectory,
        records=tuple(records),
        used_input_poses=input_traj is not None,
    )


def run_synth(config: PipelineConfig, output_dir):
    """Generate a synthetic sequence and write it in the recover layout."""
    spec = SceneSpec(
        camera=config.camera(),
        segments=config.synth_segments,
        image_width=config.image_width,
        image_height=config.image_height,
        n_road=config.synth_n_road,
        n_clutter=config.synth_n_clutter,
        n_dynamic=config.synth_n_dynamic,
        plane_extent_m=config.synth_plane_extent_m,
        dynamic_velocity_mps=config.synth_dynamic_velocity_mps,
        frame_dt_s=config.synth_frame_dt_s,
        pixel_noise_px=config.synth_pixel_noise_px,
        seed=config.seed,
    )
    truth = generate_sequence(spec)

    os.makedirs(os.path.join(output_dir, MATCHES_DIR), exist_ok=True)
    os.makedirs(os.path.join(output_dir, MASKS_DIR), exist_ok=True)
    mio.write_poses_kitti(
        truth.trajectory, os.path.join(output_dir, REFERENCE_POSES)
    )
    unscaled = unscale_trajectory(truth.trajectory, config.synth_global_scale)
    mio.write_poses_kitti(unscaled, os.path.join(output_dir, UNSCALED_POSES))
    for pair in truth.pairs:
        mio.write_matches(
            pair.matches,
            os.path.join(
                output_dir,
                MATCHES_DIR,
                mio.pair_filename(pair.index - 1, pair.index),
            ),
        )
        mio.write_mask(
            pair.mask,
            os.path.join(output_dir, MASKS_DIR, f"{pair.index - 1:06d}.pgm"),
        )
    mio.write_scales_csv(
        [
            (pair.index, config.synth_global_scale, config.synth_global_scale, "truth")
            for pair in truth.pairs
        ],
        os.path.join(output_dir, "true_scales.csv"),
    )
    return truth


def run_eval(estimate_path, reference_path, out_path):
    estimate = mio.read_poses_kitti(estimate_path)
    reference = mio.read_poses_kitti(reference_path)
    report = evaluate_trajectories(estimate, reference)
    mio.atomic_write_text(out_path, report.to_json())
    return report


def run_plot(trajectory_paths, out_svg):
    named = []
    for path in trajectory_paths:
        label = os.path.splitext(os.path.basename(path))[0]
        named.append((label, mio.read_poses_kitti(path)))
    csv_path = os.path.splitext(out_svg)[0] + ".csv"
    write_trajectory_plot(named, out_svg, csv_path)
    return out_svg, csv_path


__all__ = [
    "FrameRecord",
    "RecoverResult",
    "run_recover",
    "run_synth",
    "run_eval",
    "run_plot",
]
