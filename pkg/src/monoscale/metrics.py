"""Trajectory accuracy metrics: ATE after similarity alignment and
KITTI-style relative pose error over fixed-length subsequences."""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .alignment import umeyama_alignment
from .exceptions import LengthMismatchError, PathTooShortError
from .geometry import Trajectory, rotation_angle

KITTI_LENGTHS_M = (100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0)


@dataclass(frozen=True)
class MetricsReport:
    ate_rmse_m: float
    rpe_trans_percent: float
    rpe_rot_deg_per_m: float
    aligned_scale: float
    n_frames: int

    def to_json(self):
        return json.dumps(asdict(self), indent=2) + "\n"


def _check_lengths(estimate: Trajectory, reference: Trajectory):
    if len(estimate) != len(reference):
        raise LengthMismatchError(
            f"estimate has {len(estimate)} poses, reference {len(reference)}"
        )


def ate_rmse(estimate: Trajectory, reference: Trajectory, align=True):
    """RMSE of position differences, optionally after 7-DOF alignment."""
    _check_lengths(estimate, reference)
    est = estimate.positions
    ref = reference.positions
    if align:
        similarity = umeyama_alignment(est, ref, with_scale=True)
        est = similarity.apply(est)
    return float(np.sqrt(np.mean(np.sum((est - ref) ** 2, axis=1))))


def arc_lengths(trajectory: Trajectory):
    """Cumulative path length at each pose (starts at 0)."""
    pos = trajectory.positions
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def rpe_kitti(estimate: Trajectory, reference: Trajectory, lengths=KITTI_LENGTHS_M):
    """KITTI relative pose error: (translation %, rotation deg/m).

    Every frame is a candidate subsequence start; the end frame is the
    first whose reference arc length exceeds the start's by the nominal
    length. Translation error is averaged as a fraction of each
    subsequence's actual reference arc length; rotation angles are summed
    and divided by the total arc length evaluated.
    """
    _check_lengths(estimate, reference)
    dist = arc_lengths(reference)
    n = len(reference)
    t_ratios = []
    angles = []
    arcs = []
    for first in range(n):
        for length in lengths:
            last = int(np.searchsorted(dist, dist[first] + length, side="right"))
            if last >= n:
                continue
            actual = dist[last] - dist[first]
            d_ref = reference[first].inverse().compose(reference[last])
            d_est = estimate[first].inverse().compose(estimate[last])
            err = d_est.inverse().compose(d_ref)
            t_ratios.append(np.linalg.norm(err.t) / actual)
            angles.append(rotation_angle(err.r))
            arcs.append(actual)
    if not t_ratios:
        raise PathTooShortError(
            f"reference path ({dist[-1]:.1f} m) is shorter than every "
            f"subsequence length {tuple(lengths)}"
        )
    trans_percent = 100.0 * float(np.mean(t_ratios))
    rot_deg_per_m = float(np.degrees(np.sum(angles)) / np.sum(arcs))
    return trans_percent, rot_deg_per_m


def evaluate_trajectories(estimate: Trajectory, reference: Trajectory) -> MetricsReport:
    """Full report: aligned ATE, KITTI RPE, and the alignment scale."""
    _check_lengths(estimate, reference)
    similarity = umeyama_alignment(estimate.positions, reference.positions)
    trans, rot = rpe_kitti(estimate, reference)
    return MetricsReport(
        ate_rmse_m=ate_rmse(estimate, reference, align=True),
        rpe_trans_percent=trans,
        rpe_rot_deg_per_m=rot,
        aligned_scale=similarity.scale,
        n_frames=len(estimate),
    )
