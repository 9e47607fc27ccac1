"""Per-frame scale recovery: sliding-window mixed filtering and fallbacks.

The tracker consumes validated road points frame by frame, fits the road
plane when enough points survive selection, and otherwise falls back to the
previous plane, then to the previous scale. Raw scales enter a sliding
window that is smoothed with a Gaussian kernel and reduced by the median.
"""

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import (
    CollinearPointsError,
    EmptyQueueError,
    LengthMismatchError,
    NoConsensusError,
    NonPositiveHeightError,
    TooFewPointsError,
)
from .geometry import CameraModel, Pose, TrackedPoints, Trajectory
from .plane import PlaneModel, PlaneRansac, scale_from_plane

DEFAULT_WINDOW = 5
DEFAULT_SIGMA = 5.0
DEFAULT_MIN_POINTS = 12

MODE_FIT = "fit"
MODE_REUSE_PLANE = "reuse_plane"
MODE_REUSE_SCALE = "reuse_scale"
MODE_PROVISIONAL = "provisional"


def mixed_filter(values, sigma=DEFAULT_SIGMA):
    """Gaussian-smooth the queue, then take the (lower) median.

    The kernel spans the whole queue: length equal to the queue length,
    centered at (L - 1) / 2, weights normalized to sum one, and the signal
    reflect-padded at both ends. Even-length queues use the lower median.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyQueueError("cannot filter an empty scale queue")
    length = values.size
    if length == 1:
        return float(values[0])
    center = (length - 1) / 2.0
    kernel = np.exp(-((np.arange(length) - center) ** 2) / (2.0 * sigma**2))
    kernel /= kernel.sum()
    pad_left = (length - 1) // 2
    pad_right = length // 2
    # Convolve deviations from a reference sample so constant queues are
    # preserved exactly despite the rounded kernel normalization.
    ref = values[0]
    padded = np.pad(values - ref, (pad_left, pad_right), mode="reflect")
    smoothed = ref + np.correlate(padded, kernel, mode="valid")
    return float(np.sort(smoothed)[(length - 1) // 2])


@dataclass(frozen=True)
class FrameScale:
    """One frame's scale decision."""

    raw: float
    filtered: float
    mode: str
    plane: Optional[PlaneModel]


class ScaleTracker:
    """Sequential per-frame scale recovery with plane/scale fallbacks.

    Road points are expected in the unit-baseline (normalized-depth)
    reconstruction of their frame; `baseline` tells the tracker how long
    that unit baseline is in the caller's trajectory units, so the returned
    scale directly corrects the caller's translations. With the default
    baseline of 1 the scale is simply camera_height / fitted_height.

    Frames must be fed in order by a single thread; all randomness is
    derived from (random_state, frame index) so a rerun over the same data
    is bit-identical.
    """

    def __init__(
        self,
        camera: CameraModel,
        window=DEFAULT_WINDOW,
        sigma=DEFAULT_SIGMA,
        min_points=DEFAULT_MIN_POINTS,
        plane_iters=200,
        plane_dist_tol=0.03,
        plane_min_inliers=6,
        random_state=0,
    ):
        if min_points < 3:
            raise ValueError(f"min_points must be >= 3, got {min_points}")
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.camera = camera
        self.sigma = float(sigma)
        self.min_points = int(min_points)
        self.plane_iters = int(plane_iters)
        self.plane_dist_tol = float(plane_dist_tol)
        self.plane_min_inliers = int(plane_min_inliers)
        self.random_state = random_state
        self._values = deque(maxlen=int(window))
        self._last_plane: Optional[PlaneModel] = None
        self._last_scale: Optional[float] = None
        self._frame = 0

    @property
    def queue(self):
        return tuple(self._values)

    def update(self, road_points, baseline=1.0) -> FrameScale:
        """Consume one frame's selected road points, return its scale.

        `baseline=None` marks a frame whose motion carries no usable
        translation; plane-based modes are skipped and the previous scale
        is reused.
        """
        if isinstance(road_points, TrackedPoints):
            xyz = road_points.xyz
        else:
            xyz = np.asarray(road_points, dtype=np.float64).reshape(-1, 3)

        plane = None
        raw = None
        mode = None
        if baseline is not None and len(xyz) >= self.min_points:
            rng = np.random.default_rng([self._seed_entropy(), self._frame])
            fitter = PlaneRansac(
                n_iters=self.plane_iters,
                dist_tol=self.plane_dist_tol,
                min_inliers=self.plane_min_inliers,
                random_state=rng,
            )
            try:
                fitter.fit(xyz)
                raw = scale_from_plane(fitter.plane_, self.camera) / baseline
                plane = fitter.plane_
                mode = MODE_FIT
            except (
                TooFewPointsError,
                CollinearPointsError,
                NoConsensusError,
                NonPositiveHeightError,
            ):
                plane = None
        if mode is None:
            if baseline is not None and self._last_plane is not None:
                raw = scale_from_plane(self._last_plane, self.camera) / baseline
                plane = self._last_plane
                mode = MODE_REUSE_PLANE
            elif self._last_scale is not None:
                raw = self._last_scale
                mode = MODE_REUSE_SCALE
            else:
                raw = 1.0
                mode = MODE_PROVISIONAL

        if plane is not None:
            self._last_plane = plane
        self._last_scale = raw
        self._values.append(raw)
        self._frame += 1
        filtered = mixed_filter(np.array(self._values), sigma=self.sigma)
        return FrameScale(raw=raw, filtered=filtered, mode=mode, plane=plane)

    def _seed_entropy(self):
        if isinstance(self.random_state, np.random.Generator):
            raise TypeError(
                "ScaleTracker needs an integer random_state to derive "
                "per-frame seeds deterministically"
            )
        return int(self.random_state)


def apply_scales(motions, scales) -> Trajectory:
    """Chain frame-to-frame motions into a trajectory, scaling translations.

    `motions` are pose deltas T_t with P_t = P_{t-1} . T_t; each delta's
    translation is multiplied by its frame scale before chaining from the
    identity pose.
    """
    motions = list(motions)
    scales = [float(s) for s in scales]
    if len(motions) != len(scales):
        raise LengthMismatchError(
            f"{len(motions)} motions vs {len(scales)} scales"
        )
    poses = [Pose.identity()]
    for motion, scale in zip(motions, scales):
        step = Pose(motion.r, motion.t * scale)
        poses.append(poses[-1].compose(step))
    return Trajectory(poses)
