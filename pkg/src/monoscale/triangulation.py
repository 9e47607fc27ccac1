"""Linear (DLT) two-view triangulation at the motion's own baseline scale."""

import numpy as np

from .geometry import CameraModel, TrackedPoints
from .validation import as_float_array

# Rays closer to parallel than this (sine of angle) carry no depth signal;
# correspondences at the epipole fall in this bucket.
MIN_RAY_SIN = 1e-10


def dlt_triangulate(r_map, t_map, rays_a, rays_b):
    """Triangulate calibrated ray pairs against P0=[I|0], P1=[r_map|t_map].

    Returns (points, depth_a, depth_b, valid) where `points` are in the
    first camera frame and `valid` flags rows with a well-conditioned
    homogeneous solution.
    """
    n = len(rays_a)
    p1 = np.hstack([r_map, t_map.reshape(3, 1)])
    a = np.empty((n, 4, 4))
    # Row pattern u*P[2] - P[0], v*P[2] - P[1] for each view.
    a[:, 0, :3] = np.array([1.0, 0.0, 0.0]) - np.outer(rays_a[:, 0], [0, 0, 1.0])
    a[:, 0, 3] = 0.0
    a[:, 1, :3] = np.array([0.0, 1.0, 0.0]) - np.outer(rays_a[:, 1], [0, 0, 1.0])
    a[:, 1, 3] = 0.0
    a[:, 2, :] = p1[0] - rays_b[:, 0, None] * p1[2]
    a[:, 3, :] = p1[1] - rays_b[:, 1, None] * p1[2]

    _, s, vt = np.linalg.svd(a)
    x_h = vt[:, 3, :]
    w = x_h[:, 3]
    scale = np.abs(x_h).max(axis=1)
    valid = np.abs(w) > 1e-12 * np.maximum(scale, 1e-300)
    pts = np.zeros((n, 3))
    nz = valid
    pts[nz] = x_h[nz, :3] / w[nz, None]
    depth_a = pts[:, 2]
    depth_b = pts @ r_map[2] + t_map[2]
    return pts, depth_a, depth_b, valid


def triangulate(motion, matches, camera: CameraModel, baseline=1.0) -> TrackedPoints:
    """Triangulate pixel correspondences given a relative motion.

    `motion` provides `r_map` (rotation mapping earlier-frame coordinates to
    the later frame) and a unit `t_map`; points land in the earlier camera
    frame at `baseline` times the motion's unit translation, so the default
    gives the usual normalized-depth monocular reconstruction. Rows with
    non-positive depth in either view, or with near-parallel rays, are
    dropped rather than reported as errors.
    """
    matches = as_float_array(matches, "matches", shape=(-1, 4))
    if len(matches) == 0:
        return TrackedPoints.empty()
    rays_a = camera.normalized_rays(matches[:, :2])
    rays_b = camera.normalized_rays(matches[:, 2:])

    r_map = as_float_array(motion.r_map, "r_map", shape=(3, 3))
    t_map = float(baseline) * as_float_array(motion.t_map, "t_map", shape=(3,))

    pts, depth_a, depth_b, valid = dlt_triangulate(r_map, t_map, rays_a, rays_b)

    # Parallax guard: rays nearly parallel to each other give unbounded depth.
    dir_a = rays_a / np.linalg.norm(rays_a, axis=1, keepdims=True)
    dir_b_in_a = rays_b @ r_map  # r_map.T applied row-wise
    dir_b_in_a /= np.linalg.norm(dir_b_in_a, axis=1, keepdims=True)
    sin_angle = np.linalg.norm(np.cross(dir_a, dir_b_in_a), axis=1)

    keep = valid & (depth_a > 0) & (depth_b > 0) & (sin_angle > MIN_RAY_SIN)
    keep &= np.isfinite(pts).all(axis=1)
    return TrackedPoints(matches[keep, :2], matches[keep, 2:], pts[keep])
