"""Road-surface point selection from triangulated feature tracks.

Two cooperating stages refine mask-gated points: depth-consistency voting
over Delaunay triangles (points on the road must get *closer* as their image
row moves down), then a pitch-consistency gate that compares each triangle's
plane pitch against the pitch implied by the camera's motion direction.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .delaunay import delaunay
from .exceptions import (
    CollinearPointsError,
    DegenerateTriangleError,
    TooFewPointsError,
)
from .geometry import TrackedPoints
from .masks import LabelMask, filter_road
from .validation import as_float_array

# Raw cross-product norms below this flag a collinear (degenerate) triangle.
DEGENERATE_CROSS_NORM = 1e-12
# Normals with |n_y| below this belong to vertical surfaces; their pitch is
# forced to exactly zero so the road gate rejects them cleanly.
VERTICAL_NY = 1e-9

DEFAULT_THETA0_RAD = np.deg2rad(5.0)
DEFAULT_BETA_A = 1


def depth_consistency(v_a, depth_a, v_b, depth_b):
    """Pairwise consistency score (v_a - v_b) * (d_a - d_b).

    Non-positive for any two points on the road surface (lower image row
    means smaller depth); a positive value flags at least one non-road point
    in the pair. Broadcasts over arrays.
    """
    return (np.asarray(v_a) - np.asarray(v_b)) * (
        np.asarray(depth_a) - np.asarray(depth_b)
    )


def compute_votes(points: TrackedPoints, triangles):
    """Per-point vote totals over all triangle pair occurrences.

    Each pair inside each triangle adds +1 to both endpoints when its
    depth-consistency score is <= 0 and -1 otherwise.
    """
    triangles = np.asarray(triangles, dtype=np.intp).reshape(-1, 3)
    votes = np.zeros(len(points), dtype=np.int64)
    if len(triangles) == 0:
        return votes
    v = points.pixels[:, 1]
    d = points.depths
    pairs = np.vstack(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [0, 2]]]
    )
    sigma = depth_consistency(v[pairs[:, 0]], d[pairs[:, 0]], v[pairs[:, 1]], d[pairs[:, 1]])
    delta = np.where(sigma <= 0, 1, -1)
    np.add.at(votes, pairs[:, 0], delta)
    np.add.at(votes, pairs[:, 1], delta)
    return votes


def vote_select(points: TrackedPoints, triangles, beta_a=DEFAULT_BETA_A) -> TrackedPoints:
    """Keep points whose vote total reaches the acceptance criterion."""
    votes = compute_votes(points, triangles)
    return points[votes >= beta_a]


def triangle_plane(xyz_a, xyz_b, xyz_c):
    """Plane (normal, offset, pitch) through one 3D triangle.

    The normal is unit length with its y-component forced non-negative;
    `offset` satisfies normal . X = offset at each vertex, and the pitch is
    arcsin of the normal's y-component. Raises DegenerateTriangleError for
    collinear vertices.
    """
    a = as_float_array(xyz_a, "xyz_a", shape=(3,))
    b = as_float_array(xyz_b, "xyz_b", shape=(3,))
    c = as_float_array(xyz_c, "xyz_c", shape=(3,))
    n = np.cross(b - a, c - a)
    norm = np.linalg.norm(n)
    if norm < DEGENERATE_CROSS_NORM:
        raise DegenerateTriangleError("triangle vertices are collinear in 3D")
    n = n / norm
    if n[1] < 0:
        n = -n
    theta = 0.0 if abs(n[1]) < VERTICAL_NY else float(np.arcsin(np.clip(n[1], -1, 1)))
    return n, float(n @ a), theta


def triangle_planes(points: TrackedPoints, triangles):
    """Vectorized `triangle_plane` over (T, 3) index triangles.

    Returns (normals, offsets, pitches, valid); degenerate triangles are
    flagged invalid instead of raising.
    """
    triangles = np.asarray(triangles, dtype=np.intp).reshape(-1, 3)
    a = points.xyz[triangles[:, 0]]
    b = points.xyz[triangles[:, 1]]
    c = points.xyz[triangles[:, 2]]
    n = np.cross(b - a, c - a)
    norms = np.linalg.norm(n, axis=1)
    valid = norms >= DEGENERATE_CROSS_NORM
    n = np.where(valid[:, None], n / np.where(valid, norms, 1.0)[:, None], 0.0)
    flip = n[:, 1] < 0
    n[flip] = -n[flip]
    offsets = np.einsum("ij,ij->i", n, a)
    pitches = np.arcsin(np.clip(n[:, 1], -1.0, 1.0))
    pitches[np.abs(n[:, 1]) < VERTICAL_NY] = 0.0
    return n, offsets, pitches, valid


def motion_pitch(t_dir):
    """Pitch angle implied by a motion direction: arcsin(-t_y / |t|).

    Returns NaN for a (near-)zero vector, the in-band "no motion" signal.
    """
    t_dir = as_float_array(t_dir, "t_dir", shape=(3,))
    norm = np.linalg.norm(t_dir)
    if norm < 1e-12:
        return float("nan")
    return float(np.arcsin(np.clip(-t_dir[1] / norm, -1.0, 1.0)))


def camera_pitch_magnitude(r):
    """|pitch| of the camera extrinsic rotation, |arctan(-R32 / R33)|.

    Provided for completeness; the selection pipeline treats the mounted
    camera pitch as zero.
    """
    r = as_float_array(r, "r", shape=(3, 3))
    if r[2, 2] == 0.0:
        return float(np.pi / 2.0)
    return float(abs(np.arctan(-r[2, 1] / r[2, 2])))


def pitch_residual(theta_road, theta_triangle):
    """Magnitude-compared pitch residual | |theta_road| - |theta_triangle| |.

    A level road gives theta_road = -pi/2 and triangle pitch +pi/2, so the
    raw difference would reject every road triangle; comparing magnitudes
    makes level and sloped roads pass while vertical surfaces still fail.
    """
    return np.abs(np.abs(theta_road) - np.abs(theta_triangle))


def road_model_select(
    points: TrackedPoints, t_dir, theta0=DEFAULT_THETA0_RAD
) -> TrackedPoints:
    """Keep vertices of triangles whose pitch agrees with the road model.

    Re-triangulates the surviving points in the image, derives each
    triangle's plane pitch, and keeps every vertex of every triangle whose
    pitch residual against theta_road = motion_pitch - pi/2 is below theta0.
    """
    if len(points) < 3:
        raise TooFewPointsError(
            f"road-model selection needs at least 3 points, got {len(points)}"
        )
    theta_motion = motion_pitch(t_dir)
    if np.isnan(theta_motion):
        raise ValueError(
            "motion direction is zero; skip the road-model stage for this frame"
        )
    theta_road = theta_motion - np.pi / 2.0
    triangles = delaunay(points.pixels)
    _, _, pitches, valid = triangle_planes(points, triangles)
    passing = valid & (pitch_residual(theta_road, pitches) < theta0)
    idx = np.unique(triangles[passing])
    return points[idx]


class RoadPointSelector(BaseEstimator):
    """Chained road-point selection: mask gate, voting, pitch gate.

    Parameters mirror the published defaults: `beta_a` is the minimum vote
    total and `theta0_deg` the pitch agreement criterion in degrees. The
    selector never raises on poor data; stages that cannot run leave the
    ledger empty, and the caller's minimum-point threshold decides what to
    do with a thin selection.
    """

    def __init__(self, beta_a=DEFAULT_BETA_A, theta0_deg=5.0):
        self.beta_a = beta_a
        self.theta0_deg = theta0_deg

    def select(
        self, points: TrackedPoints, motion_dir=None, mask: LabelMask = None
    ) -> TrackedPoints:
        if mask is not None:
            points = filter_road(points, mask)
        try:
            triangles = delaunay(points.pixels) if len(points) >= 3 else None
        except (TooFewPointsError, CollinearPointsError):
            triangles = None
        if triangles is None:
            votes = np.zeros(len(points), dtype=np.int64)
            points = points[votes >= self.beta_a]
        else:
            points = vote_select(points, triangles, beta_a=self.beta_a)

        # With no (or zero) motion the pitch gate is undefined; keep the
        # vote-stage result and let the caller's fallback logic decide.
        if motion_dir is None or np.isnan(motion_pitch(motion_dir)):
            return points
        try:
            return road_model_select(
                points, motion_dir, theta0=float(np.deg2rad(self.theta0_deg))
            )
        except (TooFewPointsError, CollinearPointsError):
            return points[np.zeros(len(points), dtype=bool)]
