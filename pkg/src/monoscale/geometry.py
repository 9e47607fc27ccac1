"""Core geometric types and primitives.

Coordinate convention (KITTI camera frame): x right, y down, z forward.
The road surface lies *below* the camera, so ground points have positive y
and the camera height is the +y offset of the road plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    HorizonRowError,
    InvalidRotationError,
    NonPositiveDepthError,
)
from .validation import as_float_array, check_positive

ROTATION_TOL = 1e-9
# Guard band (pixels) around the principal row where the ground-depth formula
# is singular; rows that close to the horizon cannot be road at driving range.
HORIZON_ROW_GUARD_PX = 1.0


def skew(v):
    """Skew-symmetric matrix S with S @ w == cross(v, w)."""
    v = as_float_array(v, "v", shape=(3,))
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rotation_about_x(angle_rad):
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_about_y(angle_rad):
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_about_z(angle_rad):
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_exp(omega):
    """Rodrigues exponential of a rotation vector."""
    omega = as_float_array(omega, "omega", shape=(3,))
    theta = np.linalg.norm(omega)
    if theta < 1e-12:
        return np.eye(3) + skew(omega)
    axis = omega / theta
    k = skew(axis)
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def rotation_angle(r):
    """Geodesic angle of a rotation matrix, in radians."""
    r = as_float_array(r, "r", shape=(3, 3))
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _check_rotation(r):
    err = np.abs(r.T @ r - np.eye(3)).max()
    if err > ROTATION_TOL:
        raise InvalidRotationError(
            f"matrix is not orthonormal (max deviation {err:.3e})"
        )
    det = np.linalg.det(r)
    if abs(det - 1.0) > ROTATION_TOL:
        raise InvalidRotationError(f"matrix determinant is {det:.12f}, expected 1")


@dataclass(frozen=True)
class Pose:
    """Rigid transform y = R x + t.

    Used both for world-from-camera poses in trajectories and for the
    frame-to-frame deltas that chains of poses are built from. Construction
    rejects corrupt rotations instead of re-orthonormalizing them.
    """

    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        r = as_float_array(self.r, "r", shape=(3, 3))
        t = as_float_array(self.t, "t", shape=(3,))
        _check_rotation(r)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m):
        m = as_float_array(m, "m", shape=(4, 4))
        return cls(m[:3, :3], m[:3, 3])

    @property
    def matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.r
        m[:3, 3] = self.t
        return m

    def compose(self, other: "Pose") -> "Pose":
        """self applied after other, i.e. (self ∘ other)(x) = self(other(x))."""
        return Pose(self.r @ other.r, self.r @ other.t + self.t)

    def inverse(self) -> "Pose":
        rt = self.r.T
        return Pose(rt, -rt @ self.t)

    def apply(self, points):
        points = as_float_array(points, "points")
        return points @ self.r.T + self.t


@dataclass(frozen=True)
class Similarity:
    """Similarity transform y = s R x + t (7 degrees of freedom)."""

    scale: float
    r: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        check_positive(self.scale, "scale")
        r = as_float_array(self.r, "r", shape=(3, 3))
        t = as_float_array(self.t, "t", shape=(3,))
        _check_rotation(r)
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls):
        return cls(1.0, np.eye(3), np.zeros(3))

    def apply(self, points):
        points = as_float_array(points, "points")
        return self.scale * (points @ self.r.T) + self.t


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the measured mounting height of the camera.

    `height_m` is the metric distance from the optical center down to the
    road surface; it is the absolute reference every recovered scale is
    anchored to.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    height_m: float

    def __post_init__(self):
        check_positive(self.fx, "fx")
        check_positive(self.fy, "fy")
        check_positive(self.height_m, "height_m")
        for name in ("cx", "cy"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def matrix(self):
        return np.array(
            [
                [self.fx, 0.0, self.cx],
                [0.0, self.fy, self.cy],
                [0.0, 0.0, 1.0],
            ]
        )

    def project(self, points):
        """Project camera-frame 3D points to pixels.

        Accepts one point (3,) or many (N, 3); every depth must be positive.
        """
        pts = np.atleast_2d(as_float_array(points, "points"))
        if pts.shape[1] != 3:
            raise ValueError(f"points: expected (N, 3), got {pts.shape}")
        z = pts[:, 2]
        if np.any(z <= 0):
            raise NonPositiveDepthError("cannot project points with depth <= 0")
        uv = np.empty((pts.shape[0], 2))
        uv[:, 0] = self.fx * pts[:, 0] / z + self.cx
        uv[:, 1] = self.fy * pts[:, 1] / z + self.cy
        return uv[0] if np.ndim(points) == 1 else uv

    def back_project(self, pixels, depths):
        """Invert `project`: pixels plus known depths back to 3D points."""
        px = np.atleast_2d(as_float_array(pixels, "pixels"))
        z = np.atleast_1d(as_float_array(depths, "depths"))
        pts = np.empty((px.shape[0], 3))
        pts[:, 0] = (px[:, 0] - self.cx) * z / self.fx
        pts[:, 1] = (px[:, 1] - self.cy) * z / self.fy
        pts[:, 2] = z
        return pts[0] if np.ndim(pixels) == 1 else pts

    def normalized_rays(self, pixels):
        """Pixels to homogeneous camera rays (N, 3) with unit z."""
        px = np.atleast_2d(as_float_array(pixels, "pixels"))
        rays = np.empty((px.shape[0], 3))
        rays[:, 0] = (px[:, 0] - self.cx) / self.fx
        rays[:, 1] = (px[:, 1] - self.cy) / self.fy
        rays[:, 2] = 1.0
        return rays


def ground_depth_from_row(cam: CameraModel, height, v_row):
    """Depth of a ground point of height `height` seen at image row `v_row`.

    Inverse of the row coordinate of the pinhole projection restricted to a
    horizontal plane; singular at the principal row, guarded by a one-pixel
    band.
    """
    dv = v_row - cam.cy
    if abs(dv) < HORIZON_ROW_GUARD_PX:
        raise HorizonRowError(
            f"row {v_row} is within {HORIZON_ROW_GUARD_PX} px of the horizon row"
        )
    return height * cam.fy / dv


@dataclass(frozen=True)
class TrackedPoints:
    """Feature tracks with their triangulated 3D points.

    `pixels` are the features in the earlier frame, `pixels_next` the same
    features in the later frame, `xyz` the triangulated points expressed in
    the earlier camera frame. The y-coordinate of a road point is its height
    below the camera and z is its depth.
    """

    pixels: np.ndarray
    pixels_next: np.ndarray
    xyz: np.ndarray

    def __post_init__(self):
        pixels = as_float_array(self.pixels, "pixels", shape=(-1, 2))
        pixels_next = as_float_array(self.pixels_next, "pixels_next", shape=(-1, 2))
        xyz = as_float_array(self.xyz, "xyz", shape=(-1, 3))
        if not (len(pixels) == len(pixels_next) == len(xyz)):
            raise ValueError("pixels, pixels_next and xyz must have equal lengths")
        for arr in (pixels, pixels_next, xyz):
            arr.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "pixels_next", pixels_next)
        object.__setattr__(self, "xyz", xyz)

    @classmethod
    def empty(cls):
        return cls(np.empty((0, 2)), np.empty((0, 2)), np.empty((0, 3)))

    def __len__(self):
        return len(self.xyz)

    def __getitem__(self, index) -> "TrackedPoints":
        return TrackedPoints(
            self.pixels[index], self.pixels_next[index], self.xyz[index]
        )

    @property
    def heights(self):
        return self.xyz[:, 1]

    @property
    def depths(self):
        return self.xyz[:, 2]


@dataclass(frozen=True)
class Trajectory:
    """Ordered world-from-camera poses."""

    poses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise ValueError("trajectory must contain at least one pose")
        if not all(isinstance(p, Pose) for p in poses):
            raise TypeError("trajectory entries must be Pose instances")
        object.__setattr__(self, "poses", poses)

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return Trajectory(self.poses[index])
        return self.poses[index]

    def __iter__(self):
        return iter(self.poses)

    @property
    def positions(self):
        return np.array([p.t for p in self.poses])
