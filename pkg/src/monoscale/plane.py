"""Robust road-plane fitting and the height-ratio scale."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import (
    CollinearPointsError,
    NoConsensusError,
    NonPositiveHeightError,
    TooFewPointsError,
)
from .geometry import CameraModel
from .validation import as_float_array, check_random_state

# A plane closer to the camera center than this cannot anchor a height ratio.
MIN_PLANE_OFFSET = 1e-6


@dataclass(frozen=True)
class PlaneModel:
    """Plane normal . X = offset with a unit normal, y-component >= 0."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_float_array(self.normal, "normal", shape=(3,))
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            raise ValueError("plane normal must be non-zero")
        n = n / norm
        h = float(self.offset) / norm
        if n[1] < 0:
            n = -n
            h = -h
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", h)

    def residuals(self, xyz):
        xyz = as_float_array(xyz, "xyz", shape=(-1, 3))
        return xyz @ self.normal - self.offset


def _least_squares_plane(xyz):
    centroid = xyz.mean(axis=0)
    centered = xyz - centroid
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    normal = vecs[:, 0]
    return PlaneModel(normal, float(normal @ centroid))


def scale_from_plane(plane: PlaneModel, camera: CameraModel):
    """Metric scale = measured camera height / fitted plane offset."""
    if plane.offset <= MIN_PLANE_OFFSET:
        raise NonPositiveHeightError(
            f"plane offset {plane.offset:.3e} cannot define a height ratio"
        )
    return camera.height_m / plane.offset


class PlaneRansac(BaseEstimator):
    """RANSAC plane fit with a least-squares refit on the consensus set.

    Parameters
    ----------
    n_iters : int
        Number of 3-point hypotheses to draw.
    dist_tol : float
        Inlier threshold on point-to-plane distance, in the input units.
    min_inliers : int
        Minimum consensus size; below it the fit raises NoConsensusError.
    random_state : int or numpy Generator
        Seed; identical input and seed give bit-identical results.

    Attributes (after ``fit``)
    --------------------------
    plane_ : PlaneModel
    normal_, offset_ : convenience views of the fitted plane.
    inlier_mask_ : boolean mask against the final (refit) plane.
    """

    def __init__(self, n_iters=200, dist_tol=0.03, min_inliers=6, random_state=0):
        self.n_iters = n_iters
        self.dist_tol = dist_tol
        self.min_inliers = min_inliers
        self.random_state = random_state

    def fit(self, X, y=None):
        X = as_float_array(X, "X", shape=(-1, 3))
        n = len(X)
        if n < 3:
            raise TooFewPointsError(f"plane fit needs at least 3 points, got {n}")
        centered = X - X.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        if sv[1] <= 1e-9 * sv[0]:
            raise CollinearPointsError("all points are collinear; no unique plane")

        rng = check_random_state(self.random_state)
        samples = np.array(
            [rng.choice(n, size=3, replace=False) for _ in range(int(self.n_iters))]
        )
        a = X[samples[:, 0]]
        b = X[samples[:, 1]]
        c = X[samples[:, 2]]
        normals = np.cross(b - a, c - a)
        norms = np.linalg.norm(normals, axis=1)
        valid = norms > 1e-12
        if not valid.any():
            raise NoConsensusError("every sampled triple was degenerate")
        normals = normals[valid] / norms[valid, None]
        offsets = np.einsum("ij,ij->i", normals, a[valid])
        dists = np.abs(X @ normals.T - offsets)  # (n, hypotheses)
        counts = (dists <= self.dist_tol).sum(axis=0)
        best = int(np.argmax(counts))
        if counts[best] < self.min_inliers:
            raise NoConsensusError(
                f"best consensus {counts[best]} below min_inliers={self.min_inliers}"
            )
        support = dists[:, best] <= self.dist_tol

        plane = _least_squares_plane(X[support])
        self.plane_ = plane
        self.normal_ = plane.normal
        self.offset_ = plane.offset
        self.inlier_mask_ = np.abs(plane.residuals(X)) <= self.dist_tol
        return self
