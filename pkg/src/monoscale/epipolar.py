"""Two-frame relative motion: normalized eight-point algorithm inside RANSAC,
essential-matrix decomposition with the positive-depth (cheirality) test.

Correspondences are (N, 4) arrays ``[u_prev, v_prev, u_next, v_next]``. The
recovered `RelativeMotion` stores the rotation mapping earlier-frame
coordinates into the later frame together with the unit direction the camera
moved along, expressed in the earlier frame.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import (
    AmbiguousCheiralityError,
    DegenerateConfigurationError,
    InsufficientMatchesError,
)
from .geometry import CameraModel
from .triangulation import dlt_triangulate
from .validation import as_float_array, check_random_state


@dataclass(frozen=True)
class RelativeMotion:
    """Scale-free relative motion between consecutive frames.

    `r_map` maps earlier-frame coordinates to the later frame
    (X_next = r_map @ X_prev + t_map); `direction` is the unit displacement
    of the camera center in earlier-frame coordinates, so forward driving
    gives direction (0, 0, 1).
    """

    r_map: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        r = as_float_array(self.r_map, "r_map", shape=(3, 3))
        d = as_float_array(self.direction, "direction", shape=(3,))
        r.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "r_map", r)
        object.__setattr__(self, "direction", d)

    @property
    def t_map(self):
        return -self.r_map @ self.direction


def essential_from_motion(motion: RelativeMotion):
    """Essential matrix (up to scale) consistent with x_nextᵀ E x_prev = 0."""
    d = motion.direction
    return motion.r_map @ np.array(
        [[0.0, -d[2], d[1]], [d[2], 0.0, -d[0]], [-d[1], d[0], 0.0]]
    )


def _hartley_normalize(xy):
    centroid = xy.mean(axis=0)
    d = np.linalg.norm(xy - centroid, axis=1).mean()
    s = np.sqrt(2.0) / max(d, 1e-12)
    t = np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )
    return t


def eight_point(rays_a, rays_b):
    """Essential matrix from >= 8 calibrated ray pairs (x_bᵀ E x_a = 0).

    Applies Hartley normalization, solves the homogeneous system, then
    enforces the (s, s, 0) singular-value structure. Returns E with unit
    non-zero singular values, or None for degenerate systems.
    """
    t_a = _hartley_normalize(rays_a[:, :2])
    t_b = _hartley_normalize(rays_b[:, :2])
    na = rays_a @ t_a.T
    nb = rays_b @ t_b.T
    design = (nb[:, :, None] * na[:, None, :]).reshape(len(na), 9)
    _, s, vt = np.linalg.svd(design)
    e = vt[-1].reshape(3, 3)
    e = t_b.T @ e @ t_a
    u, sv, vt = np.linalg.svd(e)
    if not np.isfinite(sv).all() or sv[1] < 1e-14:
        return None
    return u @ np.diag([1.0, 1.0, 0.0]) @ vt


def sampson_distances(f, px_a, px_b):
    """First-order geometric (Sampson) distance in pixels for each pair."""
    ha = np.hstack([px_a, np.ones((len(px_a), 1))])
    hb = np.hstack([px_b, np.ones((len(px_b), 1))])
    fa = ha @ f.T  # rows F @ x_a
    fb = hb @ f  # rows Fᵀ @ x_b
    num = np.einsum("ij,ij->i", hb, fa)
    den = fa[:, 0] ** 2 + fa[:, 1] ** 2 + fb[:, 0] ** 2 + fb[:, 1] ** 2
    return np.abs(num) / np.sqrt(np.maximum(den, 1e-300))


def decompose_essential(e, matches, camera: CameraModel) -> RelativeMotion:
    """Pick the (R, t) pair with maximal positive-depth support.

    `matches` should contain inlier correspondences only; raises
    AmbiguousCheiralityError when two candidates tie for the best vote.
    """
    matches = as_float_array(matches, "matches", shape=(-1, 4))
    if len(matches) == 0:
        raise InsufficientMatchesError("cheirality test needs at least one match")
    rays_a = camera.normalized_rays(matches[:, :2])
    rays_b = camera.normalized_rays(matches[:, 2:])

    u, _, vt = np.linalg.svd(e)
    if np.linalg.det(u) < 0:
        u = -u
    if np.linalg.det(vt) < 0:
        vt = -vt
    w = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    rotations = (u @ w @ vt, u @ w.T @ vt)
    t_units = (u[:, 2], -u[:, 2])

    votes = []
    candidates = []
    for r_map in rotations:
        for t_map in t_units:
            _, za, zb, valid = dlt_triangulate(r_map, t_map, rays_a, rays_b)
            votes.append(int(np.sum(valid & (za > 0) & (zb > 0))))
            candidates.append((r_map, t_map))
    order = np.argsort(votes)[::-1]
    if votes[order[0]] == 0 or votes[order[0]] == votes[order[1]]:
        raise AmbiguousCheiralityError(
            f"cheirality votes {sorted(votes, reverse=True)} do not single out a motion"
        )
    r_map, t_map = candidates[order[0]]
    direction = -r_map.T @ t_map
    direction = direction / np.linalg.norm(direction)
    return RelativeMotion(r_map, direction)


class EssentialMatrixRansac(BaseEstimator):
    """Essential-matrix RANSAC over pixel correspondences.

    Parameters
    ----------
    camera : CameraModel
        Intrinsics used to calibrate the correspondences.
    n_iters : int
        Maximum RANSAC iterations.
    sampson_px : float
        Inlier threshold on the Sampson distance, in pixels.
    min_disparity_px : float
        Median pixel disparity below which the pair is declared degenerate
        (no parallax, e.g. pure rotation or a stationary camera).
    confidence : float
        Early-exit confidence for the adaptive iteration count.
    random_state : int or numpy Generator
        Seed; identical input and seed give bit-identical results.

    Attributes (after ``fit``)
    --------------------------
    essential_ : (3, 3) essential matrix, unit non-zero singular values.
    inlier_mask_ : boolean mask over the input correspondences.
    motion_ : RelativeMotion decomposed from the final model.
    n_iterations_ : iterations actually run.
    """

    def __init__(
        self,
        camera=None,
        n_iters=200,
        sampson_px=1.0,
        min_disparity_px=1.0,
        confidence=0.999,
        random_state=0,
    ):
        self.camera = camera
        self.n_iters = n_iters
        self.sampson_px = sampson_px
        self.min_disparity_px = min_disparity_px
        self.confidence = confidence
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.camera is None:
            raise ValueError("camera must be set before fitting")
        X = as_float_array(X, "X", shape=(-1, 4))
        n = len(X)
        if n < 8:
            raise InsufficientMatchesError(f"need at least 8 matches, got {n}")
        disparity = np.linalg.norm(X[:, 2:] - X[:, :2], axis=1)
        if np.median(disparity) < self.min_disparity_px:
            raise DegenerateConfigurationError(
                f"median disparity {np.median(disparity):.3f} px is below "
                f"{self.min_disparity_px} px; no usable parallax"
            )

        cam = self.camera
        k = cam.matrix
        k_inv = np.linalg.inv(k)
        rays_a = cam.normalized_rays(X[:, :2])
        rays_b = cam.normalized_rays(X[:, 2:])
        rng = check_random_state(self.random_state)

        best_count = -1
        best_mask = None
        best_e = None
        n_done = 0
        for it in range(int(self.n_iters)):
            n_done = it + 1
            sample = rng.choice(n, size=8, replace=False)
            e = eight_point(rays_a[sample], rays_b[sample])
            if e is None:
                continue
            f = k_inv.T @ e @ k_inv
            d = sampson_distances(f, X[:, :2], X[:, 2:])
            mask = d <= self.sampson_px
            count = int(mask.sum())
            if count > best_count:
                best_count = count
                best_mask = mask
                best_e = e
            ratio = best_count / n
            if ratio >= 1.0:
                break
            if ratio > 0:
                needed = np.log(max(1.0 - self.confidence, 1e-300)) / np.log(
                    1.0 - ratio**8
                )
                if n_done >= needed:
                    break
        if best_mask is None or best_count < 8:
            raise DegenerateConfigurationError(
                "no RANSAC hypothesis reached 8 inliers"
            )

        # Refit on the consensus set; keep the refit only if it does not
        # lose support (an all-inlier refit can collapse when the inliers
        # are nearly coplanar, e.g. road-dominated scenes).
        e, final_mask = best_e, best_mask
        e_refit = eight_point(rays_a[best_mask], rays_b[best_mask])
        if e_refit is not None:
            f = k_inv.T @ e_refit @ k_inv
            refit_mask = sampson_distances(f, X[:, :2], X[:, 2:]) <= self.sampson_px
            if int(refit_mask.sum()) >= best_count:
                e, final_mask = e_refit, refit_mask

        self.essential_ = e
        self.inlier_mask_ = final_mask
        self.n_iterations_ = n_done
        self.motion_ = decompose_essential(e, X[final_mask], cam)
        return self
