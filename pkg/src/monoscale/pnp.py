"""Pose refinement by Gauss-Newton on the pixel reprojection error.

The pose being refined is the camera-from-scene map (x_cam = R X + t); the
update is a left-multiplied rotation exponential plus a translation step, and
steps are halved whenever the reprojection cost would increase, so the cost
is non-increasing over accepted iterations.
"""

import numpy as np

from .exceptions import SingularNormalEquationsError, TooFewPointsError
from .geometry import CameraModel, Pose, rotation_exp
from .validation import as_float_array

STEP_TOL = 1e-10
MAX_ITERS = 50
MAX_HALVINGS = 25


def reprojection_cost(points3d, observations, camera, pose):
    """Sum of per-point pixel reprojection distances (L2 norms)."""
    y = points3d @ pose.r.T + pose.t
    if np.any(y[:, 2] <= 0):
        return np.inf
    uv = np.empty_like(observations)
    uv[:, 0] = camera.fx * y[:, 0] / y[:, 2] + camera.cx
    uv[:, 1] = camera.fy * y[:, 1] / y[:, 2] + camera.cy
    return float(np.linalg.norm(uv - observations, axis=1).sum())


def _residuals_and_jacobian(points3d, observations, camera, r, t):
    rotated = points3d @ r.T
    y = rotated + t
    z = y[:, 2]
    if np.any(z <= 0):
        return None, None
    n = len(points3d)
    res = np.empty((n, 2))
    res[:, 0] = camera.fx * y[:, 0] / z + camera.cx - observations[:, 0]
    res[:, 1] = camera.fy * y[:, 1] / z + camera.cy - observations[:, 1]

    # d(pixel)/d(camera point)
    dproj = np.zeros((n, 2, 3))
    dproj[:, 0, 0] = camera.fx / z
    dproj[:, 0, 2] = -camera.fx * y[:, 0] / z**2
    dproj[:, 1, 1] = camera.fy / z
    dproj[:, 1, 2] = -camera.fy * y[:, 1] / z**2

    # d(camera point)/d(omega, dt) for the update R <- exp(w^) R, t <- t + dt:
    # dY/dw = -[R X]x, dY/ddt = I.
    dy = np.zeros((n, 3, 6))
    rx = rotated
    dy[:, 0, 1] = rx[:, 2]
    dy[:, 0, 2] = -rx[:, 1]
    dy[:, 1, 0] = -rx[:, 2]
    dy[:, 1, 2] = rx[:, 0]
    dy[:, 2, 0] = rx[:, 1]
    dy[:, 2, 1] = -rx[:, 0]
    dy[:, :, 3:] = np.eye(3)

    jac = np.einsum("nij,njk->nik", dproj, dy).reshape(n * 2, 6)
    return res.reshape(n * 2), jac


def refine_pose_pnp(points3d, observations, camera: CameraModel, initial: Pose) -> Pose:
    """Refine a camera-from-scene pose from 3D points and their pixels.

    Gauss-Newton with damped step halving; stops when the applied step norm
    drops below STEP_TOL or after MAX_ITERS iterations. Raises
    SingularNormalEquationsError when the normal equations are rank
    deficient (e.g. all points collinear).
    """
    points3d = as_float_array(points3d, "points3d", shape=(-1, 3))
    observations = as_float_array(observations, "observations", shape=(-1, 2))
    if len(points3d) != len(observations):
        raise ValueError("points3d and observations must pair up")
    if len(points3d) < 4:
        raise TooFewPointsError(
            f"pose refinement needs at least 4 points, got {len(points3d)}"
        )

    r = initial.r.copy()
    t = initial.t.copy()
    cost = reprojection_cost(points3d, observations, camera, Pose(r, t))
    if not np.isfinite(cost):
        raise ValueError("initial pose places points behind the camera")

    for _ in range(MAX_ITERS):
        res, jac = _residuals_and_jacobian(points3d, observations, camera, r, t)
        if res is None:
            break
        jtj = jac.T @ jac
        if np.linalg.matrix_rank(jtj, tol=1e-12 * np.abs(jtj).max()) < 6:
            raise SingularNormalEquationsError(
                "rank-deficient normal equations in pose refinement"
            )
        step = np.linalg.solve(jtj, -jac.T @ res)

        accepted = False
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            w = scale * step[:3]
            dt = scale * step[3:]
            r_new = rotation_exp(w) @ r
            t_new = t + dt
            new_cost = reprojection_cost(
                points3d, observations, camera, Pose(r_new, t_new)
            )
            if new_cost <= cost:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break
        r, t = r_new, t_new
        cost = new_cost
        if np.linalg.norm(scale * step) < STEP_TOL:
            break
    return Pose(r, t)
