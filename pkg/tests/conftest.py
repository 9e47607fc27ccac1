import numpy as np
import pytest

from monoscale import CameraModel, Pose


@pytest.fixture
def camera():
    return CameraModel(fx=700.0, fy=700.0, cx=640.0, cy=360.0, height_m=1.7)


def random_rotation(rng, max_angle_rad=np.pi):
    """Uniform-axis rotation with angle up to max_angle_rad."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-max_angle_rad, max_angle_rad)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def random_pose(rng, max_angle_rad=np.pi, t_scale=1.0):
    return Pose(random_rotation(rng, max_angle_rad), rng.normal(size=3) * t_scale)
