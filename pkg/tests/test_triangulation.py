import numpy as np
import pytest

from monoscale import RelativeMotion, triangulate
from monoscale.geometry import rotation_about_y

from conftest import random_rotation


def exact_matches(camera, motion, points, baseline=1.0):
    r_map, t_map = motion.r_map, baseline * motion.t_map
    pa = camera.project(points)
    pb = camera.project(points @ r_map.T + t_map)
    return np.hstack([pa, pb])


@pytest.fixture
def motion():
    d = np.array([0.2, -0.05, 1.0])
    return RelativeMotion(rotation_about_y(np.deg2rad(4.0)), d / np.linalg.norm(d))


def scene_points(seed=0, n=40):
    rng = np.random.default_rng(seed)
    return np.column_stack(
        [rng.uniform(-5, 5, n), rng.uniform(-2, 2, n), rng.uniform(4, 20, n)]
    )


def test_exact_recovery_of_known_points(camera, motion):
    pts = scene_points(1)
    matches = exact_matches(camera, motion, pts)
    out = triangulate(motion, matches, camera)
    assert len(out) == len(pts)
    np.testing.assert_allclose(out.xyz, pts, atol=1e-9)


def test_reprojection_under_1e6_px(camera, motion):
    pts = scene_points(2)
    matches = exact_matches(camera, motion, pts)
    out = triangulate(motion, matches, camera)
    err_a = np.abs(camera.project(out.xyz) - out.pixels)
    next_xyz = out.xyz @ motion.r_map.T + motion.t_map
    err_b = np.abs(camera.project(next_xyz) - out.pixels_next)
    assert err_a.max() < 1e-6
    assert err_b.max() < 1e-6


def test_epipole_correspondence_dropped(camera):
    # A match at the epipoles is any point on the baseline: no depth signal.
    motion = RelativeMotion(np.eye(3), np.array([0.0, 0.0, 1.0]))
    epipole = camera.project([0.0, 0.0, 1.0])  # forward epipole = principal pt
    matches = np.concatenate([epipole, epipole]).reshape(1, 4)
    out = triangulate(motion, matches, camera)
    assert len(out) == 0


def test_points_behind_either_camera_dropped(camera):
    motion = RelativeMotion(np.eye(3), np.array([0.0, 0.0, 1.0]))
    good = np.array([1.0, 0.5, 6.0])
    # A point the later camera has passed: positive depth in frame a only.
    passed = np.array([0.3, 0.2, 0.5])
    pa = camera.project(np.vstack([good, passed]))
    r_map, t_map = motion.r_map, motion.t_map
    moved = np.vstack([good, passed]) @ r_map.T + t_map
    # Project the behind-camera point manually (depth is negative).
    pb = np.column_stack(
        [
            camera.fx * moved[:, 0] / moved[:, 2] + camera.cx,
            camera.fy * moved[:, 1] / moved[:, 2] + camera.cy,
        ]
    )
    out = triangulate(motion, np.hstack([pa, pb]), camera)
    assert len(out) == 1
    np.testing.assert_allclose(out.xyz[0], good, atol=1e-9)


def test_depth_ratios_invariant_under_baseline_rescale(camera, motion):
    pts = scene_points(3)
    matches = exact_matches(camera, motion, pts)
    small = triangulate(motion, matches, camera, baseline=1.0)
    large = triangulate(motion, matches, camera, baseline=7.5)
    ratios_small = small.depths / small.depths[0]
    ratios_large = large.depths / large.depths[0]
    np.testing.assert_allclose(ratios_small, ratios_large, rtol=1e-9)
    np.testing.assert_allclose(large.xyz, 7.5 * small.xyz, rtol=1e-9)


def test_random_motions_reconstruction(camera):
    rng = np.random.default_rng(4)
    for _ in range(10):
        r_map = random_rotation(rng, np.deg2rad(6.0))
        d = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1), 1.0])
        d /= np.linalg.norm(d)
        motion = RelativeMotion(r_map, d)
        pts = scene_points(int(rng.integers(1 << 16)), n=25)
        keep = (pts @ r_map.T + motion.t_map)[:, 2] > 0.5
        pts = pts[keep]
        matches = exact_matches(camera, motion, pts)
        out = triangulate(motion, matches, camera)
        np.testing.assert_allclose(out.xyz, pts, atol=1e-8)


def test_empty_matches(camera, motion):
    out = triangulate(motion, np.empty((0, 4)), camera)
    assert len(out) == 0
