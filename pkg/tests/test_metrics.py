import numpy as np
import pytest

from monoscale import Pose, Similarity, Trajectory, ate_rmse, rpe_kitti
from monoscale.exceptions import LengthMismatchError, PathTooShortError
from monoscale.geometry import rotation_about_y
from monoscale.metrics import KITTI_LENGTHS_M, evaluate_trajectories

from conftest import random_rotation


def straight_trajectory(n, step=1.0):
    return Trajectory(
        [Pose(np.eye(3), [0.0, 0.0, step * k]) for k in range(n)]
    )


def curvy_trajectory(n=20, step=10.0, seed=0):
    rng = np.random.default_rng(seed)
    poses = [Pose.identity()]
    for _ in range(n - 1):
        delta = Pose(
            rotation_about_y(rng.uniform(-0.1, 0.1)),
            [rng.uniform(-1, 1), rng.uniform(-0.3, 0.3), step],
        )
        poses.append(poses[-1].compose(delta))
    return Trajectory(poses)


# --- brute-force oracle ------------------------------------------------------


def oracle_rpe(est_mats, ref_mats, lengths=KITTI_LENGTHS_M):
    """Independent RPE evaluator on 4x4 matrices with explicit loops."""
    n = len(ref_mats)
    dist = [0.0]
    for k in range(1, n):
        dist.append(
            dist[-1] + float(np.linalg.norm(ref_mats[k][:3, 3] - ref_mats[k - 1][:3, 3]))
        )
    t_ratios, angles, arcs = [], [], []
    for first in range(n):
        for length in lengths:
            last = None
            for k in range(first, n):
                if dist[k] > dist[first] + length:
                    last = k
                    break
            if last is None:
                continue
            actual = dist[last] - dist[first]
            d_ref = np.linalg.inv(ref_mats[first]) @ ref_mats[last]
            d_est = np.linalg.inv(est_mats[first]) @ est_mats[last]
            err = np.linalg.inv(d_est) @ d_ref
            t_ratios.append(float(np.linalg.norm(err[:3, 3])) / actual)
            c = (np.trace(err[:3, :3]) - 1.0) / 2.0
            angles.append(float(np.arccos(np.clip(c, -1.0, 1.0))))
            arcs.append(actual)
    if not t_ratios:
        raise AssertionError("oracle found no feasible subsequence")
    return (
        100.0 * float(np.mean(t_ratios)),
        float(np.degrees(np.sum(angles)) / np.sum(arcs)),
    )


def oracle_ate_unaligned(est, ref):
    total = 0.0
    for a, b in zip(est, ref):
        total += float(np.sum((a.t - b.t) ** 2))
    return float(np.sqrt(total / len(est)))


# --- ATE --------------------------------------------------------------------


def test_ate_identical_is_zero():
    traj = curvy_trajectory()
    assert ate_rmse(traj, traj, align=False) == 0.0
    assert ate_rmse(traj, traj, align=True) == pytest.approx(0.0, abs=1e-12)


def test_ate_alignment_absorbs_rigid_shift():
    traj = curvy_trajectory(seed=1)
    shifted = Trajectory([Pose(p.r, p.t + np.array([1.0, 0.0, 0.0])) for p in traj])
    assert ate_rmse(shifted, traj, align=True) < 1e-12
    assert ate_rmse(shifted, traj, align=False) == pytest.approx(1.0)


def test_ate_matches_hand_computation():
    ref = straight_trajectory(10)
    est_poses = []
    offsets = np.linspace(0, 0.9, 10)
    for pose, off in zip(ref, offsets):
        est_poses.append(Pose(pose.r, pose.t + np.array([off, 0.0, 0.0])))
    est = Trajectory(est_poses)
    expected = float(np.sqrt(np.mean(offsets**2)))
    assert ate_rmse(est, ref, align=False) == pytest.approx(expected, abs=1e-15)
    assert ate_rmse(est, ref, align=False) == pytest.approx(
        oracle_ate_unaligned(est, ref), abs=1e-15
    )


def test_ate_invariant_under_similarity_of_estimate():
    rng = np.random.default_rng(2)
    ref = curvy_trajectory(seed=3)
    est = curvy_trajectory(seed=4)
    base = ate_rmse(est, ref, align=True)
    sim = Similarity(2.5, random_rotation(rng), rng.normal(0, 20, 3))
    warped = Trajectory(
        [Pose(sim.r @ p.r, sim.apply(p.t[None, :])[0]) for p in est]
    )
    assert ate_rmse(warped, ref, align=True) == pytest.approx(base, abs=1e-9)


def test_ate_length_mismatch():
    with pytest.raises(LengthMismatchError):
        ate_rmse(straight_trajectory(5), straight_trajectory(6))


# --- RPE ---------------------------------------------------------------------


def test_rpe_identical_is_zero():
    traj = straight_trajectory(300)  # 299 m: only the 100/200 m lengths fit
    trans, rot = rpe_kitti(traj, traj)
    assert trans == 0.0
    assert rot == 0.0


def test_rpe_five_percent_straight_path():
    ref = straight_trajectory(901)  # 900 m of unit steps
    est = straight_trajectory(901, step=1.05)
    trans, rot = rpe_kitti(est, ref)
    assert 4.9 <= trans <= 5.1
    assert rot == pytest.approx(0.0, abs=1e-12)


def test_rpe_matches_brute_force_oracle():
    ref = curvy_trajectory(n=20, step=10.0, seed=5)
    rng = np.random.default_rng(6)
    est_poses = [Pose.identity()]
    for k in range(1, 20):
        delta = ref[k - 1].inverse().compose(ref[k])
        noisy = Pose(
            rotation_about_y(rng.normal(0, 0.01)) @ delta.r,
            delta.t * rng.uniform(0.9, 1.1),
        )
        est_poses.append(est_poses[-1].compose(noisy))
    est = Trajectory(est_poses)
    got = rpe_kitti(est, ref)
    expected = oracle_rpe([p.matrix for p in est], [p.matrix for p in ref])
    assert got[0] == pytest.approx(expected[0], rel=1e-12)
    assert got[1] == pytest.approx(expected[1], rel=1e-12)


def test_rpe_path_too_short():
    with pytest.raises(PathTooShortError):
        rpe_kitti(straight_trajectory(5), straight_trajectory(5))


def test_rpe_invariant_under_global_rigid_transform():
    rng = np.random.default_rng(7)
    ref = curvy_trajectory(n=25, step=8.0, seed=8)
    est = curvy_trajectory(n=25, step=8.0, seed=9)
    base = rpe_kitti(est, ref)
    r = random_rotation(rng)
    t = rng.normal(0, 50, 3)
    moved = Trajectory([Pose(r @ p.r, r @ p.t + t) for p in est])
    out = rpe_kitti(moved, ref)
    assert out[0] == pytest.approx(base[0], rel=1e-9)
    assert out[1] == pytest.approx(base[1], rel=1e-9)


def test_evaluate_report_fields():
    ref = curvy_trajectory(n=30, step=8.0, seed=10)
    report = evaluate_trajectories(ref, ref)
    assert report.ate_rmse_m == pytest.approx(0.0, abs=1e-9)
    assert report.rpe_trans_percent == pytest.approx(0.0, abs=1e-12)
    assert report.rpe_rot_deg_per_m == pytest.approx(0.0, abs=1e-12)
    assert report.aligned_scale == pytest.approx(1.0, rel=1e-12)
    assert report.n_frames == 30
    parsed = __import__("json").loads(report.to_json())
    assert set(parsed) == {
        "ate_rmse_m",
        "rpe_trans_percent",
        "rpe_rot_deg_per_m",
        "aligned_scale",
        "n_frames",
    }
