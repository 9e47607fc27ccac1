import numpy as np
import pytest

from monoscale import Pose, ScaleTracker, apply_scales, mixed_filter
from monoscale.exceptions import EmptyQueueError, LengthMismatchError
from monoscale.geometry import rotation_about_y
from monoscale.scale import (
    MODE_FIT,
    MODE_PROVISIONAL,
    MODE_REUSE_PLANE,
    MODE_REUSE_SCALE,
)


def oracle_mixed_filter(values, sigma):
    """Direct convolution + median, written independently with plain loops."""
    values = list(map(float, values))
    length = len(values)
    if length == 1:
        return values[0]
    center = (length - 1) / 2.0
    weights = [np.exp(-((k - center) ** 2) / (2.0 * sigma**2)) for k in range(length)]
    total = sum(weights)
    weights = [w / total for w in weights]
    pad_left = (length - 1) // 2
    # Reflect padding without the edge sample (numpy 'reflect' convention).
    extended = values[pad_left:0:-1] + values + values[-2 : -2 - (length // 2) : -1]
    smoothed = []
    for i in range(length):
        smoothed.append(sum(w * extended[i + k] for k, w in enumerate(weights)))
    smoothed.sort()
    return smoothed[(length - 1) // 2]


def test_constant_queue_invariance():
    assert mixed_filter([2.0, 2.0, 2.0, 2.0, 2.0]) == 2.0
    assert mixed_filter([7.25] * 4, sigma=1.0) == 7.25


def test_singleton_queue():
    assert mixed_filter([3.5]) == 3.5


def test_spike_suppression():
    values = [2.0, 2.0, 10.0, 2.0, 2.0]
    out = mixed_filter(values, sigma=5.0)
    assert out < 10.0
    # Median of smoothed values cannot exceed the largest non-spike sample
    # after smoothing: bound it by the oracle's smoothed non-spike maximum.
    center = (5 - 1) / 2.0
    weights = np.exp(-((np.arange(5) - center) ** 2) / 50.0)
    weights /= weights.sum()
    padded = np.pad(np.asarray(values), (2, 2), mode="reflect")
    smoothed = np.correlate(padded, weights, mode="valid")
    non_spike = np.sort(smoothed)[:4]
    assert out <= non_spike.max()


def test_matches_oracle_on_random_queues():
    rng = np.random.default_rng(0)
    for _ in range(300):
        length = int(rng.integers(1, 6))
        values = rng.uniform(0.2, 5.0, length)
        sigma = float(rng.uniform(0.5, 8.0))
        assert mixed_filter(values, sigma) == pytest.approx(
            oracle_mixed_filter(values, sigma), abs=1e-12
        )


def test_output_within_queue_range():
    rng = np.random.default_rng(1)
    for _ in range(500):
        length = int(rng.integers(1, 6))
        values = rng.uniform(0.1, 10.0, length)
        out = mixed_filter(values, sigma=float(rng.uniform(0.5, 10.0)))
        assert values.min() - 1e-12 <= out <= values.max() + 1e-12


def test_empty_queue_raises():
    with pytest.raises(EmptyQueueError):
        mixed_filter([])


# --- tracker -----------------------------------------------------------------


def plane_cloud(height, n=100, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack(
        [rng.uniform(-5, 5, n), np.full(n, height), rng.uniform(4, 20, n)]
    )


def test_tracker_fit_mode(camera):
    tracker = ScaleTracker(camera, random_state=0)
    frame = tracker.update(plane_cloud(0.85))
    assert frame.mode == MODE_FIT
    assert frame.raw == pytest.approx(2.0, rel=1e-6)
    assert frame.filtered == pytest.approx(2.0, rel=1e-6)


def test_tracker_reuse_plane_below_min_points(camera):
    tracker = ScaleTracker(camera, random_state=0)
    tracker.update(plane_cloud(0.85))
    frame = tracker.update(plane_cloud(0.5, n=5))  # 5 < 12: no new fit
    assert frame.mode == MODE_REUSE_PLANE
    assert frame.raw == pytest.approx(2.0, rel=1e-6)


def test_tracker_cold_start_provisional(camera):
    tracker = ScaleTracker(camera, random_state=0)
    frame = tracker.update(np.empty((0, 3)))
    assert frame.mode == MODE_PROVISIONAL
    assert frame.raw == 1.0
    # Next thin frame falls back to the provisional scale, not a plane.
    frame2 = tracker.update(np.empty((0, 3)))
    assert frame2.mode == MODE_REUSE_SCALE
    assert frame2.raw == 1.0


def test_tracker_scale_positive_and_filter_window(camera):
    tracker = ScaleTracker(camera, window=5, random_state=1)
    heights = [0.85, 0.86, 0.84, 0.87, 0.85, 0.85, 0.86]
    for k, h in enumerate(heights):
        frame = tracker.update(plane_cloud(h, seed=k))
        assert frame.raw > 0
        assert frame.filtered > 0
        assert len(tracker.queue) <= 5
    assert frame.filtered == pytest.approx(2.0, rel=0.05)


def test_tracker_deterministic(camera):
    def run():
        tracker = ScaleTracker(camera, random_state=3)
        outs = []
        for k in range(5):
            outs.append(tracker.update(plane_cloud(0.85, seed=k)).filtered)
        return outs

    assert run() == run()


def test_tracker_recovers_after_degenerate_cloud(camera):
    tracker = ScaleTracker(camera, random_state=0)
    # Collinear cloud passes the min-points gate but cannot be fit.
    line = np.outer(np.linspace(4, 20, 20), [0.0, 0.05, 1.0])
    frame = tracker.update(line)
    assert frame.mode == MODE_PROVISIONAL
    frame = tracker.update(plane_cloud(0.85))
    assert frame.mode == MODE_FIT


# --- chaining -----------------------------------------------------------------


def test_apply_scales_identity_with_unit_scales():
    rng = np.random.default_rng(2)
    motions = [
        Pose(rotation_about_y(rng.uniform(-0.1, 0.1)), rng.normal(0, 1, 3))
        for _ in range(10)
    ]
    plain = [Pose.identity()]
    for m in motions:
        plain.append(plain[-1].compose(m))
    traj = apply_scales(motions, [1.0] * len(motions))
    for a, b in zip(traj, plain):
        np.testing.assert_array_equal(a.r, b.r)
        np.testing.assert_array_equal(a.t, b.t)


def test_apply_scales_straight_line_arithmetic():
    motions = [Pose(np.eye(3), [0.0, 0.0, 1.0])] * 10
    traj = apply_scales(motions, [2.0] * 10)
    assert len(traj) == 11
    np.testing.assert_allclose(traj[-1].t, [0.0, 0.0, 20.0])


def test_apply_scales_length_mismatch():
    with pytest.raises(LengthMismatchError):
        apply_scales([Pose.identity()], [1.0, 2.0])
