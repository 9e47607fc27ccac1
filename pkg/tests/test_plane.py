import numpy as np
import pytest

from monoscale import PlaneModel, PlaneRansac, scale_from_plane
from monoscale.exceptions import (
    CollinearPointsError,
    NoConsensusError,
    NonPositiveHeightError,
    TooFewPointsError,
)


def plane_points(n=200, normal=(0.0, 1.0, 0.0), offset=1.7, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    # Build a basis spanning the plane.
    helper = np.array([1.0, 0.0, 0.0])
    if abs(normal @ helper) > 0.9:
        helper = np.array([0.0, 0.0, 1.0])
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    coords = rng.uniform(-10, 10, size=(n, 2))
    pts = offset * normal + coords[:, :1] * e1 + coords[:, 1:] * e2
    if noise:
        pts = pts + rng.normal(0, noise, size=(n, 1)) * normal
    return pts


def lstsq_plane_oracle(pts):
    """Independent least-squares plane via SVD of the centered cloud."""
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid)
    n = vt[-1]
    if n[1] < 0:
        n = -n
    return n, float(n @ centroid)


def test_exact_horizontal_plane():
    pts = plane_points(50)
    fit = PlaneRansac(random_state=0).fit(pts)
    np.testing.assert_allclose(fit.normal_, [0.0, 1.0, 0.0], atol=1e-12)
    assert fit.offset_ == pytest.approx(1.7, abs=1e-12)
    assert fit.inlier_mask_.all()


def test_outlier_free_matches_lstsq_oracle():
    rng = np.random.default_rng(1)
    for trial in range(10):
        normal = rng.normal(size=3)
        normal[1] = abs(normal[1]) + 0.5
        offset = rng.uniform(0.5, 3.0)
        pts = plane_points(80, normal, offset, seed=trial, noise=0.005)
        fit = PlaneRansac(dist_tol=0.05, random_state=trial).fit(pts)
        n_ref, h_ref = lstsq_plane_oracle(pts)
        assert fit.inlier_mask_.all()
        np.testing.assert_allclose(fit.normal_, n_ref, atol=1e-9)
        assert fit.offset_ == pytest.approx(h_ref, abs=1e-9)


def test_forty_percent_outliers():
    rng = np.random.default_rng(2)
    inliers = plane_points(120, offset=1.7, seed=3, noise=0.005)
    outliers = rng.uniform(-8, 8, size=(80, 3)) + np.array([0.0, -2.0, 10.0])
    pts = np.vstack([inliers, outliers])
    fit = PlaneRansac(random_state=4).fit(pts)
    assert abs(fit.offset_ - 1.7) / 1.7 < 0.01
    angle = np.arccos(np.clip(fit.normal_ @ [0.0, 1.0, 0.0], -1, 1))
    assert np.degrees(angle) < 0.5
    true_inliers = fit.inlier_mask_[:120]
    assert true_inliers.sum() >= 0.95 * 120


def test_inlier_residuals_bounded():
    pts = np.vstack(
        [
            plane_points(100, offset=1.2, seed=5, noise=0.01),
            np.random.default_rng(6).uniform(-5, 5, size=(40, 3)),
        ]
    )
    fitter = PlaneRansac(dist_tol=0.03, random_state=7).fit(pts)
    residuals = np.abs(fitter.plane_.residuals(pts[fitter.inlier_mask_]))
    assert (residuals <= fitter.dist_tol).all()


def test_error_paths():
    with pytest.raises(TooFewPointsError):
        PlaneRansac().fit(np.zeros((2, 3)))
    line = np.outer(np.linspace(0, 1, 30), [1.0, 2.0, 3.0])
    with pytest.raises(CollinearPointsError):
        PlaneRansac().fit(line)
    # Scattered points with a tiny tolerance: no consensus.
    cloud = np.random.default_rng(8).uniform(-5, 5, size=(60, 3))
    with pytest.raises(NoConsensusError):
        PlaneRansac(dist_tol=1e-9, min_inliers=30, random_state=9).fit(cloud)


def test_deterministic_for_seed():
    pts = np.vstack(
        [
            plane_points(60, seed=10, noise=0.01),
            np.random.default_rng(11).uniform(-5, 5, size=(30, 3)),
        ]
    )
    a = PlaneRansac(random_state=12).fit(pts)
    b = PlaneRansac(random_state=12).fit(pts)
    np.testing.assert_array_equal(a.normal_, b.normal_)
    assert a.offset_ == b.offset_
    np.testing.assert_array_equal(a.inlier_mask_, b.inlier_mask_)


def test_plane_model_normalization():
    model = PlaneModel([0.0, -2.0, 0.0], -3.4)
    np.testing.assert_allclose(model.normal, [0.0, 1.0, 0.0])
    assert model.offset == pytest.approx(1.7)


def test_scale_from_plane(camera):
    assert scale_from_plane(PlaneModel([0, 1, 0], 1.7), camera) == pytest.approx(1.0)
    assert scale_from_plane(PlaneModel([0, 1, 0], 0.85), camera) == pytest.approx(2.0)
    with pytest.raises(NonPositiveHeightError):
        scale_from_plane(PlaneModel([1, 0, 0], 0.0), camera)


def test_recovered_scale_from_unscaled_plane(camera):
    # Reconstruction at half size: fitted height 0.85 -> scale 2 within 2%.
    pts = plane_points(150, offset=1.7, seed=13, noise=0.01) / 2.0
    fit = PlaneRansac(random_state=14).fit(pts)
    scale = scale_from_plane(fit.plane_, camera)
    assert scale == pytest.approx(2.0, rel=0.02)
