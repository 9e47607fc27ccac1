"""Closed-form similarity alignment between point sets / trajectories."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateGeometryError, LengthMismatchError
from .geometry import Similarity
from .validation import as_float_array


def umeyama_alignment(src, dst, with_scale=True) -> Similarity:
    """Least-squares similarity s R src + t ~= dst.

    Closed-form solution over paired (N, 3) positions; `with_scale=False`
    fixes s = 1 (rigid, 6-DOF). Needs at least three non-collinear points
    on each side.
    """
    src = as_float_array(src, "src", shape=(-1, 3))
    dst = as_float_array(dst, "dst", shape=(-1, 3))
    if len(src) != len(dst):
        raise LengthMismatchError(f"{len(src)} source vs {len(dst)} target points")
    n = len(src)
    if n < 3:
        raise DegenerateGeometryError(f"alignment needs >= 3 points, got {n}")

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    src_c = src - mu_src
    dst_c = dst - mu_dst
    for name, arr in (("source", src_c), ("target", dst_c)):
        sv = np.linalg.svd(arr, compute_uv=False)
        if sv[1] <= 1e-9 * max(sv[0], 1e-300):
            raise DegenerateGeometryError(f"{name} positions are collinear")

    cov = dst_c.T @ src_c / n
    u, d, vt = np.linalg.svd(cov)
    s = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s[2, 2] = -1.0
    r = u @ s @ vt
    if with_scale:
        var_src = np.mean(np.sum(src_c**2, axis=1))
        scale = float(np.trace(np.diag(d) @ s) / var_src)
    else:
        scale = 1.0
    t = mu_dst - scale * (r @ mu_src)
    return Similarity(scale, r, t)


class TrajectoryAligner(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit a similarity from X to y, then transform X.

    X and y are (N, 3) position arrays; after `fit` the solved transform is
    available as `similarity_`.
    """

    def __init__(self, with_scale=True):
        self.with_scale = with_scale

    def fit(self, X, y):
        self.similarity_ = umeyama_alignment(X, y, with_scale=self.with_scale)
        return self

    def transform(self, X):
        return self.similarity_.apply(as_float_array(X, "X", shape=(-1, 3)))
