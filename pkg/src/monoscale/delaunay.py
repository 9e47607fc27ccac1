"""Delaunay triangulation of image points via Bowyer-Watson insertion.

Insertion order is the (deduplicated) input order, so the triangulation is
deterministic. Triangles returned index into the *original* point array;
duplicate points never appear in any triangle.
"""

import numpy as np

from .exceptions import CollinearPointsError, TooFewPointsError
from .validation import as_float_array

DEDUP_TOL_PX = 1e-6
# Relative slack on the strict in-circumcircle test; keeps cocircular
# configurations (grids) from flip-flopping between equivalent diagonals.
INCIRCLE_REL_TOL = 1e-12


def _dedup_keep_first(points):
    kept = []
    for i, p in enumerate(points):
        if kept:
            d2 = np.sum((points[kept] - p) ** 2, axis=1)
            if d2.min() <= DEDUP_TOL_PX**2:
                continue
        kept.append(i)
    return np.asarray(kept, dtype=np.intp)


def _circumcircles(points, tris):
    """Circumcenter and squared radius for each (M, 3) index triangle."""
    a = points[tris[:, 0]]
    b = points[tris[:, 1]]
    c = points[tris[:, 2]]
    d = 2.0 * (
        a[:, 0] * (b[:, 1] - c[:, 1])
        + b[:, 0] * (c[:, 1] - a[:, 1])
        + c[:, 0] * (a[:, 1] - b[:, 1])
    )
    a2 = np.sum(a**2, axis=1)
    b2 = np.sum(b**2, axis=1)
    c2 = np.sum(c**2, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (
            a2 * (b[:, 1] - c[:, 1])
            + b2 * (c[:, 1] - a[:, 1])
            + c2 * (a[:, 1] - b[:, 1])
        ) / d
        uy = (
            a2 * (c[:, 0] - b[:, 0])
            + b2 * (a[:, 0] - c[:, 0])
            + c2 * (b[:, 0] - a[:, 0])
        ) / d
    center = np.stack([ux, uy], axis=1)
    r2 = np.sum((center - a) ** 2, axis=1)
    degenerate = ~np.isfinite(r2)
    r2[degenerate] = np.inf
    center[degenerate] = 0.0
    return center, r2


class _TriangleStore:
    """Growable arrays of live triangles with cached circumcircles."""

    def __init__(self, points, capacity):
        self.points = points
        self.tris = np.zeros((capacity, 3), dtype=np.intp)
        self.center = np.zeros((capacity, 2))
        self.r2 = np.zeros(capacity)
        self.alive = np.zeros(capacity, dtype=bool)
        self.n = 0

    def _grow(self, extra):
        need = self.n + extra
        if need <= len(self.tris):
            return
        cap = max(need, 2 * len(self.tris))
        self.tris = np.resize(self.tris, (cap, 3))
        self.center = np.resize(self.center, (cap, 2))
        self.r2 = np.resize(self.r2, cap)
        alive = np.zeros(cap, dtype=bool)
        alive[: self.n] = self.alive[: self.n]
        self.alive = alive

    def add(self, tris):
        tris = np.atleast_2d(np.asarray(tris, dtype=np.intp))
        self._grow(len(tris))
        center, r2 = _circumcircles(self.points, tris)
        sl = slice(self.n, self.n + len(tris))
        self.tris[sl] = tris
        self.center[sl] = center
        self.r2[sl] = r2
        self.alive[sl] = True
        self.n += len(tris)

    def bad_for(self, p):
        d2 = np.sum((self.center[: self.n] - p) ** 2, axis=1)
        inside = d2 < self.r2[: self.n] * (1.0 - INCIRCLE_REL_TOL)
        return np.nonzero(inside & self.alive[: self.n])[0]


def delaunay(points2d):
    """Triangulate 2D points; returns (T, 3) vertex indices, CCW oriented.

    Points closer than ``DEDUP_TOL_PX`` to an earlier point are dropped
    (first occurrence wins). Raises TooFewPointsError with fewer than three
    unique points and CollinearPointsError when all unique points lie on a
    line.
    """
    points2d = as_float_array(points2d, "points2d", shape=(-1, 2))
    kept = _dedup_keep_first(points2d)
    if len(kept) < 3:
        raise TooFewPointsError(
            f"need at least 3 unique points, got {len(kept)}"
        )
    pts = points2d[kept]
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] <= 1e-9 * sv[0]:
        raise CollinearPointsError("all points are collinear")

    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    mid = (lo + hi) / 2.0
    span = max(hi[0] - lo[0], hi[1] - lo[1], 1.0)
    m = 64.0 * span
    super_pts = np.array(
        [
            [mid[0] - m, mid[1] - m],
            [mid[0] + m, mid[1] - m],
            [mid[0], mid[1] + m],
        ]
    )
    n = len(pts)
    all_pts = np.vstack([pts, super_pts])

    store = _TriangleStore(all_pts, capacity=4 * n + 16)
    store.add([[n, n + 1, n + 2]])

    for i in range(n):
        p = all_pts[i]
        bad = store.bad_for(p)
        # Cavity boundary: edges of bad triangles that appear exactly once.
        edge_count = {}
        for row in store.tris[bad]:
            for a, b in ((row[0], row[1]), (row[1], row[2]), (row[2], row[0])):
                key = (a, b) if a < b else (b, a)
                edge_count[key] = edge_count.get(key, 0) + 1
        store.alive[bad] = False
        new_tris = [(a, b, i) for (a, b), cnt in edge_count.items() if cnt == 1]
        store.add(new_tris)

    live = store.tris[: store.n][store.alive[: store.n]]
    real = live[(live < n).all(axis=1)]

    # Map back to original indices and orient counter-clockwise in (u, v).
    tris = kept[real]
    a = points2d[tris[:, 0]]
    b = points2d[tris[:, 1]]
    c = points2d[tris[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        c[:, 0] - a[:, 0]
    )
    flip = cross < 0
    tris[flip, 1], tris[flip, 2] = tris[flip, 2].copy(), tris[flip, 1].copy()

    # Canonical form: rotate each triangle so its smallest index leads
    # (orientation preserved), then sort rows.
    shift = np.argmin(tris, axis=1)
    cols = (np.arange(3)[None, :] + shift[:, None]) % 3
    tris = np.take_along_axis(tris, cols, axis=1)
    order = np.lexsort((tris[:, 2], tris[:, 1], tris[:, 0]))
    return tris[order]
