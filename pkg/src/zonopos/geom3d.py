"""Convex-geometry kernels shared across the set pipeline.

All routines work on plain float64 arrays in a local Cartesian frame
(meters).  Polytopes are handled in vertex representation; most of the
pipeline only ever needs three primitives on convex sets:

* slice a convex polytope with a plane (``section_with_plane``),
* clip a convex polytope with a halfspace (``clip_points_halfspace``),
* recover the exact vertex set of a convex hull, degenerate ranks
  included (``hull_vertices``).

Slicing and clipping never require a prior hull: for a point cloud P,
``conv(P) ∩ {a·x = b}`` is spanned by the on-plane points of P plus the
plane crossings of all (positive, negative) point pairs, so we can fold
halfspaces over raw vertex sets and hull once at the end.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

# Absolute vertex-merge tolerance in meters: city coordinates carry
# centimeter-grade meaning, so 1e-6 m separates real vertices from noise.
TOL_GEOM = 1e-6
# Constraint-feasibility tolerance for membership checks (dimensionless).
TOL_FEAS = 1e-7
# 2D regions thinner than this are tolerance noise, not geometry.
SLIVER_AREA = 1e-6
# Relative singular-value cutoff used to decide the affine rank of a
# vertex set (a sweep 1e5 m long collapses widths below ~1e-4 m).
RANK_REL = 1e-9


def as_points(pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"expected a (k, n) point array, got shape {a.shape}")
    return a


def lex_sort(pts: np.ndarray) -> np.ndarray:
    """Sort points lexicographically (x, then y, then z)."""
    pts = as_points(pts)
    if len(pts) <= 1:
        return pts
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def dedup_points(pts: np.ndarray, tol: float = TOL_GEOM) -> np.ndarray:
    """Merge points closer than ``tol`` (keeps the first in lex order)."""
    pts = lex_sort(pts)
    if len(pts) <= 1:
        return pts
    out = np.empty_like(pts)
    out[0] = pts[0]
    n = 1
    for p in pts[1:]:
        if (np.linalg.norm(out[:n] - p, axis=1) > tol).all():
            out[n] = p
            n += 1
    return out[:n].copy()


def affine_span(pts: np.ndarray, rank_rel: float = RANK_REL):
    """Origin and orthonormal basis of the affine hull of ``pts``.

    Returns (origin, basis) where basis is (n, r) with r the affine rank.
    """
    pts = as_points(pts)
    origin = pts.mean(axis=0)
    centered = pts - origin
    if len(pts) == 1:
        return origin, np.zeros((pts.shape[1], 0))
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] <= 0.0:
        return origin, np.zeros((pts.shape[1], 0))
    cutoff = max(svals[0] * rank_rel, 1e-12)
    r = int(np.sum(svals > cutoff))
    return origin, vt[:r].T


def convex_hull_2d_indices(pts2: np.ndarray) -> np.ndarray:
    """Indices of the 2D convex hull vertices in CCW order.

    qhull-backed for robustness (clip cascades produce jittered
    near-duplicate vertices that defeat naive chain algorithms); inputs
    of affine rank < 2 fall back to the extreme points of the dominant
    direction (2 indices for a segment, 1 for a point).
    """
    pts2 = as_points(pts2)
    if len(pts2) == 0:
        return np.zeros(0, dtype=int)
    if len(pts2) <= 2:
        if len(pts2) == 2 and np.array_equal(pts2[0], pts2[1]):
            return np.array([0])
        return np.arange(len(pts2))
    try:
        return ConvexHull(pts2).vertices
    except QhullError:
        origin, basis = affine_span(pts2)
        if basis.shape[1] == 0:
            return np.array([0])
        t = (pts2 - origin) @ basis[:, 0]
        i, j = int(np.argmin(t)), int(np.argmax(t))
        if i == j or abs(t[i] - t[j]) <= 1e-12:
            return np.array([i])
        return np.array([i, j])


def convex_hull_2d(pts2: np.ndarray) -> np.ndarray:
    """Vertices of the 2D convex hull in CCW order."""
    pts2 = as_points(pts2)
    return pts2[convex_hull_2d_indices(pts2)]


def triangle_ring_ccw(tri2: np.ndarray) -> np.ndarray:
    """Orient a 2D triangle counterclockwise (no hull machinery)."""
    tri2 = as_points(tri2)
    a, b, c = tri2
    if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0.0:
        return tri2[::-1]
    return tri2


def ring_halfspaces_2d(ring: np.ndarray):
    """Edge halfspaces (A, b) of a convex CCW ring, outward normals."""
    ring = as_points(ring)
    nxt = np.roll(ring, -1, axis=0)
    e = nxt - ring
    a = np.column_stack([e[:, 1], -e[:, 0]])
    norms = np.linalg.norm(a, axis=1)
    keep = norms > 0.0
    a = a[keep] / norms[keep][:, None]
    b = np.einsum("ij,ij->i", a, ring[keep])
    return a, b


def polygon_area(ring: np.ndarray) -> float:
    """Signed shoelace area of a 2D ring (CCW positive)."""
    ring = as_points(ring)
    if len(ring) < 3:
        return 0.0
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def plane_basis(normal: np.ndarray):
    """A deterministic orthonormal in-plane basis (u, v) for a unit normal."""
    n = np.asarray(normal, dtype=float)
    pivot = np.zeros(3)
    pivot[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(n, pivot)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def hull_vertices(pts: np.ndarray, tol: float = TOL_GEOM) -> np.ndarray:
    """Exact vertex set of conv(pts), lexicographically sorted.

    Rank-aware: points, segments and planar polygons embedded in 3D are
    reduced to their affine hull before calling qhull, so degenerate
    inputs never abort.
    """
    pts = dedup_points(as_points(pts), tol)
    if len(pts) <= 2:
        return pts
    origin, basis = affine_span(pts)
    r = basis.shape[1]
    if r == 0:
        return pts[:1]
    local = (pts - origin) @ basis
    if r == 1:
        t = local[:, 0]
        return lex_sort(np.array([pts[np.argmin(t)], pts[np.argmax(t)]]))
    if r == 2:
        idx = convex_hull_2d_indices(local)
        return lex_sort(pts[idx])
    # full rank: qhull on recentred/rescaled coordinates for stability
    scale = max(1.0, float(np.abs(local).max()))
    try:
        hull = ConvexHull(local / scale)
    except QhullError:
        hull = ConvexHull(local / scale, qhull_options="QJ")
    return lex_sort(dedup_points(pts[hull.vertices], tol))


def section_with_plane(pts: np.ndarray, origin, normal, tol: float = 0.0) -> np.ndarray:
    """Vertex generators of conv(pts) ∩ {x : normal·(x − origin) = 0}.

    Returns an unordered point array (possibly empty).  ``tol`` is the
    absolute on-plane snap distance; defaults to a scale-relative value.
    """
    pts = as_points(pts)
    origin = np.asarray(origin, dtype=float)
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    d = (pts - origin) @ n
    if tol <= 0.0:
        tol = 1e-9 * max(1.0, float(np.abs(d).max()))
    on = pts[np.abs(d) <= tol]
    pos = d > tol
    neg = d < -tol
    if not pos.any() or not neg.any():
        return on
    pp, dp = pts[pos], d[pos]
    pn, dn = pts[neg], d[neg]
    # crossing of every (positive, negative) pair with the plane
    t = dp[:, None] / (dp[:, None] - dn[None, :])
    cross = pp[:, None, :] + t[:, :, None] * (pn[None, :, :] - pp[:, None, :])
    cross = cross.reshape(-1, pts.shape[1])
    if len(on):
        return np.vstack([on, cross])
    return cross


def clip_points_halfspace(pts: np.ndarray, a, b: float, tol: float = 0.0) -> np.ndarray:
    """Vertex generators of conv(pts) ∩ {x : a·x ≤ b} (a need not be unit)."""
    pts = as_points(pts)
    a = np.asarray(a, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return pts if b >= 0 else pts[:0]
    d = (pts @ a - b) / norm
    if tol <= 0.0:
        tol = 1e-9 * max(1.0, float(np.abs(d).max()))
    keep = pts[d <= tol]
    pos = d > tol
    neg = d < -tol
    if not pos.any() or not neg.any():
        return keep
    pp, dp = pts[pos], d[pos]
    pn, dn = pts[neg], d[neg]
    t = dp[:, None] / (dp[:, None] - dn[None, :])
    cross = pp[:, None, :] + t[:, :, None] * (pn[None, :, :] - pp[:, None, :])
    return np.vstack([keep, cross.reshape(-1, pts.shape[1])])


def polytope_halfspaces(pts: np.ndarray):
    """H-representation rows (A, b) of conv(pts) with unit-norm A rows.

    Degenerate polytopes contribute their affine-hull equalities as
    paired opposite halfspaces, so folding these rows with
    ``clip_points_halfspace`` reproduces the exact set.
    """
    pts = dedup_points(as_points(pts))
    n = pts.shape[1]
    origin, basis = affine_span(pts)
    r = basis.shape[1]
    rows_a, rows_b = [], []

    # equality part: directions orthogonal to the affine hull
    if r < n:
        full = np.linalg.svd(basis.T, full_matrices=True)[2] if r else np.eye(n)
        comp = full[r:] if r else np.eye(n)
        for w in comp:
            off = float(w @ origin)
            rows_a.extend([w, -w])
            rows_b.extend([off, -off])
    if r == 0:
        return np.array(rows_a), np.array(rows_b)

    local = (pts - origin) @ basis
    if r == 1:
        t = local[:, 0]
        u = basis[:, 0]
        rows_a.extend([u, -u])
        rows_b.extend([float(u @ origin + t.max()), float(-(u @ origin + t.min()))])
    elif r == 2:
        ring = convex_hull_2d(local)
        if len(ring) < 3:  # collapsed to a segment after dedup
            t = local[:, 0]
            u = basis[:, 0]
            rows_a.extend([u, -u])
            rows_b.extend([float(u @ origin + t.max()), float(-(u @ origin + t.min()))])
        else:
            for i in range(len(ring)):
                p, q = ring[i], ring[(i + 1) % len(ring)]
                e = q - p
                nrm = np.array([e[1], -e[0]])  # outward for a CCW ring
                nrm /= np.linalg.norm(nrm)
                a = basis @ nrm
                rows_a.append(a)
                rows_b.append(float(a @ (origin + basis @ p)))
    else:
        scale = max(1.0, float(np.abs(local).max()))
        try:
            hull = ConvexHull(local / scale)
        except QhullError:
            hull = ConvexHull(local / scale, qhull_options="QJ")
        for eq in hull.equations:
            a_loc, c = eq[:-1], eq[-1]
            a = basis @ a_loc
            rows_a.append(a)
            rows_b.append(float(-c * scale + a @ origin))
    return np.array(rows_a), np.array(rows_b)


def hull_violation(pts: np.ndarray, query) -> float:
    """Max halfspace violation of ``query`` against conv(pts).

    ≤ 0 means the point lies in the hull; positive values lower-bound
    the Euclidean distance to it.
    """
    a, b = polytope_halfspaces(pts)
    if len(a) == 0:
        return float(np.linalg.norm(np.asarray(query, dtype=float) - pts[0]))
    return float(np.max(a @ np.asarray(query, dtype=float) - b))


def point_in_hull(pts: np.ndarray, query, tol: float = TOL_GEOM) -> bool:
    return hull_violation(pts, query) <= tol


def segments_hit_triangle(points, target, tri, t_min=1e-9, t_max=1.0, bary_eps=1e-12):
    """Vectorized segment-vs-triangle test (Moller-Trumbore).

    ``points`` is (k, 3); every segment runs from points[i] to ``target``.
    Returns a boolean hit mask.  Parametric hits below ``t_min`` are
    ignored so a segment starting on a surface does not count its own
    support as an obstruction.
    """
    points = as_points(points)
    target = np.asarray(target, dtype=float)
    tri = np.asarray(tri, dtype=float)
    d = target[None, :] - points
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    h = np.cross(d, e2)
    a = h @ e1
    mask = np.abs(a) > 1e-14 * max(1.0, float(np.abs(d).max()) * float(np.abs(e2).max()))
    if not mask.any():
        return np.zeros(len(points), dtype=bool)
    f = np.zeros_like(a)
    f[mask] = 1.0 / a[mask]
    s = points - tri[0]
    u = f * np.einsum("ij,ij->i", s, h)
    q = np.cross(s, e1)
    v = f * np.einsum("ij,ij->i", d, q)
    t = f * (q @ e2)
    hit = (
        mask
        & (u >= -bary_eps)
        & (v >= -bary_eps)
        & (u + v <= 1.0 + bary_eps)
        & (t >= t_min)
        & (t <= t_max)
    )
    return hit


def segments_blocked(points, target, triangles, t_min=1e-9, t_max=1.0) -> np.ndarray:
    """True where the segment points[i] → target crosses any triangle."""
    points = as_points(points)
    blocked = np.zeros(len(points), dtype=bool)
    for tri in triangles:
        todo = ~blocked
        if not todo.any():
            break
        blocked[todo] |= segments_hit_triangle(points[todo], target, tri, t_min, t_max)
    return blocked


_PARITY_DIRECTIONS = np.array(
    [
        [0.12387, 0.79254, 0.59711],
        [-0.63421, 0.29517, 0.71475],
        [0.51344, -0.74192, 0.43126],
        [0.33318, 0.41773, -0.84528],
        [-0.28651, -0.55437, -0.78141],
        [0.90442, 0.18341, 0.38513],
    ]
)


def point_in_closed_mesh(query, triangles) -> bool:
    """Parity ray test against a closed triangle surface.

    Retries with a different probe direction whenever a crossing lands
    too close to a triangle edge for the parity to be trustworthy.
    """
    query = np.asarray(query, dtype=float)
    tris = np.asarray(triangles, dtype=float)
    for direction in _PARITY_DIRECTIONS:
        d = direction / np.linalg.norm(direction)
        count = 0
        ambiguous = False
        for tri in tris:
            e1 = tri[1] - tri[0]
            e2 = tri[2] - tri[0]
            h = np.cross(d, e2)
            a = float(h @ e1)
            scale = max(1.0, float(np.abs(e1).max() * np.abs(e2).max()))
            if abs(a) < 1e-12 * scale:
                continue
            f = 1.0 / a
            s = query - tri[0]
            u = f * float(s @ h)
            q = np.cross(s, e1)
            v = f * float(d @ q)
            t = f * float(q @ e2)
            if t <= 1e-12:
                continue
            margin = 1e-9
            if -margin < u < 1 + margin and -margin < v < 1 + margin and -margin < u + v < 1 + margin:
                inside = (u > margin) and (v > margin) and (u + v < 1 - margin)
                if inside:
                    count += 1
                else:
                    ambiguous = True
                    break
        if not ambiguous:
            return count % 2 == 1
    raise RuntimeError("parity test failed along every probe direction")
