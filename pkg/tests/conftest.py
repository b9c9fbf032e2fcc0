"""Shared fixtures and independent test oracles.

The oracles here re-derive shadow and reflection membership from first
principles (vectorized segment/triangle tests and the mirror-image
construction) so the set pipeline is checked against a computation that
shares none of its polytope machinery.
"""

import numpy as np
import pytest
import shapely

from zonopos import citymodel as cm
from zonopos import shadow as sh
from zonopos.region2d import StreetFrame


def segments_hit_any(starts, ends, triangles, t_min=1e-9, t_max=1.0 - 1e-12):
    """Vectorized Moller-Trumbore: does segment starts[i]->ends[i] cross any triangle?

    Independent re-implementation for the test oracles (the package has
    its own kernel); parametric hits at the very ends are ignored so a
    segment leaving a surface does not count it as an obstruction.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    if ends.shape[0] == 1 and starts.shape[0] > 1:
        ends = np.broadcast_to(ends, starts.shape)
    blocked = np.zeros(len(starts), dtype=bool)
    d = ends - starts
    for tri in triangles:
        todo = np.flatnonzero(~blocked)
        if len(todo) == 0:
            break
        e1 = tri[1] - tri[0]
        e2 = tri[2] - tri[0]
        dv = d[todo]
        h = np.cross(dv, e2)
        a = h @ e1
        ok = np.abs(a) > 1e-16
        f = np.where(ok, 1.0 / np.where(ok, a, 1.0), 0.0)
        sv = starts[todo] - tri[0]
        u = f * np.einsum("ij,ij->i", sv, h)
        q = np.cross(sv, e1)
        v = f * np.einsum("ij,ij->i", dv, q)
        t = f * (q @ e2)
        hit = ok & (u >= -1e-12) & (v >= -1e-12) & (u + v <= 1 + 1e-12) & (t >= t_min) & (t <= t_max)
        blocked[todo[hit]] = True
    return blocked


def segments_blocked(points, target, triangles):
    """Segments from each point to one shared target."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return segments_hit_any(points, np.asarray(target, dtype=float).reshape(1, 3), triangles)


@pytest.fixture
def axis_frame():
    return StreetFrame.axis_aligned()


def build_city(buildings, ground_half=400.0, aoi_center=(0.0, 0.0), aoi_half=60.0, frame=None):
    """City from [(x0, x1, y0, y1, h), ...] box specs."""
    frame = frame or StreetFrame.axis_aligned()
    doc = {
        "ground": cm.ground_square(ground_half),
        "buildings": [
            {"id": i, "triangles": cm.box_building_triangles(*spec)} for i, spec in enumerate(buildings)
        ],
    }
    return cm.build_city_model(doc, aoi=cm.make_aoi(aoi_center, aoi_half, frame))


def sat_at(azimuth_deg, elevation_deg, rho=2.0e6, sat_id="S0"):
    """Satellite from azimuth (from +y, clockwise toward +x) and elevation."""
    az = np.deg2rad(azimuth_deg)
    el = np.deg2rad(elevation_deg)
    pos = rho * np.array([np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)])
    return sh.SatelliteState(sat_id, pos)


def aoi_grid(city, spacing):
    half = city.aoi.half_width
    center = city.aoi.center
    xs = np.arange(center[0] - half, center[0] + half + 1e-9, spacing)
    ys = np.arange(center[1] - half, center[1] + half + 1e-9, spacing)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def region_membership(region, pts):
    """(member mask, boundary distance) for an array of 2D points."""
    if region.is_empty:
        return np.zeros(len(pts), dtype=bool), np.full(len(pts), np.inf)
    member = shapely.contains_xy(region.shapely, pts[:, 0], pts[:, 1])
    dist = shapely.distance(shapely.points(pts), region.shapely.boundary)
    return member, dist


def oracle_shadow_mask(city, sat, pts2d, receiver_height=0.0):
    """True where the straight segment to the satellite is blocked."""
    tris = city.all_building_triangles()
    pts3 = np.column_stack([pts2d, np.full(len(pts2d), receiver_height)])
    return segments_blocked(pts3, sat.position, tris)


def _plane_frames(city):
    out = []
    for b in city.buildings:
        for plane in b.planes:
            n = plane.unit_normal
            pivot = np.zeros(3)
            pivot[int(np.argmin(np.abs(n)))] = 1.0
            u = np.cross(n, pivot)
            u /= np.linalg.norm(u)
            v = np.cross(n, u)
            tris2 = []
            for tri in plane.triangles:
                rel = tri.vrep - plane.center
                tris2.append(np.column_stack([rel @ u, rel @ v]))
            out.append((plane, u, v, tris2))
    return out


def _points_in_tri2(p2, tri2, tol=1e-9):
    a, b, c = tri2
    def cross(o, d, pts):
        return (d[0] - o[0]) * (pts[:, 1] - o[1]) - (d[1] - o[1]) * (pts[:, 0] - o[0])
    c1 = cross(a, b, p2)
    c2 = cross(b, c, p2)
    c3 = cross(c, a, p2)
    pos = (c1 >= -tol) & (c2 >= -tol) & (c3 >= -tol)
    neg = (c1 <= tol) & (c2 <= tol) & (c3 <= tol)
    return pos | neg


def oracle_reflection_mask(city, sat, pts2d, receiver_height=0.0, los_blocked=None):
    """Mirror-image single-bounce oracle over a point grid.

    True where the point hears the direct signal *and* at least one
    valid single-bounce reflection: the mirrored-satellite ray meets a
    plane polygon, the hit is satellite-visible, and the reflected leg
    down to the point is unobstructed.
    """
    tris = city.all_building_triangles()
    pts3 = np.column_stack([pts2d, np.full(len(pts2d), receiver_height)])
    if los_blocked is None:
        los_blocked = segments_blocked(pts3, sat.position, tris)
    nlos = np.zeros(len(pts3), dtype=bool)
    s = sat.position
    for plane, u, v, tris2 in _plane_frames(city):
        n = plane.unit_normal
        d_s = float(n @ (s - plane.center))
        if d_s <= 0.0:
            continue
        mirrored = s - 2.0 * d_s * n
        d_m = -d_s
        d_r = (pts3 - plane.center) @ n
        cand = (d_r > 1e-12) & ~nlos
        if not cand.any():
            continue
        idx = np.flatnonzero(cand)
        t = d_r[idx] / (d_r[idx] - d_m)
        hits = pts3[idx] + t[:, None] * (mirrored[None, :] - pts3[idx])
        rel = hits - plane.center
        p2 = np.column_stack([rel @ u, rel @ v])
        on_plane = np.zeros(len(idx), dtype=bool)
        for tri2 in tris2:
            on_plane |= _points_in_tri2(p2, tri2)
        idx = idx[on_plane]
        if len(idx) == 0:
            continue
        hits = hits[on_plane]
        ok = ~segments_blocked(hits, s, tris)  # satellite leg
        idx, hits = idx[ok], hits[ok]
        if len(idx) == 0:
            continue
        # reflected leg: from the wall hit down to each receiver
        clear = ~segments_hit_any(hits, pts3[idx], tris)
        nlos[idx[clear]] = True
    return ~los_blocked & nlos
