"""Planar region algebra for shadows, reflections and position sets.

A :class:`Region2D` is a union of simple polygons with holes, stored in
a canonical form: exterior rings counterclockwise, holes clockwise,
every ring rotated to start at its lexicographically smallest vertex,
polygons sorted lexicographically.  Canonicalization makes boolean
results order-independent, so unions computed in any schedule compare
equal and serialized output is reproducible byte for byte.

Boolean kernels are delegated to GEOS via shapely; slivers below
``SLIVER_AREA`` are dropped after every operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Point, Polygon
from shapely.geometry.polygon import orient

from .geom3d import SLIVER_AREA, TOL_GEOM

DEFAULT_MODE_GAP = 0.5  # meters; separates across-street components

# Coordinates are snapped to this grid at every region construction.
# Boundary vertices shared by adjacent pieces are computed along
# different arithmetic paths and disagree in the last few ULPs, which
# drives GEOS overlays into near-tangent pathologies; a 1e-9 m grid is
# far below the geometric tolerance and far above float noise, so
# snapping restores exact shared edges without moving real geometry.
SNAP_GRID = 1e-9


def _snapped(geom):
    return shapely.set_precision(geom, SNAP_GRID)


@dataclass(frozen=True)
class StreetFrame:
    """Street-aligned 2D frame: origin plus orthonormal along/cross axes."""

    origin: np.ndarray
    along_axis: np.ndarray
    cross_axis: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float).reshape(2)
        a = np.asarray(self.along_axis, dtype=float).reshape(2)
        c = np.asarray(self.cross_axis, dtype=float).reshape(2)
        if abs(np.linalg.norm(a) - 1) > 1e-9 or abs(np.linalg.norm(c) - 1) > 1e-9:
            raise ValueError("frame axes must be unit length")
        if abs(a @ c) > 1e-9:
            raise ValueError("frame axes must be orthogonal")
        for name, v in (("origin", o), ("along_axis", a), ("cross_axis", c)):
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @classmethod
    def axis_aligned(cls, origin=(0.0, 0.0)) -> "StreetFrame":
        return cls(np.asarray(origin, float), np.array([1.0, 0.0]), np.array([0.0, 1.0]))

    @classmethod
    def from_angle(cls, origin, along_angle_rad: float) -> "StreetFrame":
        a = np.array([np.cos(along_angle_rad), np.sin(along_angle_rad)])
        c = np.array([-a[1], a[0]])
        return cls(np.asarray(origin, float), a, c)

    def to_frame(self, points: np.ndarray) -> np.ndarray:
        """World (x, y) -> (along, cross) coordinates."""
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self.origin
        return np.column_stack([pts @ self.along_axis, pts @ self.cross_axis])

    def to_world(self, frame_points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(frame_points, dtype=float))
        return self.origin + np.outer(pts[:, 0], self.along_axis) + np.outer(pts[:, 1], self.cross_axis)


def _rotate_ring(coords: np.ndarray) -> np.ndarray:
    """Rotate an open ring to start at its lexicographically smallest vertex."""
    idx = np.lexsort((coords[:, 1], coords[:, 0]))[0]
    return np.roll(coords, -idx, axis=0)


def _ring_array(ring) -> np.ndarray:
    coords = np.asarray(ring.coords, dtype=float)
    return coords[:-1] if len(coords) > 1 and np.array_equal(coords[0], coords[-1]) else coords


def _canonical_polys(geom):
    """Flatten any geometry into canonical (shell, holes) ring arrays."""
    polys = []
    for g in getattr(geom, "geoms", [geom]):
        if isinstance(g, MultiPolygon):
            polys.extend(g.geoms)
        elif isinstance(g, Polygon) and not g.is_empty:
            polys.append(g)
    out = []
    for p in polys:
        if p.area < SLIVER_AREA:
            continue
        p = orient(p.simplify(0.0), 1.0)  # CCW shell, CW holes, no collinear runs
        if p.area < SLIVER_AREA:
            continue
        shell = _rotate_ring(_ring_array(p.exterior))
        holes = sorted(
            (_rotate_ring(_ring_array(h)) for h in p.interiors),
            key=lambda r: r.ravel().tolist(),
        )
        out.append((shell, tuple(holes)))
    out.sort(key=lambda sh: sh[0].ravel().tolist())
    return out


class Region2D:
    """Canonical union of simple polygons (holes allowed), meters."""

    __slots__ = ("_polys", "_geom")

    def __init__(self, polys, _geom=None):
        self._polys = tuple(polys)
        self._geom = _geom

    # -- constructors -------------------------------------------------
    @classmethod
    def empty(cls) -> "Region2D":
        return cls(())

    @classmethod
    def from_shapely(cls, geom) -> "Region2D":
        if geom is None or geom.is_empty:
            return cls.empty()
        return cls(_canonical_polys(_snapped(geom)))

    @classmethod
    def from_rings(cls, rings) -> "Region2D":
        """Build from open CCW vertex rings (no holes); unions overlaps."""
        polys = []
        for ring in rings:
            ring = np.asarray(ring, dtype=float)
            if len(ring) < 3:
                continue
            p = _snapped(Polygon(ring))
            if not p.is_valid:
                p = p.buffer(0)
            if p.area >= SLIVER_AREA:
                polys.append(p)
        if not polys:
            return cls.empty()
        return cls.from_shapely(shapely.union_all(polys))

    @classmethod
    def box(cls, x0, y0, x1, y1) -> "Region2D":
        return cls.from_rings([[[x0, y0], [x1, y0], [x1, y1], [x0, y1]]])

    # -- basic queries -------------------------------------------------
    @property
    def polygons(self):
        """Canonical (shell, holes) ring arrays."""
        return self._polys

    @property
    def shapely(self):
        if self._geom is None:
            self._geom = MultiPolygon([Polygon(shell, holes) for shell, holes in self._polys])
        return self._geom

    @property
    def is_empty(self) -> bool:
        return len(self._polys) == 0

    @property
    def area(self) -> float:
        return float(self.shapely.area) if self._polys else 0.0

    def contains_point(self, point, tol: float = 0.0) -> bool:
        """Closed-set membership; ``tol`` expands by a boundary margin."""
        if self.is_empty:
            return False
        p = Point(float(point[0]), float(point[1]))
        if self.shapely.covers(p):
            return True
        return tol > 0.0 and self.shapely.distance(p) <= tol

    def boundary_distance(self, point) -> float:
        """Distance from a point to the region boundary (inf when empty)."""
        if self.is_empty:
            return float("inf")
        return float(self.shapely.boundary.distance(Point(float(point[0]), float(point[1]))))

    def centroid(self) -> np.ndarray:
        if self.is_empty:
            raise ValueError("centroid of an empty region")
        c = self.shapely.centroid
        return np.array([c.x, c.y])

    def bounds_in_frame(self, frame: StreetFrame):
        """(cross width, along width) of the bounding box in a street frame."""
        if self.is_empty:
            raise ValueError("bounds of an empty region")
        pts = np.vstack([shell for shell, _ in self._polys])
        local = frame.to_frame(pts)
        along = float(local[:, 0].max() - local[:, 0].min())
        cross = float(local[:, 1].max() - local[:, 1].min())
        return cross, along

    def sample_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform interior samples by rejection within the bounding box."""
        if self.is_empty:
            raise ValueError("cannot sample an empty region")
        minx, miny, maxx, maxy = self.shapely.bounds
        out = []
        need = count
        while need > 0:
            batch = max(4 * need, 64)
            xs = rng.uniform(minx, maxx, batch)
            ys = rng.uniform(miny, maxy, batch)
            inside = shapely.contains_xy(self.shapely, xs, ys)
            pts = np.column_stack([xs[inside], ys[inside]])[:need]
            if len(pts):
                out.append(pts)
                need -= len(pts)
        return np.vstack(out)

    # -- equality ------------------------------------------------------
    def equals(self, other: "Region2D", tol: float = TOL_GEOM) -> bool:
        """Canonical comparison; falls back to symmetric-difference area."""
        if len(self._polys) == len(other._polys):
            ok = True
            for (s1, h1), (s2, h2) in zip(self._polys, other._polys):
                if s1.shape != s2.shape or len(h1) != len(h2):
                    ok = False
                    break
                if not np.allclose(s1, s2, atol=tol):
                    ok = False
                    break
                for a, b in zip(h1, h2):
                    if a.shape != b.shape or not np.allclose(a, b, atol=tol):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
        if self.is_empty and other.is_empty:
            return True
        if self.is_empty or other.is_empty:
            return max(self.area, other.area) < SLIVER_AREA
        return float(self.shapely.symmetric_difference(other.shapely).area) < SLIVER_AREA

    def __repr__(self):
        return f"Region2D(n_polygons={len(self._polys)}, area={self.area:.3f})"

    # -- GeoJSON -------------------------------------------------------
    def to_geojson(self) -> dict:
        """MultiPolygon GeoJSON mapping (coordinates in meters, local frame)."""
        coords = []
        for shell, holes in self._polys:
            rings = [np.vstack([shell, shell[:1]]).tolist()]
            rings.extend(np.vstack([h, h[:1]]).tolist() for h in holes)
            coords.append(rings)
        return {"type": "MultiPolygon", "coordinates": coords}

    @classmethod
    def from_geojson(cls, obj: dict) -> "Region2D":
        if obj.get("type") != "MultiPolygon":
            raise ValueError("expected a MultiPolygon")
        polys = []
        for rings in obj["coordinates"]:
            shell, holes = rings[0], rings[1:]
            polys.append(Polygon(shell, holes))
        return cls.from_shapely(MultiPolygon(polys))


def _result(geom) -> Region2D:
    return Region2D.from_shapely(geom)


def union(a: Region2D, b: Region2D) -> Region2D:
    if a.is_empty:
        return b
    if b.is_empty:
        return a
    return _result(a.shapely.union(b.shapely))


def union_all(regions) -> Region2D:
    geoms = [r.shapely for r in regions if not r.is_empty]
    if not geoms:
        return Region2D.empty()
    return _result(shapely.union_all(geoms))


def difference(a: Region2D, b: Region2D) -> Region2D:
    if a.is_empty or b.is_empty:
        return a
    return _result(a.shapely.difference(b.shapely))


def intersection(a: Region2D, b: Region2D) -> Region2D:
    if a.is_empty or b.is_empty:
        return Region2D.empty()
    return _result(a.shapely.intersection(b.shapely))


def modes(a: Region2D, gap: float = DEFAULT_MODE_GAP):
    """Split a region into disjoint components ("modes").

    Polygons whose boundary distance is within ``gap`` are merged into
    one mode; ordering is by descending area, ties broken canonically.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    polys = [Polygon(shell, holes) for shell, holes in a.polygons]
    n = len(polys)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if polys[i].distance(polys[j]) <= gap:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(polys[i])
    regions = [Region2D.from_shapely(MultiPolygon(g)) for g in groups.values()]
    regions.sort(key=lambda r: (-r.area, r.polygons[0][0].ravel().tolist() if r.polygons else []))
    return regions


__all__ = [
    "DEFAULT_MODE_GAP",
    "Region2D",
    "StreetFrame",
    "difference",
    "intersection",
    "modes",
    "union",
    "union_all",
]
