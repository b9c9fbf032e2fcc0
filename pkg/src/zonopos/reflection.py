"""GNSS reflection computation per satellite-building pair.

A reflection is the ground area where both the direct signal and a
single-bounce reflected signal arrive.  For every qualifying building
plane the pipeline computes:

* the potential area: the plane swept along the reflection direction
  (mirror the satellite across the plane, aim from the mirrored
  position through the plane), sliced at the ground and clipped to the
  area of interest;
* the invisible area: parts of the potential area fed by plane segments
  that other faces shadow from the satellite (reusing the cached shadow
  volumes);
* the blocked area: parts of the potential area cut off by faces
  standing inside the reflected beam.

The reflection region is the union over planes of potential minus
invisible minus blocked, minus the satellite's shadow region (a point
that only hears the bounce is a shadow point, not a reflection point).

The reflector plane's own triangles are excluded both as occluders and
as blockers: a face trivially intersects its own swept volume, and the
literal inclusion would erase every reflection (occluders) or poison
the booleans with a measure-zero self-block at the wall (blockers).
Other faces of the same building still participate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import region2d
from .citymodel import AOI, Building, CityModel, Plane
from .geom3d import (
    clip_points_halfspace,
    convex_hull_2d,
    plane_basis,
    polygon_area,
    ring_halfspaces_2d,
    section_with_plane,
    triangle_ring_ccw,
)
from .region2d import Region2D
from .shadow import DEFAULT_EPS, SatelliteState, ShadowProduct, flatten_volume_to_ground


@dataclass(frozen=True)
class ReflectionPlaneItem:
    """One qualifying reflection plane with its mirror geometry."""

    plane: Plane
    mirrored_satellite: np.ndarray
    reflection_dir: np.ndarray

    def __post_init__(self):
        for name in ("mirrored_satellite", "reflection_dir"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            v.flags.writeable = False
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ReflectionPlaneSet:
    satellite_id: str
    building_id: int
    planes: tuple

    def __len__(self):
        return len(self.planes)

    def __iter__(self):
        return iter(self.planes)


@dataclass(frozen=True)
class PlaneAreas:
    """Per-plane intermediate areas feeding the reflection region."""

    potential: Region2D
    invisible: Region2D
    blocked: Region2D


@dataclass(frozen=True)
class ReflectionProduct:
    satellite_id: str
    building_id: int
    per_plane: tuple
    reflection_region: Region2D


def mirror_satellite(satellite_position, plane: Plane) -> np.ndarray:
    """Mirror image of the satellite across the plane (an involution)."""
    s = np.asarray(satellite_position, dtype=float).reshape(3)
    n = plane.unit_normal
    return s - 2.0 * float(n @ (s - plane.center)) * n


def find_reflection_planes(building: Building, satellite: SatelliteState) -> ReflectionPlaneSet:
    """Planes able to reflect this satellite's signal to the ground.

    Two conditions: the satellite must illuminate the outward face
    (N · (s - c) > 0), and the reflected direction must point downward.
    """
    items = []
    for plane in building.planes:
        s = satellite.position
        if float(plane.unit_normal @ (s - plane.center)) <= 0.0:
            continue  # back face; the signal cannot reach it
        mirrored = mirror_satellite(s, plane)
        d = plane.plane_vertex_mean - mirrored
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            continue
        direction = d / norm
        if direction[2] >= 0.0:
            continue  # reflected signal would leave upward, never lands
        items.append(ReflectionPlaneItem(plane, mirrored, direction))
    return ReflectionPlaneSet(satellite.id, building.id, tuple(items))


def _sweep_points(points: np.ndarray, direction: np.ndarray, eps: float) -> np.ndarray:
    return np.vstack([points, points + eps * direction])


def _rings_from_swept(points: np.ndarray, direction: np.ndarray, eps: float, aoi: AOI) -> list:
    return flatten_volume_to_ground(_sweep_points(points, direction, eps), aoi)


def potential_area(item: ReflectionPlaneItem, eps: float = DEFAULT_EPS, aoi: AOI = None) -> Region2D:
    """Ground strip reachable by this plane's reflected beam."""
    rings = []
    for tri in item.plane.triangles:
        rings.extend(_rings_from_swept(tri.vrep, item.reflection_dir, eps, aoi))
    return Region2D.from_rings(rings)


def _plane_local(item: ReflectionPlaneItem):
    """In-plane 2D coordinate helpers for the reflection plane."""
    u, v = plane_basis(item.plane.unit_normal)
    origin = item.plane.center

    def to_local(pts):
        rel = pts - origin
        return np.column_stack([rel @ u, rel @ v])

    def to_world(pts2):
        return origin + np.outer(pts2[:, 0], u) + np.outer(pts2[:, 1], v)

    return to_local, to_world


def invisible_area(
    item: ReflectionPlaneItem,
    shadow_products,
    aoi: AOI,
    eps: float = DEFAULT_EPS,
) -> Region2D:
    """Ground image of the plane segments shadowed by other faces.

    ``shadow_products`` is the per-building volume cache of this
    satellite's :class:`~zonopos.shadow.ShadowProduct`; every cached
    volume except the ones swept from this very plane is intersected
    with the plane, and the resulting wall segments are swept along the
    reflection direction onto the ground.
    """
    plane = item.plane
    own = {(plane.building_id, t) for t in plane.triangle_indices}
    to_local, to_world = _plane_local(item)
    tri_rings = [triangle_ring_ccw(to_local(tri.vrep)) for tri in plane.triangles]
    tri_halfspaces = [ring_halfspaces_2d(r) for r in tri_rings]
    rings = []
    for bid, volumes in zip(shadow_products.building_ids, shadow_products.per_building_volumes):
        for t_idx, vol in enumerate(volumes):
            if (bid, t_idx) in own:
                continue
            sec = section_with_plane(vol.vrep, plane.center, plane.unit_normal)
            if len(sec) < 3:
                continue
            piece = to_local(sec)
            for ring, (rows_a, rows_b) in zip(tri_rings, tri_halfspaces):
                pts = piece
                for av, bv in zip(rows_a, rows_b):
                    pts = clip_points_halfspace(pts, av, bv)
                    if len(pts) == 0:
                        break
                if len(pts) < 3:
                    continue
                clipped = convex_hull_2d(pts)
                if len(clipped) < 3 or abs(polygon_area(clipped)) < 1e-12:
                    continue
                world = to_world(clipped)
                rings.extend(_rings_from_swept(world, item.reflection_dir, eps, aoi))
    return Region2D.from_rings(rings)


def blocked_area(
    item: ReflectionPlaneItem,
    buildings,
    aoi: AOI,
    eps: float = DEFAULT_EPS,
) -> Region2D:
    """Ground area cut out of the beam by faces standing inside it."""
    plane = item.plane
    own = {(plane.building_id, t) for t in plane.triangle_indices}
    blockers = _blocker_frames(buildings, own)
    rings = []
    for tri in plane.triangles:
        beam = _sweep_points(tri.vrep, item.reflection_dir, eps)
        for origin, n, u, v, rows_a, rows_b in blockers:
            sec = section_with_plane(beam, origin, n)
            if len(sec) < 3:
                continue
            rel = sec - origin
            pts = np.column_stack([rel @ u, rel @ v])
            for av, bv in zip(rows_a, rows_b):
                pts = clip_points_halfspace(pts, av, bv)
                if len(pts) == 0:
                    break
            if len(pts) < 3:
                continue
            piece2 = convex_hull_2d(pts)
            if len(piece2) < 3 or abs(polygon_area(piece2)) < 1e-12:
                continue
            world = origin + np.outer(piece2[:, 0], u) + np.outer(piece2[:, 1], v)
            rings.extend(_rings_from_swept(world, item.reflection_dir, eps, aoi))
    return Region2D.from_rings(rings)


def _blocker_frames(buildings, own):
    """Per-triangle plane frames and edge halfspaces for blocking tests."""
    out = []
    for b in buildings:
        for t_idx, blocker in enumerate(b.triangles):
            if (b.id, t_idx) in own:
                continue
            btri = blocker.vrep
            n = np.cross(btri[1] - btri[0], btri[2] - btri[0])
            nn = float(np.linalg.norm(n))
            if nn == 0.0:
                continue
            n = n / nn
            origin = btri.mean(axis=0)
            u, v = plane_basis(n)
            rel = btri - origin
            tri2 = triangle_ring_ccw(np.column_stack([rel @ u, rel @ v]))
            rows_a, rows_b = ring_halfspaces_2d(tri2)
            out.append((origin, n, u, v, rows_a, rows_b))
    return out


def gnss_reflection(per_plane, shadow_region: Region2D) -> Region2D:
    """Union over planes of (potential - invisible - blocked) - shadow."""
    pieces = []
    for areas in per_plane:
        r = region2d.difference(areas.potential, areas.invisible)
        r = region2d.difference(r, areas.blocked)
        pieces.append(r)
    return region2d.difference(region2d.union_all(pieces), shadow_region)


def compute_reflection_product(
    city: CityModel,
    building: Building,
    satellite: SatelliteState,
    shadow_product: ShadowProduct,
    eps: float = DEFAULT_EPS,
) -> ReflectionProduct:
    """Reflection region contributed by one building for one satellite."""
    plane_set = find_reflection_planes(building, satellite)
    per_plane = []
    for item in plane_set:
        pot = potential_area(item, eps, city.aoi)
        if pot.is_empty:
            per_plane.append(PlaneAreas(pot, Region2D.empty(), Region2D.empty()))
            continue
        inv = invisible_area(item, shadow_product, city.aoi, eps)
        blk = blocked_area(item, city.buildings, city.aoi, eps)
        per_plane.append(PlaneAreas(pot, inv, blk))
    region = gnss_reflection(per_plane, shadow_product.shadow_region)
    return ReflectionProduct(satellite.id, building.id, tuple(per_plane), region)


def compute_reflection_region(
    city: CityModel,
    satellite: SatelliteState,
    shadow_product: ShadowProduct,
    eps: float = DEFAULT_EPS,
):
    """All buildings' reflection products and their unified region."""
    products = tuple(
        compute_reflection_product(city, b, satellite, shadow_product, eps) for b in city.buildings
    )
    region = region2d.union_all([p.reflection_region for p in products])
    return products, region


__all__ = [
    "PlaneAreas",
    "ReflectionPlaneItem",
    "ReflectionPlaneSet",
    "ReflectionProduct",
    "blocked_area",
    "compute_reflection_product",
    "compute_reflection_region",
    "find_reflection_planes",
    "gnss_reflection",
    "invisible_area",
    "mirror_satellite",
    "potential_area",
]
