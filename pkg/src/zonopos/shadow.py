"""GNSS shadow computation per satellite-building pair.

A shadow is the ground area where a building blocks the direct signal.
Per building the pipeline is: one shadow direction (satellite to the
building's representative point), a per-triangle sweep of the building
along that direction, and the z = 0 slice of every swept volume clipped
to the area of interest.  Swept volumes are cached on the product so
the reflection stage can reuse them without recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import czono, region2d
from .citymodel import AOI, Building, CityModel
from .czono import CZCollection
from .geom3d import clip_points_halfspace, convex_hull_2d, ring_halfspaces_2d, section_with_plane
from .region2d import Region2D

DEFAULT_EPS = 1e5  # meters; sweep length, far beyond any building height


@dataclass(frozen=True)
class SatelliteState:
    """Satellite position in the local frame, meters."""

    id: str
    position: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        if not np.isfinite(p).all():
            raise ValueError("non-finite satellite position")
        p.flags.writeable = False
        object.__setattr__(self, "position", p)

    @property
    def elevation(self) -> float:
        horiz = float(np.hypot(self.position[0], self.position[1]))
        return float(np.arctan2(self.position[2], horiz))

    @property
    def azimuth(self) -> float:
        return float(np.arctan2(self.position[0], self.position[1])) % (2 * np.pi)

    @property
    def range(self) -> float:
        return float(np.linalg.norm(self.position))


@dataclass(frozen=True)
class ShadowProduct:
    """Per-satellite shadow outputs plus cached swept volumes.

    ``per_building_volumes[i]`` holds one swept zonotope per triangle of
    the building with id ``building_ids[i]``, in triangle order, so
    (building id, triangle index) identifies a volume's source face.
    """

    satellite_id: str
    building_ids: tuple
    per_building_volumes: tuple
    shadow_region: Region2D


def shadow_direction(building: Building, satellite: SatelliteState) -> np.ndarray:
    """Unit vector from the satellite toward the building.

    A single direction per building is used; satellites are so far away
    that the direction is effectively constant across the building.
    """
    d = building.representative_point - satellite.position
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValueError("satellite coincides with the building representative point")
    return d / norm


def shadow_volume(building: Building, direction, eps: float = DEFAULT_EPS) -> CZCollection:
    """Sweep every building triangle along the shadow direction."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    sweep = czono.sweep_zonotope(direction, eps)
    return CZCollection(tuple(czono.minkowski_sum(z, sweep) for z in building.triangles))


def flatten_volume_to_ground(points: np.ndarray, aoi: AOI) -> list:
    """z = 0 slice of a convex volume clipped to each AOI cell.

    Returns 2D CCW rings (possibly empty list); callers union them into
    a Region2D.
    """
    sec = section_with_plane(points, np.zeros(3), np.array([0.0, 0.0, 1.0]))
    if len(sec) < 3:
        return []
    base = sec[:, :2]
    rings = []
    for cell_ring in aoi.cell_rings_2d:
        rows_a, rows_b = ring_halfspaces_2d(cell_ring)
        pts = base
        for av, bv in zip(rows_a, rows_b):
            pts = clip_points_halfspace(pts, av, bv)
            if len(pts) == 0:
                break
        if len(pts) >= 3:
            ring = convex_hull_2d(pts)
            if len(ring) >= 3:
                rings.append(ring)
    return rings


def gnss_shadow(volumes: CZCollection, aoi: AOI) -> Region2D:
    """Ground shadow of a swept-volume collection inside the AOI."""
    if len(aoi.squares) == 0:
        raise ValueError("AOI has no cells")
    rings = []
    for vol in volumes:
        rings.extend(flatten_volume_to_ground(vol.vrep, aoi))
    return Region2D.from_rings(rings)


def compute_shadow_product(city: CityModel, satellite: SatelliteState, eps: float = DEFAULT_EPS) -> ShadowProduct:
    """Shadow region for one satellite over all buildings, volumes cached."""
    max_h = city.max_building_height()
    if city.n_buildings and satellite.position[2] < 10.0 * max_h:
        raise ValueError(
            f"satellite {satellite.id} is too low (z={satellite.position[2]:.1f} m, "
            f"needs >= {10.0 * max_h:.1f} m) for the single-direction approximation"
        )
    per_building = []
    regions = []
    for b in city.buildings:
        direction = shadow_direction(b, satellite)
        volumes = shadow_volume(b, direction, eps)
        per_building.append(volumes)
        regions.append(gnss_shadow(volumes, city.aoi))
    ids = tuple(b.id for b in city.buildings)
    return ShadowProduct(satellite.id, ids, tuple(per_building), region2d.union_all(regions))


__all__ = [
    "DEFAULT_EPS",
    "SatelliteState",
    "ShadowProduct",
    "compute_shadow_product",
    "flatten_volume_to_ground",
    "gnss_shadow",
    "shadow_direction",
    "shadow_volume",
]
