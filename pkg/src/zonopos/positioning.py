"""Set-based receiver position estimation.

Both estimators start from the area of interest and refine it one
satellite at a time:

* shadow-only matching (``zsm``): LOS satellites carve their shadow
  out of the candidate set, NLOS satellites intersect with it;
* shadow-and-reflection matching (``zsrm``): NLOS-only intersects the
  shadow, LOS+NLOS intersects the reflection region, LOS-only subtracts
  both.

Every per-satellite constraint in the three-class scheme is a subset of
its binary counterpart, so the refined region can only shrink.  An
empty outcome (possible under misclassification) is reported as an
estimation failure for the epoch, never patched over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import region2d
from .citymodel import CityModel
from .reflection import compute_reflection_region
from .region2d import DEFAULT_MODE_GAP, Region2D
from .shadow import DEFAULT_EPS, SatelliteState, compute_shadow_product
from .sigclass import ReceptionCondition


@dataclass(frozen=True)
class SatelliteGeometry:
    """Cached shadow/reflection products for one satellite in one epoch."""

    satellite: SatelliteState
    shadow_region: Region2D
    reflection_region: Region2D


@dataclass(frozen=True)
class PositionSet:
    """Set-based receiver estimate: region, its modes, optional selection."""

    region: Region2D
    mode_list: tuple
    selected_mode: int | None = None
    point_estimate: np.ndarray | None = None

    def __post_init__(self):
        if self.point_estimate is not None:
            p = np.asarray(self.point_estimate, dtype=float).reshape(2)
            p.flags.writeable = False
            object.__setattr__(self, "point_estimate", p)
        object.__setattr__(self, "mode_list", tuple(self.mode_list))

    @property
    def failed(self) -> bool:
        return self.region.is_empty

    def with_selection(self, index: int | None) -> "PositionSet":
        if index is None:
            point = self.region.centroid() if not self.region.is_empty else None
            return PositionSet(self.region, self.mode_list, None, point)
        return PositionSet(self.region, self.mode_list, index, self.mode_list[index].centroid())


def compute_epoch_geometry(city: CityModel, satellites, eps: float = DEFAULT_EPS):
    """Shadow and reflection regions for every satellite of an epoch."""
    out = []
    for sat in satellites:
        shadow_product = compute_shadow_product(city, sat, eps)
        _, refl_region = compute_reflection_region(city, sat, shadow_product, eps)
        out.append(SatelliteGeometry(sat, shadow_product.shadow_region, refl_region))
    return tuple(out)


def refine_step(candidate: Region2D, shadow: Region2D, reflection: Region2D, condition: ReceptionCondition) -> Region2D:
    """One three-class refinement update of the candidate set."""
    if condition == ReceptionCondition.NLOS_ONLY:
        return region2d.intersection(candidate, shadow)
    if condition == ReceptionCondition.LOS_NLOS:
        return region2d.intersection(candidate, reflection)
    return region2d.difference(region2d.difference(candidate, shadow), reflection)


def _finish(region: Region2D, mode_gap: float) -> PositionSet:
    mode_list = tuple(region2d.modes(region, mode_gap)) if not region.is_empty else ()
    point = region.centroid() if not region.is_empty else None
    return PositionSet(region, mode_list, None, point)


def zsm_estimate(
    city: CityModel,
    satellites,
    geometry=None,
    eps: float = DEFAULT_EPS,
    mode_gap: float = DEFAULT_MODE_GAP,
) -> PositionSet:
    """Shadow-only set estimate from (satellite, los_flag) pairs.

    ``satellites`` holds (SatelliteState, bool) pairs; the flag is the
    binary LOS decision (True when any direct signal is received).
    """
    states = [s for s, _ in satellites]
    if geometry is None:
        geometry = compute_epoch_geometry(city, states, eps)
    candidate = city.aoi.region
    for geo, (_, is_los) in zip(geometry, satellites):
        if is_los:
            candidate = region2d.difference(candidate, geo.shadow_region)
        else:
            candidate = region2d.intersection(candidate, geo.shadow_region)
    return _finish(candidate, mode_gap)


def zsrm_estimate(
    city: CityModel,
    satellites,
    geometry=None,
    eps: float = DEFAULT_EPS,
    mode_gap: float = DEFAULT_MODE_GAP,
) -> PositionSet:
    """Shadow-and-reflection set estimate from (satellite, condition) pairs."""
    states = [s for s, _ in satellites]
    if geometry is None:
        geometry = compute_epoch_geometry(city, states, eps)
    candidate = city.aoi.region
    for geo, (_, condition) in zip(geometry, satellites):
        candidate = refine_step(candidate, geo.shadow_region, geo.reflection_region, condition)
    return _finish(candidate, mode_gap)


__all__ = [
    "PositionSet",
    "SatelliteGeometry",
    "compute_epoch_geometry",
    "refine_step",
    "zsm_estimate",
    "zsrm_estimate",
]
