"""City model ingestion: triangle meshes to constrained zonotopes.

The loader consumes a plain JSON mesh (see :data:`CITY_SCHEMA_DOC`),
converts every triangle into a constrained zonotope via two chained
convex hulls, groups building faces into planes by shared normal and
vertex connectivity, and orients plane normals outward so downstream
illumination tests are unambiguous.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import czono
from .czono import CZCollection, ConstrainedZonotope
from .geom3d import TOL_GEOM, point_in_closed_mesh
from .region2d import Region2D, StreetFrame

log = logging.getLogger(__name__)

DEFAULT_ANG_TOL = 1e-6  # radians; normals closer than this are coplanar
DEFAULT_AOI_HALF_WIDTH = 60.0  # meters; 120 m x 120 m area of interest

CITY_SCHEMA_DOC = """\
City-model JSON, units meters, ground at z = 0:
{
  "ground":    [ [[x,y,z],[x,y,z],[x,y,z]], ... ],
  "buildings": [ {"id": <int>, "triangles": [ [[x,y,z]x3], ... ]}, ... ]
}
"""


class CityModelError(ValueError):
    """Raised for malformed city-model input, with element indices."""


@dataclass(frozen=True)
class Plane:
    """A maximal planar, vertex-connected face group of one building."""

    building_id: int
    triangle_indices: tuple
    triangles: CZCollection
    unit_normal: np.ndarray
    center: np.ndarray            # mean of the deduplicated plane vertices
    plane_vertex_mean: np.ndarray  # same construction; kept as a separate field

    def __post_init__(self):
        n = np.asarray(self.unit_normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        c = np.asarray(self.center, dtype=float).reshape(3)
        p = np.asarray(self.plane_vertex_mean, dtype=float).reshape(3)
        if np.linalg.norm(c - p) > TOL_GEOM:
            raise ValueError("plane center and vertex mean disagree")
        for name, v in (("unit_normal", n), ("center", c), ("plane_vertex_mean", p)):
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    def vertices(self) -> np.ndarray:
        return czono.collection_vertices(self.triangles)


@dataclass(frozen=True)
class Building:
    id: int
    triangles: CZCollection
    planes: tuple = field(default=())
    representative_point: np.ndarray = None

    def __post_init__(self):
        if len(self.triangles) == 0:
            raise ValueError(f"building {self.id} has no triangles")
        rep = self.representative_point
        if rep is None:
            rep = czono.collection_vertices(self.triangles).mean(axis=0)
        rep = np.asarray(rep, dtype=float).reshape(3)
        rep.flags.writeable = False
        object.__setattr__(self, "representative_point", rep)
        object.__setattr__(self, "planes", tuple(self.planes))

    def vertices(self) -> np.ndarray:
        return czono.collection_vertices(self.triangles)

    def triangle_arrays(self) -> np.ndarray:
        """(n_tri, 3, 3) raw vertex triples for ray tests."""
        return np.array([z.vrep for z in self.triangles])


@dataclass(frozen=True)
class AOI:
    """Area of interest: planar cells at z = 0 tiling a square.

    Cells are 3D constrained zonotopes embedded in the ground plane so
    they intersect shadow/reflection volumes dimension-consistently;
    ``region`` is the matching 2D polygon union and ``cell_rings_2d``
    the per-cell CCW rings used by the ground-clipping hot path.
    """

    squares: CZCollection
    center: np.ndarray
    half_width: float
    frame: StreetFrame
    region: Region2D
    cell_rings_2d: tuple = ()

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(2)
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        if not self.cell_rings_2d:
            from .geom3d import convex_hull_2d

            rings = tuple(convex_hull_2d(cell.vrep[:, :2]) for cell in self.squares)
            object.__setattr__(self, "cell_rings_2d", rings)


@dataclass(frozen=True)
class CityModel:
    ground: CZCollection
    buildings: tuple
    aoi: AOI

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))

    @property
    def n_buildings(self) -> int:
        return len(self.buildings)

    def max_building_height(self) -> float:
        h = 0.0
        for b in self.buildings:
            h = max(h, float(b.vertices()[:, 2].max()))
        return h

    def all_building_triangles(self) -> np.ndarray:
        """(n, 3, 3) stack of every building triangle, for ray oracles."""
        tris = [b.triangle_arrays() for b in self.buildings]
        if not tris:
            return np.zeros((0, 3, 3))
        return np.vstack(tris)

    def with_aoi(self, aoi: AOI) -> "CityModel":
        return replace(self, aoi=aoi)


def triangle_to_cz(t1, t2, t3) -> ConstrainedZonotope:
    """Triangle as a constrained zonotope via two chained convex hulls."""
    pts = np.asarray([t1, t2, t3], dtype=float)
    area2 = np.linalg.norm(np.cross(pts[1] - pts[0], pts[2] - pts[0]))
    if area2 <= TOL_GEOM:
        raise ValueError("collinear (zero-area) triangle")
    cz = czono.convex_hull(czono.convex_hull(czono.from_point(pts[0]), czono.from_point(pts[1])), czono.from_point(pts[2]))
    return cz


def _triangle_normal(tri: np.ndarray) -> np.ndarray:
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    return n / np.linalg.norm(n)


def _orient_outward(tri: np.ndarray, normal: np.ndarray, mesh_tris: np.ndarray, closed: bool, rep: np.ndarray) -> np.ndarray:
    """Flip a face normal so it points away from the building interior."""
    centroid = tri.mean(axis=0)
    if closed:
        probe = centroid + 1e-3 * normal
        try:
            inside = point_in_closed_mesh(probe, mesh_tris)
            return -normal if inside else normal
        except RuntimeError:
            pass
    # open mesh fallback: point away from the building's vertex mean
    return -normal if normal @ (centroid - rep) < 0 else normal


def _is_closed_mesh(tris: np.ndarray) -> bool:
    """Every undirected edge must be shared by exactly two triangles."""
    edges = {}
    for tri in tris:
        for i in range(3):
            a = tuple(np.round(tri[i], 9))
            b = tuple(np.round(tri[(i + 1) % 3], 9))
            key = (a, b) if a <= b else (b, a)
            edges[key] = edges.get(key, 0) + 1
    return all(v == 2 for v in edges.values())


def group_planes(building: Building, ang_tol: float = DEFAULT_ANG_TOL) -> tuple:
    """Partition building faces into planes.

    Two triangles join the same plane when their outward normals agree
    within ``ang_tol`` *and* they are connected through shared vertices.
    Floor faces lying in the ground plane are excluded: they can never
    reflect a signal downward and only slow the pipeline.
    """
    tris = building.triangle_arrays()
    closed = _is_closed_mesh(tris)
    if not closed:
        log.warning("building %s: surface is not closed; outward normals use the centroid fallback", building.id)
    normals = []
    for tri in tris:
        n = _triangle_normal(tri)
        normals.append(_orient_outward(tri, n, tris, closed, building.representative_point))
    normals = np.array(normals)

    # exclude floors: downward-facing faces flush with z = 0
    keep = []
    for i, tri in enumerate(tris):
        flat = abs(abs(normals[i][2]) - 1.0) < 1e-9
        on_ground = np.all(np.abs(tri[:, 2]) <= TOL_GEOM)
        if flat and on_ground:
            continue
        keep.append(i)

    cos_tol = np.cos(ang_tol)
    parent = {i: i for i in keep}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def share_vertex(a, b):
        d = np.linalg.norm(tris[a][:, None, :] - tris[b][None, :, :], axis=2)
        return bool((d <= TOL_GEOM).any())

    for ii, i in enumerate(keep):
        for j in keep[ii + 1 :]:
            if normals[i] @ normals[j] >= cos_tol and share_vertex(i, j):
                parent[find(i)] = find(j)

    groups = {}
    for i in keep:
        groups.setdefault(find(i), []).append(i)

    planes = []
    for idxs in groups.values():
        idxs = tuple(sorted(idxs))
        coll = CZCollection(tuple(building.triangles.members[i] for i in idxs))
        n = normals[list(idxs)].mean(axis=0)
        n /= np.linalg.norm(n)
        mean = czono.collection_vertices(coll).mean(axis=0)
        planes.append(Plane(building.id, idxs, coll, n, mean, mean))
    planes.sort(key=lambda p: p.triangle_indices)
    return tuple(planes)


def make_aoi(center, half_width: float, frame: StreetFrame) -> AOI:
    """Single square AOI cell aligned with the street frame."""
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    c = np.asarray(center, dtype=float).reshape(2)
    corners_2d = frame.to_world(
        np.array(
            [
                frame.to_frame(c)[0] + [-half_width, -half_width],
                frame.to_frame(c)[0] + [half_width, -half_width],
                frame.to_frame(c)[0] + [half_width, half_width],
                frame.to_frame(c)[0] + [-half_width, half_width],
            ]
        )
    )
    corners = np.column_stack([corners_2d, np.zeros(4)])
    gen = np.column_stack(
        [
            half_width * np.append(frame.along_axis, 0.0),
            half_width * np.append(frame.cross_axis, 0.0),
        ]
    )
    cell = ConstrainedZonotope(np.append(c, 0.0), gen, np.zeros((0, 2)), np.zeros(0), corners)
    region = Region2D.from_rings([corners_2d])
    return AOI(CZCollection((cell,)), c, float(half_width), frame, region)


def aoi_from_ground(ground: CZCollection, frame: StreetFrame | None = None) -> AOI:
    """Fallback AOI covering the whole ground extent (no-fix case)."""
    frame = frame or StreetFrame.axis_aligned()
    pts = czono.collection_vertices(ground)[:, :2]
    local = frame.to_frame(pts)
    lo, hi = local.min(axis=0), local.max(axis=0)
    center_local = 0.5 * (lo + hi)
    half = float(max(hi - lo) / 2.0)
    center = frame.to_world(center_local.reshape(1, 2))[0]
    return make_aoi(center, half, frame)


def _parse_triangle(raw, where: str) -> np.ndarray:
    try:
        tri = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as err:
        raise CityModelError(f"{where}: triangle is not a 3x3 number array") from err
    if tri.shape != (3, 3):
        raise CityModelError(f"{where}: expected 3 vertices of 3 coordinates, got shape {tri.shape}")
    if not np.isfinite(tri).all():
        raise CityModelError(f"{where}: non-finite coordinate")
    return tri


def build_city_model(doc: dict, ang_tol: float = DEFAULT_ANG_TOL, aoi: AOI | None = None) -> CityModel:
    """Construct a CityModel from a parsed city-model mapping."""
    if not isinstance(doc, dict) or "ground" not in doc or "buildings" not in doc:
        raise CityModelError('city model must be an object with "ground" and "buildings"')
    ground_czs = []
    for k, raw in enumerate(doc["ground"]):
        tri = _parse_triangle(raw, f"ground[{k}]")
        if np.any(np.abs(tri[:, 2]) > TOL_GEOM):
            raise CityModelError(f"ground[{k}]: ground triangles must lie in the plane z = 0")
        try:
            ground_czs.append(triangle_to_cz(*tri))
        except ValueError as err:
            raise CityModelError(f"ground[{k}]: {err}") from err
    ground = CZCollection(tuple(ground_czs))

    buildings = []
    for bi, braw in enumerate(doc["buildings"]):
        if not isinstance(braw, dict) or "triangles" not in braw:
            raise CityModelError(f'buildings[{bi}]: expected an object with "id" and "triangles"')
        bid = int(braw.get("id", bi))
        czs = []
        for ti, raw in enumerate(braw["triangles"]):
            tri = _parse_triangle(raw, f"buildings[{bi}].triangles[{ti}]")
            try:
                czs.append(triangle_to_cz(*tri))
            except ValueError as err:
                raise CityModelError(f"buildings[{bi}].triangles[{ti}]: {err}") from err
        b = Building(bid, CZCollection(tuple(czs)))
        b = replace(b, planes=group_planes(b, ang_tol))
        buildings.append(b)

    if aoi is None:
        if ground_czs:
            aoi = aoi_from_ground(ground)
        else:
            aoi = make_aoi((0.0, 0.0), DEFAULT_AOI_HALF_WIDTH, StreetFrame.axis_aligned())
    return CityModel(ground, tuple(buildings), aoi)


def load_city_model(path, ang_tol: float = DEFAULT_ANG_TOL, aoi: AOI | None = None) -> CityModel:
    """Load and validate a city-model JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise CityModelError(f"city model file not found: {path}")
    except json.JSONDecodeError as err:
        raise CityModelError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}") from err
    return build_city_model(doc, ang_tol=ang_tol, aoi=aoi)


def city_model_to_doc(city: CityModel) -> dict:
    """Serialize a CityModel back into the JSON mesh mapping."""
    return {
        "ground": [z.vrep.tolist() for z in city.ground],
        "buildings": [
            {"id": b.id, "triangles": [z.vrep.tolist() for z in b.triangles]} for b in city.buildings
        ],
    }


def box_building_triangles(x0, x1, y0, y1, height) -> list:
    """Axis-aligned closed box mesh (12 triangles), floor at z = 0."""
    c = [
        [x0, y0, 0.0], [x1, y0, 0.0], [x1, y1, 0.0], [x0, y1, 0.0],
        [x0, y0, height], [x1, y0, height], [x1, y1, height], [x0, y1, height],
    ]
    quads = [
        (3, 2, 1, 0),  # floor
        (4, 5, 6, 7),  # roof
        (0, 1, 5, 4),  # y = y0 wall
        (1, 2, 6, 5),  # x = x1 wall
        (2, 3, 7, 6),  # y = y1 wall
        (3, 0, 4, 7),  # x = x0 wall
    ]
    tris = []
    for a, b, cq, d in quads:
        tris.append([c[a], c[b], c[cq]])
        tris.append([c[a], c[cq], c[d]])
    return tris


def ground_square(half_extent: float) -> list:
    """Two-triangle ground square centered at the origin."""
    h = float(half_extent)
    return [
        [[-h, -h, 0.0], [h, -h, 0.0], [h, h, 0.0]],
        [[-h, -h, 0.0], [h, h, 0.0], [-h, h, 0.0]],
    ]


__all__ = [
    "AOI",
    "Building",
    "CityModel",
    "CityModelError",
    "Plane",
    "aoi_from_ground",
    "box_building_triangles",
    "build_city_model",
    "city_model_to_doc",
    "group_planes",
    "ground_square",
    "load_city_model",
    "make_aoi",
    "triangle_to_cz",
]
