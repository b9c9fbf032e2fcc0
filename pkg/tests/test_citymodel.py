"""City model ingestion, plane grouping, AOI construction."""

import json
import logging

import numpy as np
import pytest

from zonopos import citymodel as cm
from zonopos import czono
from zonopos.region2d import StreetFrame


def unit_box_doc():
    return {
        "ground": cm.ground_square(100.0),
        "buildings": [{"id": 0, "triangles": cm.box_building_triangles(0, 1, 0, 1, 1)}],
    }


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def test_load_unit_box(tmp_path):
    path = tmp_path / "city.json"
    path.write_text(json.dumps(unit_box_doc()))
    city = cm.load_city_model(path)
    assert city.n_buildings == 1
    b = city.buildings[0]
    assert len(b.triangles) == 12
    # floor excluded from plane grouping: 4 walls + roof remain
    assert len(b.planes) == 5
    normals = sorted(tuple(np.round(p.unit_normal, 9)) for p in b.planes)
    assert (0.0, 0.0, 1.0) in normals
    assert (0.0, 0.0, -1.0) not in normals


def test_load_empty_building_list():
    city = cm.build_city_model({"ground": cm.ground_square(10.0), "buildings": []})
    assert city.n_buildings == 0


def test_zero_area_triangle_reports_index():
    doc = unit_box_doc()
    doc["buildings"][0]["triangles"][3] = [[0, 0, 0], [1, 1, 1], [2, 2, 2]]
    with pytest.raises(cm.CityModelError, match=r"triangles\[3\]"):
        cm.build_city_model(doc)


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(cm.CityModelError, match="not found"):
        cm.load_city_model(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(cm.CityModelError, match="line"):
        cm.load_city_model(bad)


def test_ground_must_be_flat():
    doc = unit_box_doc()
    doc["ground"][0][0][2] = 0.5
    with pytest.raises(cm.CityModelError, match="z = 0"):
        cm.build_city_model(doc)


def test_non_closed_building_warns(caplog):
    doc = unit_box_doc()
    del doc["buildings"][0]["triangles"][10]  # open the mesh
    with caplog.at_level(logging.WARNING):
        cm.build_city_model(doc)
    assert any("not closed" in rec.message for rec in caplog.records)


def test_doc_roundtrip():
    city = cm.build_city_model(unit_box_doc())
    doc = cm.city_model_to_doc(city)
    city2 = cm.build_city_model(doc)
    assert city2.n_buildings == city.n_buildings
    assert np.allclose(
        city2.buildings[0].representative_point, city.buildings[0].representative_point
    )


# ---------------------------------------------------------------------------
# triangle_to_cz
# ---------------------------------------------------------------------------


def test_triangle_cz_membership():
    t = cm.triangle_to_cz([0, 0, 0], [1, 0, 0], [0, 1, 0])
    assert t.contains([0.25, 0.25, 0.0])
    assert not t.contains([1.0, 1.0, 0.0])


def test_triangle_cz_vertices_exact():
    pts = np.array([[0.3, -1.2, 4.0], [2.0, 0.7, -1.0], [-1.0, 2.0, 0.5]])
    t = cm.triangle_to_cz(*pts)
    assert sorted(map(tuple, t.vrep)) == sorted(map(tuple, pts))


def test_triangle_cz_collinear_rejected():
    with pytest.raises(ValueError, match="collinear"):
        cm.triangle_to_cz([0, 0, 0], [1, 0, 0], [2, 0, 0])


def test_triangle_cz_barycentric_sampling():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-10, 10, (3, 3))
    t = cm.triangle_to_cz(*pts)
    w = rng.dirichlet(np.ones(3), size=1000)
    for sample in w @ pts:
        assert t.contains(sample, tol=1e-7)


# ---------------------------------------------------------------------------
# plane grouping
# ---------------------------------------------------------------------------


def test_box_wall_planes_outward():
    city = cm.build_city_model(unit_box_doc())
    walls = [p for p in city.buildings[0].planes if abs(p.unit_normal[2]) < 1e-9]
    assert len(walls) == 4
    normals = sorted(tuple(np.round(p.unit_normal, 9)) for p in walls)
    assert normals == [(-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]
    for p in walls:
        # outward: the normal points away from the box center
        assert p.unit_normal @ (p.center - city.buildings[0].representative_point) > 0


def test_coplanar_disconnected_facades_stay_separate():
    # two coplanar walls (same plane x = 0) from two separate slabs that
    # belong to one building id but share no vertex
    tris = cm.box_building_triangles(0, 1, 0, 1, 1) + cm.box_building_triangles(0, 1, 5, 6, 1)
    doc = {"ground": cm.ground_square(50.0), "buildings": [{"id": 0, "triangles": tris}]}
    city = cm.build_city_model(doc)
    minus_x = [p for p in city.buildings[0].planes if np.allclose(p.unit_normal, [-1, 0, 0])]
    assert len(minus_x) == 2


def test_near_coplanar_roof_merges_within_ang_tol():
    # roof made of two triangles, one tilted by 1e-4 rad: grouped as one
    # plane when the tolerance allows it, two otherwise
    tilt = 1e-4
    tris = cm.box_building_triangles(0, 2, 0, 2, 2)
    tris[3] = [[0, 0, 2], [2, 2, 2], [0, 2, 2 + 2 * np.tan(tilt)]]
    doc = {"ground": cm.ground_square(50.0), "buildings": [{"id": 0, "triangles": tris}]}
    city_loose = cm.build_city_model(doc, ang_tol=1e-3)
    roofs_loose = [p for p in city_loose.buildings[0].planes if p.unit_normal[2] > 0.9]
    assert len(roofs_loose) == 1
    city_tight = cm.build_city_model(doc, ang_tol=1e-6)
    roofs_tight = [p for p in city_tight.buildings[0].planes if p.unit_normal[2] > 0.9]
    assert len(roofs_tight) == 2


def test_plane_counts_and_unit_normals():
    city = cm.build_city_model(unit_box_doc())
    b = city.buildings[0]
    counted = sum(len(p.triangles) for p in b.planes)
    floor_triangles = 2
    assert counted == len(b.triangles) - floor_triangles
    for p in b.planes:
        assert abs(np.linalg.norm(p.unit_normal) - 1.0) < 1e-9
        assert np.allclose(p.center, p.plane_vertex_mean)


def test_representative_point_recomputable():
    city = cm.build_city_model(unit_box_doc())
    b = city.buildings[0]
    assert np.allclose(b.representative_point, czono.collection_vertices(b.triangles).mean(axis=0))
    assert np.allclose(b.representative_point, [0.5, 0.5, 0.5])


# ---------------------------------------------------------------------------
# AOI
# ---------------------------------------------------------------------------


def test_make_aoi_default_size():
    aoi = cm.make_aoi((0, 0), 60.0, StreetFrame.axis_aligned())
    assert len(aoi.squares) == 1
    assert abs(aoi.region.area - 120.0 * 120.0) < 1e-6
    cross, along = aoi.region.bounds_in_frame(StreetFrame.axis_aligned())
    assert abs(cross - 120.0) < 1e-9 and abs(along - 120.0) < 1e-9


def test_make_aoi_rotated_corners():
    frame = StreetFrame.from_angle((0, 0), np.deg2rad(30))
    aoi = cm.make_aoi((0, 0), 60.0, frame)
    expected = frame.to_world(np.array([[-60, -60], [60, -60], [60, 60], [-60, 60]]))
    got = aoi.squares.members[0].vrep[:, :2]
    assert sorted(map(tuple, np.round(got, 9))) == sorted(map(tuple, np.round(expected, 9)))


def test_make_aoi_validates_half_width():
    with pytest.raises(ValueError):
        cm.make_aoi((0, 0), -1.0, StreetFrame.axis_aligned())


def test_aoi_fallback_covers_ground():
    city = cm.build_city_model(unit_box_doc())
    # default AOI comes from the ground extent (no-fix fallback)
    assert city.aoi.half_width == 100.0
    assert np.allclose(city.aoi.center, [0, 0])


def test_aoi_cells_lie_on_ground_plane():
    aoi = cm.make_aoi((5, -3), 60.0, StreetFrame.axis_aligned())
    cell = aoi.squares.members[0]
    assert np.allclose(cell.vrep[:, 2], 0.0)
    assert cell.contains([5.0, -3.0, 0.0])
