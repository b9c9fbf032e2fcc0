"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line; run with ``pytest
tests/test_acceptance.py -v -s`` to see them.  The suite is heavier
than the unit tests (oracle grids at 0.5 m over 50 scenes, 100 canyon
epochs) and takes several minutes single-threaded.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import aoi_grid, oracle_reflection_mask, oracle_shadow_mask, region_membership, sat_at

import test_czono as czono_suites
from zonopos import reflection as rf
from zonopos import shadow as sh
from zonopos import sigclass as sc
from zonopos import simeval as se
from zonopos.modeselect import SPCConfig, SPCObservation, spc_select
from zonopos.region2d import Region2D

N_SCENES = 50
SCENE_SEED_BASE = 31500
CANYON_SEEDS = (101, 202, 303, 404)  # 4 x 25 epochs
EPOCHS_PER_SCENARIO = 25


def report(criterion, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {criterion} ({name}): {status} {detail}", flush=True)
    assert passed, f"criterion {criterion} ({name}) failed: {detail}"


# ---------------------------------------------------------------------------
# criteria 1+2: oracle equivalence over 50 seeded scenes
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def scene_results():
    """Shadow/reflection products and oracle masks for all scenes."""
    rows = []
    for i in range(N_SCENES):
        city, sats = se.generate_box_scene(SCENE_SEED_BASE + i)
        pts = aoi_grid(city, 0.5)
        t_shadow = t_refl = 0.0
        shadow_mm = refl_mm = 0
        for sat in sats:
            t0 = time.perf_counter()
            sp = sh.compute_shadow_product(city, sat)
            t_shadow += time.perf_counter() - t0
            t0 = time.perf_counter()
            _, refl = rf.compute_reflection_region(city, sat, sp)
            t_refl += time.perf_counter() - t0

            blocked = oracle_shadow_mask(city, sat, pts)
            member, dist = region_membership(sp.shadow_region, pts)
            keep = dist > 0.05
            shadow_mm += int(np.sum(member[keep] != blocked[keep]))

            oracle = oracle_reflection_mask(city, sat, pts, los_blocked=blocked)
            member2, dist2 = region_membership(refl, pts)
            keep2 = dist2 > 0.10
            refl_mm += int(np.sum(member2[keep2] != oracle[keep2]))
        rows.append(
            {
                "scene": i,
                "n_buildings": city.n_buildings,
                "n_satellites": len(sats),
                "t_shadow": t_shadow,
                "t_refl": t_refl,
                "shadow_mismatches": shadow_mm,
                "refl_mismatches": refl_mm,
            }
        )
    return rows


def test_criterion_1_shadow_oracle_equivalence(scene_results):
    mismatches = sum(r["shadow_mismatches"] for r in scene_results)
    worst = max(r["t_shadow"] for r in scene_results)
    ok = mismatches == 0 and worst < 2.0
    report(
        1,
        "shadow oracle equivalence",
        ok,
        f"scenes={len(scene_results)} mismatches={mismatches} worst_time={worst:.2f}s (<2s)",
    )


def test_criterion_2_reflection_oracle_equivalence(scene_results):
    mismatches = sum(r["refl_mismatches"] for r in scene_results)
    worst = max(r["t_refl"] for r in scene_results)
    ok = mismatches == 0 and worst < 10.0
    report(
        2,
        "reflection oracle equivalence",
        ok,
        f"scenes={len(scene_results)} mismatches={mismatches} worst_time={worst:.2f}s (<10s)",
    )


# ---------------------------------------------------------------------------
# criteria 3+4: containment and refinement over 100 canyon epochs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def canyon_runs():
    metrics = {"zsm": [], "zsrm": []}
    for seed in CANYON_SEEDS:
        params = se.ScenarioParams(
            preset="canyon",
            n_epochs=EPOCHS_PER_SCENARIO,
            building_count=(2, 5),
            height_range=(12.0, 60.0),
            satellites_range=(6, 10),
            elevation_range_deg=(15.0, 75.0),
        )
        scenario = se.generate_scenario(params, seed=seed)
        cache = {}
        for epoch in range(scenario.n_epochs):
            for estimator in ("zsm", "zsrm"):
                metrics[estimator].append(
                    se.run_epoch(scenario, epoch, estimator, "ideal", "ideal", geometry_cache=cache)
                )
    return metrics


def test_criterion_3_containment(canyon_runs):
    n = len(canyon_runs["zsm"])
    bad = sum(m.failed or not m.mode_correct for est in ("zsm", "zsrm") for m in canyon_runs[est])
    report(3, "containment under ideal classification", bad == 0, f"epochs={n} violations={bad}")


def test_criterion_4_refinement(canyon_runs):
    per_epoch_ok = all(
        mz.region_area + 1e-9 >= mr.region_area
        for mz, mr in zip(canyon_runs["zsm"], canyon_runs["zsrm"])
    )
    r_zsm = se.aggregate(canyon_runs["zsm"])
    r_zsrm = se.aggregate(canyon_runs["zsrm"])
    strict = (
        r_zsrm.rms_horizontal_error < r_zsm.rms_horizontal_error
        and r_zsrm.rms_cross_bound < r_zsm.rms_cross_bound
        and r_zsrm.rms_along_bound < r_zsm.rms_along_bound
    )
    imp = lambda a, b: 100.0 * (a - b) / a
    detail = (
        f"area_monotone={per_epoch_ok} "
        f"horiz {r_zsm.rms_horizontal_error:.2f}->{r_zsrm.rms_horizontal_error:.2f}m "
        f"({imp(r_zsm.rms_horizontal_error, r_zsrm.rms_horizontal_error):.1f}%), "
        f"cross_bound {r_zsm.rms_cross_bound:.1f}->{r_zsrm.rms_cross_bound:.1f}m "
        f"({imp(r_zsm.rms_cross_bound, r_zsrm.rms_cross_bound):.1f}%), "
        f"along_bound {r_zsm.rms_along_bound:.1f}->{r_zsrm.rms_along_bound:.1f}m "
        f"({imp(r_zsm.rms_along_bound, r_zsrm.rms_along_bound):.1f}%)"
    )
    report(4, "three-class refinement shrinks the estimate", per_epoch_ok and strict, detail)


# ---------------------------------------------------------------------------
# criterion 5: constrained-zonotope kernel randomized suites
# ---------------------------------------------------------------------------


def test_criterion_5_cz_kernel_properties():
    counts = {
        "hull_containment": 2500,
        "minkowski": 2500,
        "intersection": 2500,
        "dual_representation_points": 10_000,
        "vertices_determinism": 1000,
    }
    czono_suites.run_hull_containment_suite(counts["hull_containment"])
    czono_suites.run_minkowski_suite(counts["minkowski"])
    nonempty = czono_suites.run_intersection_suite(counts["intersection"])
    czono_suites.run_dual_representation_suite(counts["dual_representation_points"])
    czono_suites.run_vertices_determinism_suite(counts["vertices_determinism"])
    total = sum(counts.values())
    report(5, "constrained-zonotope kernel properties", True, f"cases={total} nonempty_intersections={nonempty}")


# ---------------------------------------------------------------------------
# criterion 6: classifier simulation matches the confusion matrices
# ---------------------------------------------------------------------------


def test_criterion_6_classifier_rates_and_voting():
    rng = np.random.default_rng(8675309)
    n_per_row = 34_000  # ~1e5 draws per matrix
    worst = 0.0
    for cm in sc.DEFAULT_MATRICES:
        for truth in sc.ReceptionCondition:
            draws = np.array(
                [int(sc.noisy_classify(truth, cm, rng).predicted) for _ in range(n_per_row)]
            )
            freq = np.bincount(draws, minlength=3) / n_per_row
            worst = max(worst, float(np.abs(freq - cm.row_probs[int(truth)]).max()))
    rates_ok = worst < 0.01

    # named spot checks: RF NLOS-only 51.4 %, GBDT LOS-only 76.1 %
    rf_rate = np.mean(
        [
            sc.noisy_classify(sc.ReceptionCondition.NLOS_ONLY, sc.DEFAULT_MATRICES[0], rng).predicted
            == sc.ReceptionCondition.NLOS_ONLY
            for _ in range(100_000)
        ]
    )
    gbdt_rate = np.mean(
        [
            sc.noisy_classify(sc.ReceptionCondition.LOS_ONLY, sc.DEFAULT_MATRICES[1], rng).predicted
            == sc.ReceptionCondition.LOS_ONLY
            for _ in range(100_000)
        ]
    )
    spot_ok = abs(rf_rate - 241 / 469) < 0.01 and abs(gbdt_rate - 2569 / 3374) < 0.01

    # unanimous voting: sampled retention/accuracy vs the closed-form
    # product of row probabilities under classifier independence
    vote_ok = True
    vote_detail = []
    for truth in sc.ReceptionCondition:
        rows = [cm.row_probs[int(truth)] for cm in sc.DEFAULT_MATRICES]
        retained_pred = sum(rows[0][c] * rows[1][c] * rows[2][c] for c in range(3))
        correct_pred = rows[0][int(truth)] * rows[1][int(truth)] * rows[2][int(truth)]
        n = 25_000
        kept = correct = 0
        for _ in range(n):
            outs = [sc.noisy_classify(truth, cm, rng) for cm in sc.DEFAULT_MATRICES]
            v = sc.unanimous_vote(outs)
            if v is not None:
                kept += 1
                correct += v == truth
        vote_ok &= abs(kept / n - retained_pred) < 0.01
        vote_ok &= abs(correct / n - correct_pred) < 0.01
        vote_detail.append(f"{truth.name}: kept {kept / n:.3f}/{retained_pred:.3f}")
    report(
        6,
        "classifier simulation",
        rates_ok and spot_ok and vote_ok,
        f"max_row_dev={worst:.4f} rf_nlos={rf_rate:.3f} gbdt_los={gbdt_rate:.3f}; " + "; ".join(vote_detail),
    )


# ---------------------------------------------------------------------------
# criterion 7: pseudorange-consistency mode selection sanity
# ---------------------------------------------------------------------------


def test_criterion_7_spc_sanity():
    assert SPCConfig().sample_count == 5000
    trials = 200
    correct = 0
    for t in range(trials):
        rng = np.random.default_rng(5000 + t)
        n = int(rng.integers(6, 13))
        sats = [sat_at(rng.uniform(0, 360), rng.uniform(15, 75), sat_id=f"S{k}") for k in range(n)]
        sep = rng.uniform(31.0, 120.0)
        ang = rng.uniform(0, 2 * np.pi)
        off = sep * np.array([np.cos(ang), np.sin(ang)])
        modes = [
            Region2D.box(-5, -5, 5, 5),
            Region2D.box(off[0] - 5, off[1] - 5, off[0] + 5, off[1] + 5),
        ]
        truth_mode = int(rng.integers(0, 2))
        truth = np.array([0.0, 0.0, 0.0]) if truth_mode == 0 else np.array([off[0], off[1], 0.0])
        obs = [SPCObservation(s, float(np.linalg.norm(s.position - truth)), 1.0) for s in sats]
        pick = spc_select(modes, obs, SPCConfig(), np.random.default_rng(9000 + t))
        correct += pick == truth_mode
    ok = correct >= int(np.ceil(0.99 * trials))
    report(7, "consistency-filter mode selection", ok, f"correct={correct}/{trials} (needs >=198)")


# ---------------------------------------------------------------------------
# criterion 8: byte-identical outputs under fixed seeds
# ---------------------------------------------------------------------------


def test_criterion_8_determinism(tmp_path):
    gen = subprocess.run(
        [
            sys.executable, "-m", "zonopos.cli", "generate", "--preset", "canyon",
            "--epochs", "2", "--buildings", "2", "3", "--satellites", "6", "8",
            "--seed", "77", "--out", str(tmp_path),
        ],
        capture_output=True,
        text=True,
    )
    assert gen.returncode == 0, gen.stderr
    scenario = tmp_path / "scenario.json"
    outputs = []
    for sub in ("r1", "r2"):
        res = subprocess.run(
            [
                sys.executable, "-m", "zonopos.cli", "eval", "--scenario", str(scenario),
                "--classification", "realistic", "--mode-selection", "spc",
                "--seed", "9", "--out", str(tmp_path / sub),
            ],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        outputs.append(
            {
                name: (tmp_path / sub / name).read_bytes()
                for name in ("summary.csv", "comparison.csv", "epochs_zsm.csv", "epochs_zsrm.csv")
            }
        )
    identical = outputs[0] == outputs[1]
    # GeoJSON determinism via the estimate command
    gjs = []
    for sub in ("g1", "g2"):
        res = subprocess.run(
            [
                sys.executable, "-m", "zonopos.cli", "estimate", "--scenario", str(scenario),
                "--estimator", "zsrm", "--seed", "9", "--out", str(tmp_path / sub),
            ],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        gjs.append((tmp_path / sub / "positions_zsrm.geojson").read_bytes())
    identical = identical and gjs[0] == gjs[1]
    report(8, "seeded runs byte-identical", identical, "csv+geojson compared across reruns")


# ---------------------------------------------------------------------------
# criterion 9: single-threaded epoch runtime budget
# ---------------------------------------------------------------------------


def test_criterion_9_runtime_budget():
    from conftest import build_city
    from zonopos.positioning import compute_epoch_geometry, zsrm_estimate
    from zonopos.sigclass import oracle_classify

    city = build_city(
        [(-35, 5, 14, 32, 45), (15, 45, 16, 34, 30), (-20, 25, -34, -15, 55)],
        aoi_half=60.0,
    )
    rng = np.random.default_rng(99)
    sats = [sat_at(rng.uniform(0, 360), rng.uniform(15, 75), sat_id=f"S{k}") for k in range(10)]
    truth = (0.0, 0.0)
    labeled = []
    for s in sats:
        c = oracle_classify(truth, s, city)
        labeled.append((s, c if c is not None else sc.ReceptionCondition.LOS_ONLY))
    t0 = time.perf_counter()
    geometry = compute_epoch_geometry(city, [s for s, _ in labeled])
    position = zsrm_estimate(city, labeled, geometry=geometry)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0 and position.region is not None
    report(9, "full epoch runtime", ok, f"3 buildings, 10 satellites: {elapsed:.2f}s (<5s)")
