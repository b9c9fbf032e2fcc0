"""Synthetic scenarios, the epoch runner and validation metrics.

Scenario generation stands in for field data: a street-canyon city is
built from a seed, satellites are drawn per epoch, the true receiver
position is placed on the street with a guaranteed clearance from every
shadow/reflection boundary (so containment failures can only come from
the estimator, never from boundary-grazing truth), reception conditions
are labeled by the ray-tracing oracle, and pseudoranges carry the
single-bounce excess delay for NLOS-only signals.

Per epoch the runner classifies (ideal labels or noisy classifiers plus
unanimous voting), estimates (shadow-only or shadow-and-reflection),
selects a mode (ideal or pseudorange-consistency) and scores the five
validation metrics: horizontal / cross-street / along-street error of
the selected-mode centroid and the cross/along widths of its bounding
box.  Failed epochs (empty set) are excluded from RMS aggregation and
counted separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .citymodel import (
    CityModel,
    box_building_triangles,
    build_city_model,
    ground_square,
    make_aoi,
)
from .modeselect import SPCConfig, SPCObservation, ideal_select, spc_select
from .positioning import PositionSet, compute_epoch_geometry, zsm_estimate, zsrm_estimate
from .region2d import StreetFrame
from .shadow import DEFAULT_EPS, SatelliteState
from .sigclass import (
    DEFAULT_MATRICES,
    ReceptionCondition,
    noisy_classify,
    oracle_classify,
    shortest_bounce_delay,
    unanimous_vote,
)

SCHEMA_VERSION = 1
CONDITION_NAMES = {c: c.name for c in ReceptionCondition}
NAME_CONDITIONS = {c.name: c for c in ReceptionCondition}


@dataclass(frozen=True)
class SatelliteObservation:
    """One tracked satellite in one epoch."""

    state: SatelliteState
    true_condition: ReceptionCondition
    pseudorange: float
    nlos_delay: float

    def __post_init__(self):
        if self.nlos_delay < 0:
            raise ValueError("nlos delay cannot be negative")


@dataclass(frozen=True)
class ScenarioParams:
    """Envelope for synthetic scenario generation (validated)."""

    preset: str = "canyon"
    n_epochs: int = 10
    building_count: tuple = (2, 6)
    height_range: tuple = (10.0, 80.0)
    street_width_range: tuple = (15.0, 40.0)
    satellites_range: tuple = (6, 15)
    elevation_range_deg: tuple = (15.0, 75.0)
    range_interval: tuple = (1.0e6, 3.0e6)
    noise_sigma: float = 1.0
    bias_los_nlos: float = 0.0
    aoi_half_width: float = 60.0
    fix_noise_sigma: float = 5.0
    fix_noise_clip: float = 20.0
    truth_margin: float = 0.2
    street_angle_rad: float = 0.0

    def validate(self):
        if self.preset not in ("canyon", "boxes"):
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.n_epochs < 1:
            raise ValueError("n_epochs must be >= 1")
        lo, hi = self.building_count
        if not (1 <= lo <= hi <= 8):
            raise ValueError("building count must stay within 1..8")
        lo, hi = self.height_range
        if not (10.0 <= lo <= hi <= 80.0):
            raise ValueError("building heights must stay within 10..80 m")
        lo, hi = self.street_width_range
        if not (15.0 <= lo <= hi <= 40.0):
            raise ValueError("street width must stay within 15..40 m")
        lo, hi = self.satellites_range
        if not (6 <= lo <= hi <= 15):
            raise ValueError("satellites per epoch must stay within 6..15")
        lo, hi = self.elevation_range_deg
        if not (5.0 <= lo <= hi <= 85.0):
            raise ValueError("elevation range must stay within 5..85 deg")
        if self.range_interval[0] < 1.0e6:
            raise ValueError("satellite range must be at least 1e6 m")
        if self.noise_sigma < 0 or self.truth_margin <= 0:
            raise ValueError("invalid noise sigma or truth margin")
        return self


@dataclass(frozen=True)
class Scenario:
    city: CityModel
    frame: StreetFrame
    aoi_half_width: float
    trajectory: tuple                 # per-epoch true 2D positions
    ranging_fixes: tuple              # per-epoch coarse 2D fixes
    satellites_per_epoch: tuple       # per-epoch SatelliteObservation tuples
    seed: int

    @property
    def n_epochs(self) -> int:
        return len(self.trajectory)


@dataclass(frozen=True)
class EpochMetrics:
    """Validation metrics of one epoch (selected-mode based)."""

    epoch: int
    estimator: str
    failed: bool
    mode_correct: bool
    horizontal_error: float = float("nan")
    cross_error: float = float("nan")
    along_error: float = float("nan")
    cross_bound: float = float("nan")
    along_bound: float = float("nan")
    n_modes: int = 0
    selected_mode: int | None = None
    n_satellites: int = 0
    region_area: float = 0.0


@dataclass(frozen=True)
class RmsReport:
    estimator: str
    n_epochs: int
    n_failed: int
    failure_rate: float
    mode_accuracy: float
    rms_horizontal_error: float
    rms_cross_error: float
    rms_along_error: float
    rms_cross_bound: float
    rms_along_bound: float


# --------------------------------------------------------------------
# scenario generation
# --------------------------------------------------------------------


def _draw_satellites(rng: np.random.Generator, params: ScenarioParams, max_height: float):
    lo, hi = params.satellites_range
    count = int(rng.integers(lo, hi + 1))
    sats = []
    el_lo, el_hi = np.deg2rad(params.elevation_range_deg)
    for i in range(count):
        az = rng.uniform(0.0, 2.0 * np.pi)
        el = rng.uniform(el_lo, el_hi)
        rho = rng.uniform(*params.range_interval)
        pos = rho * np.array([np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)])
        if pos[2] < 10.0 * max_height:  # keep the far-field assumption valid
            pos[2] = 10.0 * max_height + rho * 0.01
        sats.append(SatelliteState(f"S{i:02d}", pos))
    return sats


def _canyon_city_doc(rng: np.random.Generator, params: ScenarioParams):
    """Two rows of box buildings along the street with random gaps."""
    width = rng.uniform(*params.street_width_range)
    n_buildings = int(rng.integers(params.building_count[0], params.building_count[1] + 1))
    docs = []
    bid = 0
    along_cursor = {-1: -70.0, 1: -70.0}
    side = -1
    while bid < n_buildings:
        side = -side
        length = rng.uniform(25.0, 60.0)
        depth = rng.uniform(12.0, 30.0)
        gap = rng.uniform(0.0, 12.0)
        x0 = along_cursor[side] + gap
        x1 = x0 + length
        along_cursor[side] = x1
        height = rng.uniform(*params.height_range)
        if side > 0:
            y0, y1 = width / 2.0, width / 2.0 + depth
        else:
            y0, y1 = -width / 2.0 - depth, -width / 2.0
        docs.append({"id": bid, "triangles": box_building_triangles(x0, x1, y0, y1, height)})
        bid += 1
    return docs, width


def _boxes_city_doc(rng: np.random.Generator, count_range, height_range, extent=50.0):
    """Random non-overlapping boxes scattered around the origin."""
    n = int(rng.integers(count_range[0], count_range[1] + 1))
    placed = []
    docs = []
    attempts = 0
    while len(docs) < n and attempts < 500:
        attempts += 1
        w = rng.uniform(10.0, 40.0)
        d = rng.uniform(10.0, 40.0)
        cx = rng.uniform(-extent, extent)
        cy = rng.uniform(-extent, extent)
        box = (cx - w / 2, cx + w / 2, cy - d / 2, cy + d / 2)
        if any(not (box[1] < o[0] - 2 or box[0] > o[1] + 2 or box[3] < o[2] - 2 or box[2] > o[3] + 2) for o in placed):
            continue
        placed.append(box)
        h = rng.uniform(*height_range)
        docs.append({"id": len(docs), "triangles": box_building_triangles(*box, h)})
    return docs


def generate_box_scene(seed: int, n_buildings=(1, 5), heights=(10.0, 60.0), n_satellites=(1, 8), elevation_deg=(10.0, 80.0), aoi_half_width=60.0):
    """Standalone oracle-validation scene: random boxes plus satellites."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB0C5]))
    docs = _boxes_city_doc(rng, n_buildings, heights)
    doc = {"ground": ground_square(aoi_half_width + 400.0), "buildings": docs}
    frame = StreetFrame.axis_aligned()
    city = build_city_model(doc, aoi=make_aoi((0.0, 0.0), aoi_half_width, frame))
    max_h = city.max_building_height()
    count = int(rng.integers(n_satellites[0], n_satellites[1] + 1))
    el_lo, el_hi = np.deg2rad(elevation_deg)
    sats = []
    for i in range(count):
        az = rng.uniform(0.0, 2.0 * np.pi)
        el = rng.uniform(el_lo, el_hi)
        rho = rng.uniform(1.0e6, 3.0e6)
        pos = rho * np.array([np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)])
        if pos[2] < 10.0 * max_h:
            pos[2] = 10.0 * max_h + rho * 0.01
        sats.append(SatelliteState(f"S{i:02d}", pos))
    return city, sats


def nlos_delay(receiver2d, satellite: SatelliteState, city: CityModel) -> float:
    """Shortest single-bounce excess path length at a receiver, meters."""
    delay, _found = shortest_bounce_delay(receiver2d, satellite, city)
    return delay


def generate_scenario(params: ScenarioParams, seed: int) -> Scenario:
    """Reproducible scenario from a seed; labels come from the oracle."""
    params.validate()
    root = np.random.SeedSequence(seed)
    ss_city, ss_sats, ss_truth, ss_noise = root.spawn(4)
    rng_city = np.random.default_rng(ss_city)
    rng_truth = np.random.default_rng(ss_truth)
    rng_noise = np.random.default_rng(ss_noise)
    frame = StreetFrame.from_angle((0.0, 0.0), params.street_angle_rad)

    if params.preset == "canyon":
        building_docs, street_width = _canyon_city_doc(rng_city, params)
    else:
        building_docs = _boxes_city_doc(rng_city, params.building_count, params.height_range)
        street_width = params.street_width_range[0]
    doc = {"ground": ground_square(params.aoi_half_width + 400.0), "buildings": building_docs}
    # generation-time AOI is generous so every epoch AOI stays inside it
    gen_aoi = make_aoi((0.0, 0.0), params.aoi_half_width + 90.0, frame)
    city = build_city_model(doc, aoi=gen_aoi)

    sat_children = ss_sats.spawn(params.n_epochs)
    trajectory, fixes, per_epoch = [], [], []
    for epoch in range(params.n_epochs):
        rng_sat = np.random.default_rng(sat_children[epoch])
        max_h = city.max_building_height()
        truth = None
        for _redraw in range(20):
            sats = _draw_satellites(rng_sat, params, max_h)
            geometry = compute_epoch_geometry(city, sats)
            truth = _place_truth(rng_truth, params, frame, street_width, geometry)
            if truth is not None:
                break
        if truth is None:
            raise RuntimeError(f"epoch {epoch}: no street position clears the {params.truth_margin} m boundary margin")
        observations = []
        for sat in sats:
            condition = oracle_classify(truth, sat, city)
            if condition is None:
                continue  # untrackable: no direct and no bounce path
            delay, _ = shortest_bounce_delay(truth, sat, city)
            true_range = float(np.linalg.norm(sat.position - np.array([truth[0], truth[1], 0.0])))
            bias = 0.0
            if condition == ReceptionCondition.NLOS_ONLY:
                bias = delay
            elif condition == ReceptionCondition.LOS_NLOS:
                bias = params.bias_los_nlos
            rho = true_range + bias + rng_noise.normal(0.0, params.noise_sigma)
            observations.append(SatelliteObservation(sat, condition, rho, delay))
        fix_offset = rng_noise.normal(0.0, params.fix_noise_sigma, 2)
        norm = float(np.linalg.norm(fix_offset))
        if norm > params.fix_noise_clip:
            fix_offset *= params.fix_noise_clip / norm
        trajectory.append(np.asarray(truth, dtype=float))
        fixes.append(np.asarray(truth, dtype=float) + fix_offset)
        per_epoch.append(tuple(observations))
    return Scenario(city, frame, params.aoi_half_width, tuple(trajectory), tuple(fixes), tuple(per_epoch), seed)


def _place_truth(rng, params: ScenarioParams, frame: StreetFrame, street_width: float, geometry, attempts: int = 40):
    """Sample a street position clear of every product boundary."""
    margin = params.truth_margin
    for _ in range(attempts):
        along = rng.uniform(-30.0, 30.0)
        cross = rng.uniform(-street_width / 2.0 + 2.0, street_width / 2.0 - 2.0)
        truth = frame.to_world(np.array([[along, cross]]))[0]
        ok = True
        for geo in geometry:
            if geo.shadow_region.boundary_distance(truth) < margin:
                ok = False
                break
            if geo.reflection_region.boundary_distance(truth) < margin:
                ok = False
                break
        if ok:
            return truth
    return None


# --------------------------------------------------------------------
# epoch runner
# --------------------------------------------------------------------


def classify_epoch(observations, scheme: str, classifier_seed: int, epoch: int, matrices=DEFAULT_MATRICES):
    """Noisy classification with unanimous voting over three classifiers.

    ``scheme`` is "ternary" (three-class voting, used by the
    shadow-and-reflection estimator) or "binary" (votes on the LOS/NLOS
    collapse, used by shadow-only matching).  Returns kept
    (observation, condition, p_los) triples; non-unanimous satellites
    are dropped.
    """
    kept = []
    for sat_idx, obs in enumerate(observations):
        outputs = []
        for clf_idx, cm in enumerate(matrices):
            ss = np.random.SeedSequence([classifier_seed, epoch, sat_idx, clf_idx])
            outputs.append(noisy_classify(obs.true_condition, cm, np.random.default_rng(ss)))
        p_los = float(np.mean([o.p_los for o in outputs]))
        if scheme == "ternary":
            voted = unanimous_vote(outputs)
            if voted is None:
                continue
            kept.append((obs, voted, p_los))
        elif scheme == "binary":
            flags = [o.predicted.is_los for o in outputs]
            if len(set(flags)) != 1:
                continue
            voted = ReceptionCondition.LOS_ONLY if flags[0] else ReceptionCondition.NLOS_ONLY
            kept.append((obs, voted, p_los))
        else:
            raise ValueError(f"unknown voting scheme {scheme!r}")
    return kept


def _metrics_from_selection(epoch, estimator, truth, frame, position: PositionSet, selected, n_sats) -> EpochMetrics:
    if position.failed or selected is None:
        return EpochMetrics(
            epoch=epoch,
            estimator=estimator,
            failed=True,
            mode_correct=False,
            n_modes=len(position.mode_list),
            n_satellites=n_sats,
            region_area=position.region.area,
        )
    mode = position.mode_list[selected]
    centroid = mode.centroid()
    local_err = frame.to_frame(centroid.reshape(1, 2))[0] - frame.to_frame(np.asarray(truth).reshape(1, 2))[0]
    along_err, cross_err = float(local_err[0]), float(local_err[1])
    cross_bound, along_bound = mode.bounds_in_frame(frame)
    return EpochMetrics(
        epoch=epoch,
        estimator=estimator,
        failed=False,
        mode_correct=mode.contains_point(truth, tol=1e-9),
        horizontal_error=float(np.hypot(cross_err, along_err)),
        cross_error=cross_err,
        along_error=along_err,
        cross_bound=cross_bound,
        along_bound=along_bound,
        n_modes=len(position.mode_list),
        selected_mode=selected,
        n_satellites=n_sats,
        region_area=position.region.area,
    )


def run_epoch(
    scenario: Scenario,
    epoch: int,
    estimator: str = "zsrm",
    classification: str = "ideal",
    mode_selection: str = "ideal",
    classifier_seed: int = 0,
    spc_seed: int = 0,
    spc_config: SPCConfig | None = None,
    eps: float = DEFAULT_EPS,
    geometry_cache: dict | None = None,
) -> EpochMetrics:
    """Run one epoch end to end and score it.

    ``estimator`` is "zsm" or "zsrm"; ``classification`` is "ideal"
    (oracle labels) or "realistic" (noisy classifiers with unanimous
    voting); ``mode_selection`` is "ideal" or "spc".
    """
    if estimator not in ("zsm", "zsrm"):
        raise ValueError(f"unknown estimator {estimator!r}")
    if not 0 <= epoch < scenario.n_epochs:
        raise IndexError(f"epoch {epoch} out of range")
    observations = scenario.satellites_per_epoch[epoch]
    truth = scenario.trajectory[epoch]
    aoi = make_aoi(scenario.ranging_fixes[epoch], scenario.aoi_half_width, scenario.frame)
    city = scenario.city.with_aoi(aoi)

    if classification == "ideal":
        kept = [(obs, obs.true_condition, 1.0 if obs.true_condition.is_los else 0.0) for obs in observations]
    elif classification == "realistic":
        scheme = "ternary" if estimator == "zsrm" else "binary"
        kept = classify_epoch(observations, scheme, classifier_seed, epoch)
    else:
        raise ValueError(f"unknown classification {classification!r}")

    states = [obs.state for obs, _, _ in kept]
    cache_key = (epoch, scenario.ranging_fixes[epoch][0], scenario.ranging_fixes[epoch][1])
    geometry_full = None
    if geometry_cache is not None and cache_key in geometry_cache:
        geometry_full = geometry_cache[cache_key]
    if geometry_full is None:
        all_states = [obs.state for obs in observations]
        geometry_full = {s.id: g for s, g in zip(all_states, compute_epoch_geometry(city, all_states, eps))}
        if geometry_cache is not None:
            geometry_cache[cache_key] = geometry_full
    geometry = [geometry_full[s.id] for s in states]

    if estimator == "zsm":
        pairs = [(obs.state, cond.is_los) for obs, cond, _ in kept]
        position = zsm_estimate(city, pairs, geometry=geometry, eps=eps)
    else:
        pairs = [(obs.state, cond) for obs, cond, _ in kept]
        position = zsrm_estimate(city, pairs, geometry=geometry, eps=eps)

    selected = None
    if not position.failed:
        if mode_selection == "ideal":
            selected = ideal_select(position.mode_list, truth)
        elif mode_selection == "spc":
            spc_obs = [SPCObservation(obs.state, obs.pseudorange, p) for obs, _, p in kept]
            rng = np.random.default_rng(np.random.SeedSequence([spc_seed, epoch]))
            selected = spc_select(position.mode_list, spc_obs, spc_config, rng)
        else:
            raise ValueError(f"unknown mode selection {mode_selection!r}")
    return _metrics_from_selection(epoch, estimator, truth, scenario.frame, position, selected, len(kept))


def aggregate(metrics) -> RmsReport:
    """RMS over non-failed epochs plus failure/mode-accuracy accounting."""
    metrics = list(metrics)
    if not metrics:
        raise ValueError("no epochs to aggregate")
    ok = [m for m in metrics if not m.failed]
    if not ok:
        raise ValueError("all epochs failed; no RMS is defined")
    def rms(vals):
        arr = np.asarray(vals, dtype=float)
        return float(np.sqrt(np.mean(arr ** 2)))
    return RmsReport(
        estimator=metrics[0].estimator,
        n_epochs=len(metrics),
        n_failed=len(metrics) - len(ok),
        failure_rate=(len(metrics) - len(ok)) / len(metrics),
        mode_accuracy=float(np.mean([1.0 if m.mode_correct else 0.0 for m in ok])),
        rms_horizontal_error=rms([m.horizontal_error for m in ok]),
        rms_cross_error=rms([m.cross_error for m in ok]),
        rms_along_error=rms([m.along_error for m in ok]),
        rms_cross_bound=rms([m.cross_bound for m in ok]),
        rms_along_bound=rms([m.along_bound for m in ok]),
    )


# --------------------------------------------------------------------
# scenario (de)serialization
# --------------------------------------------------------------------


def scenario_to_doc(scenario: Scenario) -> dict:
    from .citymodel import city_model_to_doc

    return {
        "schemaVersion": SCHEMA_VERSION,
        "seed": scenario.seed,
        "aoiHalfWidth": scenario.aoi_half_width,
        "frame": {
            "origin": scenario.frame.origin.tolist(),
            "along": scenario.frame.along_axis.tolist(),
            "cross": scenario.frame.cross_axis.tolist(),
        },
        "city": city_model_to_doc(scenario.city),
        "epochs": [
            {
                "epoch": i,
                "truth": scenario.trajectory[i].tolist(),
                "rangingFix": scenario.ranging_fixes[i].tolist(),
                "satellites": [
                    {
                        "id": o.state.id,
                        "position": o.state.position.tolist(),
                        "trueCondition": CONDITION_NAMES[o.true_condition],
                        "pseudorange": o.pseudorange,
                        "nlosDelay": o.nlos_delay,
                    }
                    for o in scenario.satellites_per_epoch[i]
                ],
            }
            for i in range(scenario.n_epochs)
        ],
    }


def scenario_from_doc(doc: dict) -> Scenario:
    if doc.get("schemaVersion") != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema version {doc.get('schemaVersion')!r}")
    frame = StreetFrame(
        np.asarray(doc["frame"]["origin"], dtype=float),
        np.asarray(doc["frame"]["along"], dtype=float),
        np.asarray(doc["frame"]["cross"], dtype=float),
    )
    half = float(doc["aoiHalfWidth"])
    city = build_city_model(doc["city"], aoi=make_aoi((0.0, 0.0), half + 90.0, frame))
    trajectory, fixes, per_epoch = [], [], []
    for ep in doc["epochs"]:
        trajectory.append(np.asarray(ep["truth"], dtype=float))
        fixes.append(np.asarray(ep["rangingFix"], dtype=float))
        obs = []
        for raw in ep["satellites"]:
            obs.append(
                SatelliteObservation(
                    SatelliteState(raw["id"], np.asarray(raw["position"], dtype=float)),
                    NAME_CONDITIONS[raw["trueCondition"]],
                    float(raw["pseudorange"]),
                    float(raw["nlosDelay"]),
                )
            )
        per_epoch.append(tuple(obs))
    return Scenario(city, frame, half, tuple(trajectory), tuple(fixes), tuple(per_epoch), int(doc["seed"]))


def save_scenario(scenario: Scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_doc(scenario), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_doc(json.load(fh))


# --------------------------------------------------------------------
# CSV emission (deterministic formatting)
# --------------------------------------------------------------------

METRICS_HEADER = (
    "epoch,estimator,classification,mode_selection,n_satellites,n_modes,failed,"
    "mode_correct,selected_mode,region_area_m2,horizontal_error_m,cross_error_m,"
    "along_error_m,cross_bound_m,along_bound_m"
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    return "nan" if np.isnan(f) else f"{f:.9g}"


def metrics_csv_lines(metrics, classification: str, mode_selection: str):
    lines = [METRICS_HEADER]
    for m in metrics:
        lines.append(
            ",".join(
                [
                    _fmt(m.epoch),
                    m.estimator,
                    classification,
                    mode_selection,
                    _fmt(m.n_satellites),
                    _fmt(m.n_modes),
                    _fmt(m.failed),
                    _fmt(m.mode_correct),
                    _fmt(m.selected_mode),
                    _fmt(m.region_area),
                    _fmt(m.horizontal_error),
                    _fmt(m.cross_error),
                    _fmt(m.along_error),
                    _fmt(m.cross_bound),
                    _fmt(m.along_bound),
                ]
            )
        )
    return lines


REPORT_HEADER = (
    "estimator,n_epochs,n_failed,failure_rate,mode_accuracy,rms_horizontal_error_m,"
    "rms_cross_error_m,rms_along_error_m,rms_cross_bound_m,rms_along_bound_m"
)


def report_csv_lines(reports):
    lines = [REPORT_HEADER]
    for r in reports:
        lines.append(
            ",".join(
                [
                    r.estimator,
                    _fmt(r.n_epochs),
                    _fmt(r.n_failed),
                    _fmt(r.failure_rate),
                    _fmt(r.mode_accuracy),
                    _fmt(r.rms_horizontal_error),
                    _fmt(r.rms_cross_error),
                    _fmt(r.rms_along_error),
                    _fmt(r.rms_cross_bound),
                    _fmt(r.rms_along_bound),
                ]
            )
        )
    return lines


def comparison_table(zsm: RmsReport, zsrm: RmsReport):
    """(metric, zsm, zsrm, improvement %) rows for the eval command."""
    rows = []
    pairs = [
        ("rms_horizontal_error_m", zsm.rms_horizontal_error, zsrm.rms_horizontal_error),
        ("rms_cross_error_m", zsm.rms_cross_error, zsrm.rms_cross_error),
        ("rms_along_error_m", zsm.rms_along_error, zsrm.rms_along_error),
        ("rms_cross_bound_m", zsm.rms_cross_bound, zsrm.rms_cross_bound),
        ("rms_along_bound_m", zsm.rms_along_bound, zsrm.rms_along_bound),
    ]
    for name, a, b in pairs:
        imp = float("nan") if a == 0 else 100.0 * (a - b) / a
        rows.append((name, a, b, imp))
    return rows


__all__ = [
    "EpochMetrics",
    "METRICS_HEADER",
    "RmsReport",
    "SatelliteObservation",
    "Scenario",
    "ScenarioParams",
    "aggregate",
    "classify_epoch",
    "comparison_table",
    "generate_box_scene",
    "generate_scenario",
    "load_scenario",
    "metrics_csv_lines",
    "nlos_delay",
    "report_csv_lines",
    "run_epoch",
    "save_scenario",
    "scenario_from_doc",
    "scenario_to_doc",
]
