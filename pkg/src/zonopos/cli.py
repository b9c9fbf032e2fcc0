"""Command-line frontend.

Subcommands:

* ``generate``  -- build a synthetic scenario JSON from a seed
* ``regions``   -- export per-satellite shadow/reflection GeoJSON, with
  an optional ray-tracing verification pass (``--grid``)
* ``estimate``  -- run an estimator over all epochs; per-epoch CSV plus
  final-region GeoJSON dumps
* ``eval``      -- run both estimators and emit an RMS comparison table

All outputs land under ``--out``; inputs are never modified.  Given the
same seeds, repeated runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import simeval
from .citymodel import make_aoi
from .modeselect import SPCConfig
from .positioning import compute_epoch_geometry
from .shadow import DEFAULT_EPS
from .sigclass import ReceptionCondition, oracle_classify

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_scenario_or_exit(path):
    if not os.path.exists(path):
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    try:
        return simeval.load_scenario(path)
    except (ValueError, KeyError) as err:
        print(f"error: cannot parse scenario {path}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _feature(geometry, **props):
    return {"type": "Feature", "properties": props, "geometry": geometry}


def cmd_generate(args) -> int:
    params = simeval.ScenarioParams(
        preset=args.preset,
        n_epochs=args.epochs,
        building_count=(args.buildings[0], args.buildings[1]),
        height_range=(args.heights[0], args.heights[1]),
        street_width_range=(args.street_width[0], args.street_width[1]),
        satellites_range=(args.satellites[0], args.satellites[1]),
    )
    try:
        params.validate()
    except ValueError as err:
        print(f"error: invalid scenario parameters: {err}", file=sys.stderr)
        return EXIT_CONFIG
    scenario = simeval.generate_scenario(params, args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "scenario.json")
    simeval.save_scenario(scenario, path)
    print(f"wrote {path} ({scenario.n_epochs} epochs, {scenario.city.n_buildings} buildings)")
    return EXIT_OK


def cmd_regions(args) -> int:
    scenario = _load_scenario_or_exit(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    epoch = args.epoch
    if not 0 <= epoch < scenario.n_epochs:
        print(f"error: epoch {epoch} out of range 0..{scenario.n_epochs - 1}", file=sys.stderr)
        return EXIT_CONFIG
    aoi = make_aoi(scenario.ranging_fixes[epoch], scenario.aoi_half_width, scenario.frame)
    city = scenario.city.with_aoi(aoi)
    observations = scenario.satellites_per_epoch[epoch]
    states = [o.state for o in observations]
    geometry = compute_epoch_geometry(city, states, args.epsilon)
    features = []
    mismatch_total = 0
    for obs, geo in zip(observations, geometry):
        features.append(_feature(geo.shadow_region.to_geojson(), satellite=obs.state.id, kind="shadow"))
        features.append(_feature(geo.reflection_region.to_geojson(), satellite=obs.state.id, kind="reflection"))
        if args.grid:
            mismatch_total += _verify_against_oracle(city, obs.state, geo, args.grid)
    path = os.path.join(args.out, f"regions_epoch{epoch:04d}.geojson")
    _write_json(path, {"type": "FeatureCollection", "features": features})
    print(f"wrote {path} ({len(features)} features)")
    if args.grid:
        print(f"oracle verification at {args.grid} m grid: {mismatch_total} mismatches")
    return EXIT_OK


def _verify_against_oracle(city, state, geo, grid) -> int:
    """Count shadow/reflection disagreements with the ray oracle."""
    import shapely

    half = city.aoi.half_width
    center = city.aoi.center
    xs = np.arange(center[0] - half, center[0] + half + 1e-9, grid)
    ys = np.arange(center[1] - half, center[1] + half + 1e-9, grid)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    mismatches = 0
    for region, want in ((geo.shadow_region, "shadow"), (geo.reflection_region, "reflection")):
        if region.is_empty:
            member = np.zeros(len(pts), dtype=bool)
            dist = np.full(len(pts), np.inf)
        else:
            member = shapely.contains_xy(region.shapely, pts[:, 0], pts[:, 1])
            dist = shapely.distance(shapely.points(pts), region.shapely.boundary)
        band = 0.05 if want == "shadow" else 0.10
        for i, (x, y) in enumerate(pts):
            if dist[i] <= band:
                continue
            cond = oracle_classify((x, y), state, city)
            if want == "shadow":
                truth = cond in (ReceptionCondition.NLOS_ONLY, None)
            else:
                truth = cond == ReceptionCondition.LOS_NLOS
            if truth != bool(member[i]):
                mismatches += 1
    return mismatches


def _run_all_epochs(scenario, estimator, args, cache):
    metrics = []
    for epoch in range(scenario.n_epochs):
        metrics.append(
            simeval.run_epoch(
                scenario,
                epoch,
                estimator=estimator,
                classification=args.classification,
                mode_selection=args.mode_selection,
                classifier_seed=args.seed,
                spc_seed=args.seed + 1,
                spc_config=SPCConfig(),
                eps=args.epsilon,
                geometry_cache=cache,
            )
        )
    return metrics


def _dump_epoch_regions(scenario, estimator, args, out_dir, cache):
    """Final position-set GeoJSON per epoch for one estimator."""
    from .positioning import zsm_estimate, zsrm_estimate

    features = []
    for epoch in range(scenario.n_epochs):
        aoi = make_aoi(scenario.ranging_fixes[epoch], scenario.aoi_half_width, scenario.frame)
        city = scenario.city.with_aoi(aoi)
        observations = scenario.satellites_per_epoch[epoch]
        if args.classification == "ideal":
            kept = [(o, o.true_condition, 1.0 if o.true_condition.is_los else 0.0) for o in observations]
        else:
            scheme = "ternary" if estimator == "zsrm" else "binary"
            kept = simeval.classify_epoch(observations, scheme, args.seed, epoch)
        key = (epoch, scenario.ranging_fixes[epoch][0], scenario.ranging_fixes[epoch][1])
        if key not in cache:
            states = [o.state for o in observations]
            cache[key] = {s.id: g for s, g in zip(states, compute_epoch_geometry(city, states, args.epsilon))}
        geometry = [cache[key][o.state.id] for o, _, _ in kept]
        if estimator == "zsm":
            pos = zsm_estimate(city, [(o.state, c.is_los) for o, c, _ in kept], geometry=geometry, eps=args.epsilon)
        else:
            pos = zsrm_estimate(city, [(o.state, c) for o, c, _ in kept], geometry=geometry, eps=args.epsilon)
        features.append(
            _feature(
                pos.region.to_geojson(),
                epoch=epoch,
                estimator=estimator,
                failed=bool(pos.failed),
                n_modes=len(pos.mode_list),
            )
        )
    path = os.path.join(out_dir, f"positions_{estimator}.geojson")
    _write_json(path, {"type": "FeatureCollection", "features": features})
    return path


def cmd_estimate(args) -> int:
    scenario = _load_scenario_or_exit(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    estimators = ["zsm", "zsrm"] if args.estimator == "both" else [args.estimator]
    all_failed = True
    cache: dict = {}
    for estimator in estimators:
        metrics = _run_all_epochs(scenario, estimator, args, cache)
        if any(not m.failed for m in metrics):
            all_failed = False
        lines = simeval.metrics_csv_lines(metrics, args.classification, args.mode_selection)
        path = os.path.join(args.out, f"epochs_{estimator}.csv")
        _write_lines(path, lines)
        gj = _dump_epoch_regions(scenario, estimator, args, args.out, cache)
        print(f"wrote {path} and {gj}")
    if all_failed:
        print("error: estimation failed in every epoch", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_eval(args) -> int:
    scenario = _load_scenario_or_exit(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    reports = {}
    any_ok = False
    cache: dict = {}
    for estimator in ("zsm", "zsrm"):
        metrics = _run_all_epochs(scenario, estimator, args, cache)
        lines = simeval.metrics_csv_lines(metrics, args.classification, args.mode_selection)
        _write_lines(os.path.join(args.out, f"epochs_{estimator}.csv"), lines)
        try:
            reports[estimator] = simeval.aggregate(metrics)
            any_ok = True
        except ValueError:
            reports[estimator] = None
    if not any_ok:
        print("error: estimation failed in every epoch for both estimators", file=sys.stderr)
        return EXIT_ALL_FAILED
    lines = simeval.report_csv_lines([r for r in reports.values() if r is not None])
    _write_lines(os.path.join(args.out, "summary.csv"), lines)
    if reports["zsm"] and reports["zsrm"]:
        rows = simeval.comparison_table(reports["zsm"], reports["zsrm"])
        table = ["metric,zsm,zsrm,improvement_pct"]
        print(f"{'metric':<28}{'zsm':>12}{'zsrm':>12}{'improvement':>14}")
        for name, a, b, imp in rows:
            print(f"{name:<28}{a:>12.3f}{b:>12.3f}{imp:>13.1f}%")
            table.append(f"{name},{a:.9g},{b:.9g},{imp:.9g}")
        _write_lines(os.path.join(args.out, "comparison.csv"), table)
    print(f"wrote {os.path.join(args.out, 'summary.csv')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zonopos",
        description="Set-based urban GNSS positioning: shadows, reflections, estimation, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic scenario")
    gen.add_argument("--preset", choices=("canyon", "boxes"), default="canyon")
    gen.add_argument("--epochs", type=int, default=10)
    gen.add_argument("--buildings", type=int, nargs=2, default=(2, 6), metavar=("LO", "HI"))
    gen.add_argument("--heights", type=float, nargs=2, default=(10.0, 80.0), metavar=("LO", "HI"))
    gen.add_argument("--street-width", type=float, nargs=2, default=(15.0, 40.0), metavar=("LO", "HI"))
    gen.add_argument("--satellites", type=int, nargs=2, default=(6, 15), metavar=("LO", "HI"))
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    reg = sub.add_parser("regions", help="export shadow/reflection GeoJSON for one epoch")
    reg.add_argument("--scenario", required=True)
    reg.add_argument("--epoch", type=int, default=0)
    reg.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
    reg.add_argument("--grid", type=float, default=0.0, help="oracle verification grid spacing (m); 0 disables")
    reg.add_argument("--out", required=True)
    reg.set_defaults(func=cmd_regions)

    def common_est(p):
        p.add_argument("--scenario", required=True)
        p.add_argument("--classification", choices=("ideal", "realistic"), default="ideal")
        p.add_argument("--mode-selection", choices=("ideal", "spc"), default="ideal")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
        p.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="run an estimator over all epochs")
    est.add_argument("--estimator", choices=("zsm", "zsrm", "both"), default="both")
    common_est(est)
    est.set_defaults(func=cmd_estimate)

    ev = sub.add_parser("eval", help="run both estimators and compare")
    ev.add_argument("--estimator", choices=("both",), default="both", help=argparse.SUPPRESS)
    common_est(ev)
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as err:
        code = err.code if isinstance(err.code, int) else EXIT_CONFIG
        return code


if __name__ == "__main__":
    sys.exit(main())
