"""Set-based urban GNSS positioning.

Buildings and the ground are modeled as constrained zonotopes; per
satellite the package computes GNSS shadows (ground areas with the
direct signal blocked) and GNSS reflections (areas hearing both the
direct signal and a single bounce), then refines a set-based receiver
position from classified reception conditions.  Two estimators are
provided: shadow-only matching ("zsm") and shadow-and-reflection
matching ("zsrm"), plus ray-tracing oracles, classifier simulation,
mode selection and a scenario/evaluation harness.
"""

from .czono import (
    CZCollection,
    ConstrainedZonotope,
    collection_vertices,
    convex_hull,
    from_point,
    from_segment,
    intersect,
    minkowski_sum,
    sweep_zonotope,
)
from .citymodel import (
    AOI,
    Building,
    CityModel,
    CityModelError,
    Plane,
    build_city_model,
    group_planes,
    load_city_model,
    make_aoi,
    triangle_to_cz,
)
from .region2d import Region2D, StreetFrame, difference, intersection, modes, union, union_all
from .shadow import DEFAULT_EPS, SatelliteState, ShadowProduct, compute_shadow_product, gnss_shadow, shadow_direction, shadow_volume
from .reflection import (
    ReflectionPlaneSet,
    ReflectionProduct,
    compute_reflection_product,
    compute_reflection_region,
    find_reflection_planes,
    gnss_reflection,
    mirror_satellite,
)
from .positioning import PositionSet, compute_epoch_geometry, refine_step, zsm_estimate, zsrm_estimate
from .sigclass import (
    ClassifierOutput,
    ConfusionMatrix,
    DEFAULT_MATRICES,
    ReceptionCondition,
    noisy_classify,
    oracle_classify,
    unanimous_vote,
)
from .modeselect import SPCConfig, SPCObservation, ideal_select, spc_select
from .simeval import (
    EpochMetrics,
    RmsReport,
    SatelliteObservation,
    Scenario,
    ScenarioParams,
    aggregate,
    generate_scenario,
    load_scenario,
    nlos_delay,
    run_epoch,
    save_scenario,
)

__version__ = "0.1.0"
