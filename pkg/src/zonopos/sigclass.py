"""Reception-condition ground truth and simulated noisy classifiers.

The oracle decides, by ray tracing against the city mesh, whether a
receiver position hears a satellite directly (LOS), via a single
bounce off a building plane (NLOS), both, or not at all.  It is the
independent reference the set pipeline is validated against and the
labeling source for synthetic scenarios.

Real-data classifier behavior is emulated by sampling from confusion
matrices: given the true class, a predicted class is drawn from the
matrix row.  Three matrices measured for RF, GBDT and SVM classifiers
ship as defaults, along with the unanimous-voting satellite selector.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .citymodel import CityModel, Plane
from .geom3d import plane_basis, segments_blocked
from .shadow import SatelliteState


class ReceptionCondition(enum.IntEnum):
    """Signal reception classes; integer values match the matrix axes."""

    NLOS_ONLY = 0
    LOS_ONLY = 1
    LOS_NLOS = 2

    @property
    def is_los(self) -> bool:
        """Binary collapse used by shadow-only matching."""
        return self in (ReceptionCondition.LOS_ONLY, ReceptionCondition.LOS_NLOS)


# --------------------------------------------------------------------
# ray-tracing oracle
# --------------------------------------------------------------------


def los_clear(receiver3d, satellite_position, triangles) -> bool:
    """True when the straight receiver-satellite segment is unobstructed."""
    pts = np.asarray(receiver3d, dtype=float).reshape(1, 3)
    if len(triangles) == 0:
        return True
    return not bool(segments_blocked(pts, satellite_position, triangles)[0])


def _plane_rings_2d(plane: Plane):
    u, v = plane_basis(plane.unit_normal)
    origin = plane.center
    tris = []
    for tri in plane.triangles:
        rel = tri.vrep - origin
        tris.append(np.column_stack([rel @ u, rel @ v]))
    return (u, v, origin), tris


def _point_in_triangles_2d(p2, tris2, tol=1e-9) -> bool:
    for t in tris2:
        a, b, c = t
        d = np.array([b - a, c - b, a - c])
        e = np.array([p2 - a, p2 - b, p2 - c])
        cross = d[:, 0] * e[:, 1] - d[:, 1] * e[:, 0]
        if (cross >= -tol).all() or (cross <= tol).all():
            return True
    return False


def mirror_point(point, plane: Plane) -> np.ndarray:
    p = np.asarray(point, dtype=float).reshape(3)
    n = plane.unit_normal
    return p - 2.0 * float(n @ (p - plane.center)) * n


def single_bounce_paths(receiver3d, satellite: SatelliteState, city: CityModel):
    """All valid single-bounce reflections reaching the receiver.

    For every outward-illuminated plane, the mirror construction gives
    the unique candidate reflection point; the path is valid when that
    point lies on the plane polygon and both legs are unobstructed.
    Yields (plane, reflection_point, mirrored_satellite) triples.
    """
    r = np.asarray(receiver3d, dtype=float).reshape(3)
    tris = city.all_building_triangles()
    s = satellite.position
    paths = []
    for b in city.buildings:
        for plane in b.planes:
            n = plane.unit_normal
            d_s = float(n @ (s - plane.center))
            if d_s <= 0.0:
                continue  # satellite behind the face
            d_r = float(n @ (r - plane.center))
            if d_r <= 1e-12:
                continue  # receiver behind or on the face
            mirrored = mirror_point(s, plane)
            d_m = float(n @ (mirrored - plane.center))  # = -d_s < 0
            t = d_r / (d_r - d_m)
            hit = r + t * (mirrored - r)
            (u, v, origin), tris2 = _plane_rings_2d(plane)
            rel = hit - origin
            if not _point_in_triangles_2d(np.array([rel @ u, rel @ v]), tris2, tol=1e-9):
                continue
            hit_arr = hit.reshape(1, 3)
            if segments_blocked(hit_arr, s, tris)[0]:
                continue  # incoming leg obstructed
            if segments_blocked(hit_arr, r, tris)[0]:
                continue  # reflected leg obstructed
            paths.append((plane, hit, mirrored))
    return paths


def oracle_classify(receiver2d, satellite: SatelliteState, city: CityModel, receiver_height: float = 0.0):
    """Ground-truth reception condition at a receiver position.

    Returns None when the satellite is unobservable there (direct path
    blocked and no single-bounce path exists); such satellites are
    dropped from an epoch because a real receiver tracks nothing.
    """
    r = np.array([receiver2d[0], receiver2d[1], receiver_height], dtype=float)
    tris = city.all_building_triangles()
    los = los_clear(r, satellite.position, tris)
    nlos = len(single_bounce_paths(r, satellite, city)) > 0
    if los and nlos:
        return ReceptionCondition.LOS_NLOS
    if los:
        return ReceptionCondition.LOS_ONLY
    if nlos:
        return ReceptionCondition.NLOS_ONLY
    return None


def shortest_bounce_delay(receiver2d, satellite: SatelliteState, city: CityModel, receiver_height: float = 0.0):
    """Extra path length of the shortest single-bounce path, meters.

    The reflected path length equals the mirrored-satellite distance,
    so the delay is min over valid planes of |s' - r| - |s - r|.
    Returns (0.0, False) when no bounce path exists.
    """
    r = np.array([receiver2d[0], receiver2d[1], receiver_height], dtype=float)
    paths = single_bounce_paths(r, satellite, city)
    if not paths:
        return 0.0, False
    direct = float(np.linalg.norm(satellite.position - r))
    best = min(float(np.linalg.norm(mirrored - r)) - direct for _, _, mirrored in paths)
    return max(best, 0.0), True


# --------------------------------------------------------------------
# confusion-matrix classifier simulation
# --------------------------------------------------------------------

# Measured three-class confusion counts (rows: actual NLOS-only,
# LOS-only, LOS+NLOS; columns: predicted same order).
RF_COUNTS = np.array([[241, 154, 74], [333, 2588, 453], [185, 559, 210]], dtype=float)
GBDT_COUNTS = np.array([[318, 110, 41], [323, 2569, 482], [341, 326, 287]], dtype=float)
SVM_COUNTS = np.array([[321, 58, 90], [518, 2070, 786], [261, 183, 510]], dtype=float)

DEFAULT_POSTERIOR_BLEND = 0.3  # weight of the matrix posterior in soft outputs


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 confusion matrix, rows = actual class, columns = predicted."""

    counts: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.counts, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("confusion matrix must be 3x3")
        if (m < 0).any():
            raise ValueError("confusion matrix entries must be nonnegative")
        if np.any(m.sum(axis=1) <= 0):
            raise ValueError("every actual class needs some mass")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "counts", m)

    @property
    def row_probs(self) -> np.ndarray:
        return self.counts / self.counts.sum(axis=1, keepdims=True)

    @property
    def class_priors(self) -> np.ndarray:
        totals = self.counts.sum(axis=1)
        return totals / totals.sum()

    def posterior(self, predicted: int) -> np.ndarray:
        """P(actual | predicted) from the matrix column."""
        col = self.counts[:, predicted]
        if col.sum() <= 0:
            return np.full(3, 1.0 / 3.0)
        return col / col.sum()

    @classmethod
    def from_json(cls, obj, name: str = "") -> "ConfusionMatrix":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(np.asarray(obj, dtype=float), name=name)


DEFAULT_MATRICES = (
    ConfusionMatrix(RF_COUNTS, "rf"),
    ConfusionMatrix(GBDT_COUNTS, "gbdt"),
    ConfusionMatrix(SVM_COUNTS, "svm"),
)


@dataclass(frozen=True)
class ClassifierOutput:
    predicted: ReceptionCondition
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(3)
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def p_los(self) -> float:
        """Probability mass on the LOS-bearing classes."""
        return float(self.probs[ReceptionCondition.LOS_ONLY] + self.probs[ReceptionCondition.LOS_NLOS])


def noisy_classify(
    truth: ReceptionCondition,
    cm: ConfusionMatrix,
    rng: np.random.Generator,
    posterior_blend: float = DEFAULT_POSTERIOR_BLEND,
) -> ClassifierOutput:
    """Sample a classifier decision from the truth row of the matrix.

    Soft outputs are a calibration stand-in: a blend of the one-hot
    decision and the matrix posterior for the predicted class, since
    the real classifiers' probability calibration is not recoverable.
    """
    row = cm.row_probs[int(truth)]
    predicted = int(rng.choice(3, p=row))
    onehot = np.zeros(3)
    onehot[predicted] = 1.0
    probs = (1.0 - posterior_blend) * onehot + posterior_blend * cm.posterior(predicted)
    probs = probs / probs.sum()
    return ClassifierOutput(ReceptionCondition(predicted), probs)


def unanimous_vote(outputs):
    """Common predicted class when all three classifiers agree, else None."""
    outputs = tuple(outputs)
    if len(outputs) != 3:
        raise ValueError("unanimous voting expects exactly 3 classifier outputs")
    first = outputs[0].predicted
    if all(o.predicted == first for o in outputs[1:]):
        return first
    return None


__all__ = [
    "ClassifierOutput",
    "ConfusionMatrix",
    "DEFAULT_MATRICES",
    "DEFAULT_POSTERIOR_BLEND",
    "GBDT_COUNTS",
    "RF_COUNTS",
    "ReceptionCondition",
    "SVM_COUNTS",
    "los_clear",
    "mirror_point",
    "noisy_classify",
    "oracle_classify",
    "shortest_bounce_delay",
    "single_bounce_paths",
    "unanimous_vote",
]
