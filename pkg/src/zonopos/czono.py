"""Constrained zonotopes with a synchronized vertex representation.

A constrained zonotope is the set ``{c + G·beta : beta in [-1,1]^m,
A·beta = b}``.  The family is closed under convex hull, Minkowski sum
and intersection, which is exactly what the shadow/reflection pipeline
needs; it is *not* closed under subtraction, so 2D subtraction happens
on polygons (see :mod:`zonopos.region2d`).

Every instance also carries ``vrep``, the exact vertex set of the same
polytope.  The algebraic form is kept for membership checks and
cross-validation; all geometry consumed downstream (sections, areas)
is computed from ``vrep``, which stays cheap because every set in the
pipeline is built from points, pairwise hulls and segment sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .geom3d import (
    TOL_FEAS,
    TOL_GEOM,
    affine_span,
    as_points,
    clip_points_halfspace,
    dedup_points,
    hull_vertices,
    hull_violation,
    lex_sort,
    polytope_halfspaces,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ConstrainedZonotope:
    """Immutable constrained zonotope with synchronized V-representation.

    Attributes:
        center: (n,) center vector, meters.
        generators: (n, m) generator matrix (direction * magnitude).
        constraint_matrix: (p, m) linear constraint coefficients.
        constraint_vector: (p,) linear constraint right-hand side.
        vrep: (k, n) vertex set of the same polytope, lex-sorted.
        degenerate: True when the set spans fewer than n dimensions.
    """

    center: np.ndarray
    generators: np.ndarray
    constraint_matrix: np.ndarray
    constraint_vector: np.ndarray
    vrep: np.ndarray
    degenerate: bool = field(default=False)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        n = c.shape[0]
        if n not in (2, 3):
            raise ValueError(f"only 2D/3D sets are supported, got n={n}")
        g = np.asarray(self.generators, dtype=float).reshape(n, -1)
        m = g.shape[1]
        a = np.asarray(self.constraint_matrix, dtype=float).reshape(-1, m) if m else np.zeros((0, 0))
        b = np.asarray(self.constraint_vector, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ValueError("constraint matrix/vector row mismatch")
        v = hull_vertices(as_points(self.vrep), TOL_GEOM)
        if v.shape[1] != n:
            raise ValueError("vrep dimension mismatch")
        if not (np.isfinite(c).all() and np.isfinite(g).all() and np.isfinite(v).all()):
            raise ValueError("non-finite coordinates")
        _, basis = affine_span(v)
        object.__setattr__(self, "center", _readonly(c))
        object.__setattr__(self, "generators", _readonly(g))
        object.__setattr__(self, "constraint_matrix", _readonly(a))
        object.__setattr__(self, "constraint_vector", _readonly(b))
        object.__setattr__(self, "vrep", _readonly(v))
        object.__setattr__(self, "degenerate", basis.shape[1] < n)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def n_generators(self) -> int:
        return self.generators.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.constraint_vector.shape[0]

    def vertices(self) -> np.ndarray:
        return self.vrep

    def contains(self, point, tol: float = TOL_FEAS) -> bool:
        """Membership by bounded linear feasibility on the algebraic form.

        Solves min_t { ||c + G·beta - p||_inf <= t : A·beta = b,
        beta in [-1,1]^m } and accepts when the optimum is <= tol.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape[0] != self.dim:
            raise ValueError("dimension mismatch")
        m = self.n_generators
        if m == 0:
            gap = float(np.max(np.abs(self.center - p)))
            feas = self.n_constraints == 0 or float(np.max(np.abs(self.constraint_vector))) <= tol
            return feas and gap <= tol
        n = self.dim
        # variables: beta (m), t (1)
        cost = np.zeros(m + 1)
        cost[-1] = 1.0
        a_ub = np.zeros((2 * n, m + 1))
        a_ub[:n, :m] = self.generators
        a_ub[n:, :m] = -self.generators
        a_ub[:, -1] = -1.0
        b_ub = np.concatenate([p - self.center, self.center - p])
        a_eq = b_eq = None
        if self.n_constraints:
            a_eq = np.zeros((self.n_constraints, m + 1))
            a_eq[:, :m] = self.constraint_matrix
            b_eq = self.constraint_vector
        bounds = [(-1.0, 1.0)] * m + [(0.0, None)]
        res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if not res.success:
            return False
        return float(res.fun) <= tol

    def __add__(self, other: "ConstrainedZonotope") -> "ConstrainedZonotope":
        return minkowski_sum(self, other)


@dataclass(frozen=True)
class CZCollection:
    """A bag of same-dimension constrained zonotopes."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        dims = {z.dim for z in members}
        if len(dims) > 1:
            raise ValueError(f"mixed dimensions in collection: {sorted(dims)}")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def vertices(self) -> np.ndarray:
        return collection_vertices(self)


def from_point(point) -> ConstrainedZonotope:
    """Degenerate constrained zonotope holding a single point."""
    p = np.asarray(point, dtype=float).reshape(-1)
    if not np.isfinite(p).all():
        raise ValueError("non-finite point")
    n = p.shape[0]
    return ConstrainedZonotope(p, np.zeros((n, 0)), np.zeros((0, 0)), np.zeros(0), p.reshape(1, -1))


def from_segment(a, b) -> ConstrainedZonotope:
    """Line segment from a to b as an unconstrained zonotope."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    center = 0.5 * (a + b)
    gen = (0.5 * (b - a)).reshape(-1, 1)
    return ConstrainedZonotope(center, gen, np.zeros((0, 1)), np.zeros(0), np.vstack([a, b]))


def sweep_zonotope(direction, length: float) -> ConstrainedZonotope:
    """One-sided sweep segment [0, length * direction].

    This is the zonotope form of a signal-direction extrusion: a
    building face Minkowski-summed with it extends *along* the signal
    direction only, which is what both the shadow and reflection
    constructions need (the swept face must not grow back toward the
    source, or occlusion tests upstream of the face come out wrong).
    """
    d = np.asarray(direction, dtype=float).reshape(-1)
    return from_segment(np.zeros_like(d), length * d)


def _check_dims(z1: ConstrainedZonotope, z2: ConstrainedZonotope):
    if z1.dim != z2.dim:
        raise ValueError(f"dimension mismatch: {z1.dim} vs {z2.dim}")


def convex_hull(z1: ConstrainedZonotope, z2: ConstrainedZonotope) -> ConstrainedZonotope:
    """Convex hull of two constrained zonotopes (closed-form, exact).

    The algebraic form interpolates the two operands with a shared
    lambda generator and per-generator slack variables that bound each
    operand's coefficients by (1 +/- lambda)/2; the vertex form is the
    hull of the union of the operand vertex sets.
    """
    _check_dims(z1, z2)
    n = z1.dim
    m1, m2 = z1.n_generators, z2.n_generators
    p1, p2 = z1.n_constraints, z2.n_constraints
    ms = 2 * (m1 + m2)
    m = m1 + m2 + 1 + ms
    c = 0.5 * (z1.center + z2.center)
    g = np.zeros((n, m))
    g[:, :m1] = z1.generators
    g[:, m1:m1 + m2] = z2.generators
    g[:, m1 + m2] = 0.5 * (z1.center - z2.center)
    p = p1 + p2 + ms
    a = np.zeros((p, m))
    b = np.zeros(p)
    if p1:
        a[:p1, :m1] = z1.constraint_matrix
        a[:p1, m1 + m2] = -0.5 * z1.constraint_vector
        b[:p1] = 0.5 * z1.constraint_vector
    if p2:
        a[p1:p1 + p2, m1:m1 + m2] = z2.constraint_matrix
        a[p1:p1 + p2, m1 + m2] = 0.5 * z2.constraint_vector
        b[p1:p1 + p2] = 0.5 * z2.constraint_vector
    # slack rows: |beta1_i| <= (1+lambda)/2 and |beta2_i| <= (1-lambda)/2
    row = p1 + p2
    slack = m1 + m2 + 1
    for i in range(m1):
        for sign in (1.0, -1.0):
            a[row, i] = sign
            a[row, m1 + m2] = -0.5
            a[row, slack] = 1.0
            b[row] = -0.5
            row += 1
            slack += 1
    for i in range(m2):
        for sign in (1.0, -1.0):
            a[row, m1 + i] = sign
            a[row, m1 + m2] = 0.5
            a[row, slack] = 1.0
            b[row] = -0.5
            row += 1
            slack += 1
    vrep = hull_vertices(np.vstack([z1.vrep, z2.vrep]))
    return ConstrainedZonotope(c, g, a, b, vrep)


def minkowski_sum(z1: ConstrainedZonotope, z2: ConstrainedZonotope) -> ConstrainedZonotope:
    """Minkowski sum; vertices are the hull of all pairwise vertex sums."""
    _check_dims(z1, z2)
    m1, m2 = z1.n_generators, z2.n_generators
    p1, p2 = z1.n_constraints, z2.n_constraints
    c = z1.center + z2.center
    g = np.hstack([z1.generators, z2.generators])
    a = np.zeros((p1 + p2, m1 + m2))
    if p1:
        a[:p1, :m1] = z1.constraint_matrix
    if p2:
        a[p1:, m1:] = z2.constraint_matrix
    b = np.concatenate([z1.constraint_vector, z2.constraint_vector])
    sums = (z1.vrep[:, None, :] + z2.vrep[None, :, :]).reshape(-1, z1.dim)
    return ConstrainedZonotope(c, g, a, b, hull_vertices(sums))


def intersect(z1: ConstrainedZonotope, z2: ConstrainedZonotope):
    """Intersection of two constrained zonotopes, or None when empty.

    The algebraic form ties the two coefficient vectors together with
    the generator-matching rows [G1  -G2]; the vertex form clips z1's
    polytope by every halfspace of z2's.
    """
    _check_dims(z1, z2)
    n = z1.dim
    m1, m2 = z1.n_generators, z2.n_generators
    p1, p2 = z1.n_constraints, z2.n_constraints
    c = z1.center.copy()
    g = np.hstack([z1.generators, np.zeros((n, m2))])
    a = np.zeros((p1 + p2 + n, m1 + m2))
    if p1:
        a[:p1, :m1] = z1.constraint_matrix
    if p2:
        a[p1:p1 + p2, m1:] = z2.constraint_matrix
    a[p1 + p2:, :m1] = z1.generators
    a[p1 + p2:, m1:] = -z2.generators
    b = np.concatenate([z1.constraint_vector, z2.constraint_vector, z2.center - z1.center])
    pts = z1.vrep
    rows_a, rows_b = polytope_halfspaces(z2.vrep)
    for av, bv in zip(rows_a, rows_b):
        pts = clip_points_halfspace(pts, av, bv)
        if len(pts) == 0:
            return None
        if len(pts) > 16:  # crossings accumulate; reduce before the next clip
            pts = hull_vertices(pts)
    vrep = hull_vertices(pts)
    if len(vrep) == 0:
        return None
    return ConstrainedZonotope(c, g, a, b, vrep)


def collection_vertices(collection: CZCollection, tol: float = TOL_GEOM) -> np.ndarray:
    """Deduplicated vertex set of a collection in lexicographic order."""
    members = collection.members if isinstance(collection, CZCollection) else tuple(collection)
    if len(members) == 0:
        raise ValueError("empty collection has no vertices")
    stacked = np.vstack([z.vrep for z in members])
    return dedup_points(stacked, tol)


def vrep_contains(z: ConstrainedZonotope, point, tol: float = TOL_GEOM) -> bool:
    """Membership decided purely from the vertex representation."""
    return hull_violation(z.vrep, point) <= tol


__all__ = [
    "ConstrainedZonotope",
    "CZCollection",
    "collection_vertices",
    "convex_hull",
    "from_point",
    "from_segment",
    "intersect",
    "lex_sort",
    "minkowski_sum",
    "sweep_zonotope",
    "vrep_contains",
]
