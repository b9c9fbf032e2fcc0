"""Mode selection for multi-modal position sets.

When refinement leaves several disjoint components ("modes"), one must
be picked as the final receiver set.  Two selectors are provided:

* the ideal selector, a benchmark that picks the mode containing the
  known true position;
* a pseudorange-consistency filter: sample points in every mode, map
  each satellite's pseudorange into range offsets at those points,
  build one kernel density per satellite over its offsets, and fuse
  them into a single consensus density (a product of the per-satellite
  densities, LOS probabilities acting as exponents).  The product form
  is what makes the filter discriminate: the true mode's offsets agree
  across satellites, so the fused density peaks there, while a wrong
  mode puts each satellite's mass in a different place and its peaks
  vanish in the product.  k offsets drawn from the fused density are
  assigned to the mode with the nearest sampled offset, and modes are
  scored by the resulting counts under a symmetric Dirichlet prior.

The source method is only sketched in the literature we follow, so
every constant sits in :class:`SPCConfig` and the ideal selector
remains the benchmark path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom3d import TOL_GEOM
from .shadow import SatelliteState


@dataclass(frozen=True)
class SPCConfig:
    """Tuning constants of the pseudorange-consistency mode filter."""

    sample_count: int = 5000       # offsets drawn from the fused mixture
    per_mode_samples: int = 200    # uniform position samples per mode
    kernel_bandwidth: float = 5.0  # meters, Gaussian kernel
    dirichlet_prior: float = 1.0   # symmetric prior over modes

    def __post_init__(self):
        if min(self.sample_count, self.per_mode_samples) <= 0:
            raise ValueError("sample counts must be positive")
        if self.kernel_bandwidth <= 0 or self.dirichlet_prior <= 0:
            raise ValueError("bandwidth and prior must be positive")


def ideal_select(modes, truth) -> int | None:
    """Index of the mode containing the true position (lowest on ties)."""
    for i, mode in enumerate(modes):
        if mode.contains_point(truth, tol=TOL_GEOM):
            return i
    return None


@dataclass(frozen=True)
class SPCObservation:
    """One satellite's contribution to the consistency filter."""

    satellite: SatelliteState
    pseudorange: float
    p_los: float

    def __post_init__(self):
        if not 0.0 <= self.p_los <= 1.0:
            raise ValueError("p_los must be in [0, 1]")


def _canonical_order(modes):
    """Deterministic mode ordering independent of the input permutation."""
    keyed = []
    for idx, mode in enumerate(modes):
        shell = mode.polygons[0][0] if mode.polygons else np.zeros((0, 2))
        keyed.append(((-mode.area, shell.ravel().tolist()), idx))
    keyed.sort(key=lambda kv: kv[0])
    return [idx for _, idx in keyed]


def spc_select(modes, observations, cfg: SPCConfig | None = None, rng: np.random.Generator | None = None) -> int:
    """Pick the mode most consistent with the observed pseudoranges.

    Ties and the all-weights-zero degenerate case fall back to the
    largest-area mode.  Deterministic given the random generator state;
    invariant (up to re-indexing) under permutations of ``modes``.
    """
    modes = list(modes)
    if not modes:
        raise ValueError("no modes to select from")
    if len(modes) == 1:
        return 0
    if not observations:
        raise ValueError("at least one observation is required")
    cfg = cfg or SPCConfig()
    rng = rng or np.random.default_rng(0)

    order = _canonical_order(modes)
    areas = np.array([modes[i].area for i in order])
    largest_canonical = int(np.argmax(areas))

    weights = np.array([max(float(o.p_los), 0.0) for o in observations])
    if weights.sum() <= 0.0:
        return order[largest_canonical]

    # per-mode position samples in canonical order (owned by this rng)
    samples = [modes[i].sample_points(rng, cfg.per_mode_samples) for i in order]

    # offsets[j][k]: pseudorange minus geometric range at mode k's samples
    offsets = []
    for obs in observations:
        s = obs.satellite.position
        per_mode = []
        for pts in samples:
            d = np.sqrt((pts[:, 0] - s[0]) ** 2 + (pts[:, 1] - s[1]) ** 2 + s[2] ** 2)
            per_mode.append(obs.pseudorange - d)
        offsets.append(per_mode)

    # consensus density on an offset grid: sum of LOS-weighted per
    # satellite log kernel densities (= weighted product of densities)
    h = cfg.kernel_bandwidth
    all_offsets = np.concatenate([np.concatenate(per_mode) for per_mode in offsets])
    lo = float(all_offsets.min()) - 4.0 * h
    hi = float(all_offsets.max()) + 4.0 * h
    grid = np.linspace(lo, hi, max(512, min(8192, int((hi - lo) / (h / 4.0)) + 1)))
    log_density = np.zeros_like(grid)
    for w, per_mode in zip(weights, offsets):
        if w <= 0.0:
            continue
        centers = np.concatenate(per_mode)
        dens = np.exp(-0.5 * ((grid[:, None] - centers[None, :]) / h) ** 2).sum(axis=1)
        log_density += w * np.log(np.maximum(dens, 1e-300))
    log_density -= log_density.max()
    p = np.exp(log_density)
    p /= p.sum()

    draws = rng.choice(grid, size=cfg.sample_count, p=p)

    # nearest sampled offset (over all satellites) decides the mode
    n_modes = len(order)
    counts = np.zeros(n_modes)
    per_mode_pool = [
        np.sort(np.concatenate([offsets[j][k] for j in range(len(observations))]))
        for k in range(n_modes)
    ]
    dists = np.empty((n_modes, cfg.sample_count))
    for k, pool in enumerate(per_mode_pool):
        pos_idx = np.clip(np.searchsorted(pool, draws), 1, len(pool) - 1)
        dists[k] = np.minimum(np.abs(draws - pool[pos_idx - 1]), np.abs(draws - pool[pos_idx]))
    nearest = np.argmin(dists, axis=0)
    for k in range(n_modes):
        counts[k] = float(np.sum(nearest == k))

    scores = counts + cfg.dirichlet_prior
    best = np.flatnonzero(scores == scores.max())
    if len(best) > 1:  # tie: prefer the larger area
        best = best[np.argsort(-areas[best], kind="stable")]
    return order[int(best[0])]


__all__ = ["SPCConfig", "SPCObservation", "ideal_select", "spc_select"]
