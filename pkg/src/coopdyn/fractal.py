"""Julia-set sampling, basin classification grids, kernel-Julia and hyperbolicity probes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clouds import PointCloud
from .geometry import INF, SpherePoint, critical_points, eval_map, poly_roots, sphere, \
    spherical_derivative_norm
from .grids import GridGeometry
from .rng import as_rng
from .semigroup import DiscreteMeasure, step_array

LABEL_UNDECIDED = -2
LABEL_ESCAPING = -1


class FractalError(ValueError):
    pass


def map_fixed_points(h) -> list[SpherePoint]:
    """Finite fixed points of h (solutions of num(z) = z * den(z))."""
    import numpy.polynomial.polynomial as npoly
    lhs = npoly.polysub(h.num, npoly.polymul([0, 1], h.den))
    return [SpherePoint(z) for z in poly_roots(lhs)]


def repelling_fixed_point(system: GeneratorSystem) -> SpherePoint | None:
    """A repelling fixed point of some generator, if one exists."""
    for h in system.generators:
        for p in map_fixed_points(h):
            if spherical_derivative_norm(h, p) > 1.0 + 1e-9:
                return p
    return None


def random_preimage(h, p: SpherePoint, rng) -> SpherePoint:
    """A uniformly chosen preimage branch of p under h (with multiplicity)."""
    from .geometry import preimages
    pre = preimages(h, p)
    return pre[int(rng.integers(len(pre)))]


def backward_chaos_game(measure: DiscreteMeasure, n_points: int, burn_in: int,
                        rng, provenance: str, seed_point=None) -> PointCloud:
    """Backward i.i.d. chaos game: generator j w.p. p_j, then a uniform inverse branch."""
    rng = as_rng(rng)
    if seed_point is None:
        seed_point = repelling_fixed_point(measure.system)
        if seed_point is None:
            raise FractalError(
                "no repelling fixed point found among generators; supply seed_point")
    p = sphere(seed_point)
    m = measure.system.m
    weights = np.asarray(measure.weights)
    pts = np.empty(n_points, dtype=complex)
    mask = np.zeros(n_points, dtype=bool)
    total = n_points + burn_in
    letters = rng.choice(m, size=total, p=weights)
    for k in range(total):
        h = measure.system.generators[letters[k]]
        p = random_preimage(h, p, rng)
        if k >= burn_in:
            i = k - burn_in
            mask[i] = p.is_inf
            pts[i] = np.inf + 0j if p.is_inf else p.z
    return PointCloud(pts, provenance=provenance, inf_mask=mask)


def julia_backward_cloud(measure: DiscreteMeasure, n_points: int, burn_in: int = 100,
                         rng=0, seed_point=None) -> PointCloud:
    """Point-cloud approximation of J(G) by backward iteration."""
    return backward_chaos_game(measure, n_points, burn_in, rng, "julia", seed_point)


@dataclass
class BasinLabelGrid:
    """Per-cell labels: escaping (-1), basin_k (k >= 0), or undecided (-2)."""

    grid: GridGeometry
    labels: np.ndarray  # (n, n) int16
    depth: int
    n_words: int
    representatives: dict = field(default_factory=dict)  # basin k -> flat cell index

    def label_at(self, z) -> np.ndarray:
        iy, ix = self.grid.cell_index(np.asarray(z, dtype=complex))
        return self.labels[iy, ix]

    def fractions(self) -> dict:
        n2 = self.labels.size
        out = {"escaping": float((self.labels == LABEL_ESCAPING).sum()) / n2,
               "undecided": float((self.labels == LABEL_UNDECIDED).sum()) / n2}
        for k in self.representatives:
            out[f"basin_{k}"] = float((self.labels == k).sum()) / n2
        return out


def _target_arrays(measure: DiscreteMeasure, minimal_sets):
    """Split targets into (finite clouds with indices, has_infinity)."""
    finite = []
    has_inf = False
    for k, t in enumerate(minimal_sets):
        if (isinstance(t, str) and t == "infinity") or t is None:
            has_inf = True
            continue
        cloud = t.cloud if hasattr(t, "cloud") else t
        if isinstance(cloud, str) and cloud == "infinity":
            has_inf = True
            continue
        finite.append((k, cloud if isinstance(cloud, PointCloud) else PointCloud(np.atleast_1d(cloud))))
    if measure.system.all_polynomial:
        has_inf = True
    return finite, has_inf


def classify_points(measure: DiscreteMeasure, pts: np.ndarray, minimal_sets,
                    depth: int, n_words: int, rng, capture_dist: float) -> np.ndarray:
    """Label each point by unanimous capture across n_words sampled orbits.

    Returns int16 labels: basin index k, LABEL_ESCAPING, or LABEL_UNDECIDED.
    For polynomial systems escape (|z| >= escape radius) is always a target.
    """
    rng = as_rng(rng)
    finite_targets, has_inf = _target_arrays(measure, minimal_sets)
    if not finite_targets and not has_inf:
        raise FractalError("need at least one minimal set or a polynomial system")
    radius = measure.system.escape_radius
    m = measure.system.m
    weights = np.asarray(measure.weights)
    n = pts.size
    NONE = -3
    agreed = None
    for _ in range(n_words):
        z = pts.astype(complex).copy()
        lab = np.full(n, NONE, dtype=np.int16)
        for _step in range(depth):
            open_ = lab == NONE
            if not np.any(open_):
                break
            letters = rng.choice(m, size=n, p=weights)
            z = step_array(measure.system, z, letters, active=open_)
            if has_inf and radius is not None:
                nonfin = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
                esc = nonfin | (np.abs(np.where(nonfin, 0, z)) >= radius)
                lab[open_ & esc] = LABEL_ESCAPING
                open_ = lab == NONE
            for k, cloud in finite_targets:
                if not np.any(open_):
                    break
                hit = cloud.distance_to(z) <= capture_dist
                lab[open_ & hit] = k
                open_ = lab == NONE
        if agreed is None:
            agreed = lab
        else:
            agreed = np.where(agreed == lab, agreed, np.int16(LABEL_UNDECIDED))
    agreed = np.where(agreed == NONE, np.int16(LABEL_UNDECIDED), agreed)
    return agreed


def classify_plane_grid(measure: DiscreteMeasure, minimal_sets, grid: GridGeometry,
                        depth: int = 200, n_words: int = 8, rng=0,
                        capture_dist: float | None = None) -> BasinLabelGrid:
    """Classify every grid cell into a basin, escaping, or undecided."""
    if capture_dist is None:
        capture_dist = grid.capture_tol
    pts = grid.points().ravel()
    labels = classify_points(measure, pts, minimal_sets, depth, n_words, rng, capture_dist)
    labels = labels.reshape(grid.n, grid.n)
    reps = {}
    for k, t in enumerate(minimal_sets):
        cloud = getattr(t, "cloud", t)
        if isinstance(cloud, str) or not isinstance(cloud, PointCloud):
            continue
        mask = labels == k
        if not np.any(mask):
            continue
        # classified cell nearest to the set's first finite point
        ref = cloud.finite_points()
        ref = ref[0] if ref.size else 0j
        cells = np.nonzero(mask.ravel())[0]
        cell_pts = grid.points().ravel()[cells]
        reps[k] = int(cells[np.argmin(np.abs(cell_pts - ref))])
    return BasinLabelGrid(grid, labels, depth, n_words, reps)


@dataclass
class KernelProbeReport:
    fraction_escorted: float
    max_depth_needed: int
    n_probed: int
    verdict: str  # "consistent with empty kernel Julia set" or "kernel Julia set may be nonempty"


def kernel_julia_probe(measure: DiscreteMeasure, julia_cloud: PointCloud,
                       basins: BasinLabelGrid, word_depth: int = 20,
                       n_probe: int = 100, branch_cap: int = 64, rng=0) -> KernelProbeReport:
    """Probe J_ker(G) = intersection of g^{-1}(J(G)) for emptiness.

    For sampled Julia points z, search (breadth-limited) words g with g(z)
    landing in a classified basin cell, i.e. in the Fatou-set estimate.
    """
    if len(julia_cloud) == 0:
        raise FractalError("empty Julia cloud")
    rng = as_rng(rng)
    idx = rng.choice(len(julia_cloud), size=min(n_probe, len(julia_cloud)), replace=False)
    radius = measure.system.escape_radius

    def in_fatou_estimate(z: np.ndarray) -> np.ndarray:
        nonfin = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
        ok = np.zeros(z.shape, dtype=bool)
        if measure.system.all_polynomial and radius is not None:
            ok |= nonfin | (np.abs(np.where(nonfin, 0, z)) >= radius)
        ingrid = basins.grid.contains(z)
        if np.any(ingrid):
            # a point counts as Fatou only if the whole 3x3 cell neighborhood
            # agrees on one basin label; Julia points always sit within one
            # cell of a label boundary, so they never qualify
            n = basins.grid.n
            iy, ix = basins.grid.cell_index(z[ingrid])
            lab = basins.labels[iy, ix]
            sub = lab != LABEL_UNDECIDED
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    jy = np.clip(iy + dy, 0, n - 1)
                    jx = np.clip(ix + dx, 0, n - 1)
                    sub &= basins.labels[jy, jx] == lab
            tmp = ok[ingrid]
            tmp |= sub
            ok[ingrid] = tmp
        return ok

    escorted = 0
    max_depth = 0
    for i in idx:
        z0 = np.inf + 0j if julia_cloud.inf_mask[i] else julia_cloud.points[i]
        frontier = np.array([z0], dtype=complex)
        for depth in range(1, word_depth + 1):
            imgs = []
            for h in measure.system.generators:
                fin = np.isfinite(frontier.real) & np.isfinite(frontier.imag)
                out = np.full(frontier.shape, np.inf + 0j, dtype=complex)
                if np.any(fin):
                    out[fin] = h.eval_array(frontier[fin])
                if np.any(~fin):
                    img = eval_map(h, INF)
                    out[~fin] = np.inf + 0j if img.is_inf else img.z
                imgs.append(out)
            frontier = np.concatenate(imgs)
            if frontier.size > branch_cap:
                frontier = frontier[rng.choice(frontier.size, size=branch_cap, replace=False)]
            if np.any(in_fatou_estimate(frontier)):
                escorted += 1
                max_depth = max(max_depth, depth)
                break
    frac = escorted / len(idx)
    verdict = ("consistent with empty kernel Julia set" if frac == 1.0
               else "kernel Julia set may be nonempty")
    return KernelProbeReport(frac, max_depth, len(idx), verdict)


@dataclass
class HyperbolicityReport:
    min_distance: float
    cloud_resolution: float
    verdict: str  # "hyperbolic-consistent" | "not-hyperbolic-consistent"


def hyperbolicity_probe(measure: DiscreteMeasure, julia_cloud: PointCloud,
                        orbit_depth: int = 50, n_words: int = 20, rng=0) -> HyperbolicityReport:
    """Sample the postcritical set and measure its chordal gap to the Julia cloud."""
    rng = as_rng(rng)
    crit_values = []
    for h in measure.system.generators:
        for c in critical_points(h):
            v = eval_map(h, c)
            crit_values.append(np.inf + 0j if v.is_inf else v.z)
    start = np.array(crit_values, dtype=complex)
    samples = [start]
    m = measure.system.m
    weights = np.asarray(measure.weights)
    for _ in range(n_words):
        z = start.copy()
        for _step in range(orbit_depth):
            letters = rng.choice(m, size=z.size, p=weights)
            z = step_array(measure.system, z, letters)
            samples.append(z.copy())
    allpts = np.concatenate(samples)
    d = julia_cloud.distance_to(allpts)
    min_d = float(np.min(d))
    res = julia_cloud.nn_distance()
    verdict = "hyperbolic-consistent" if min_d > 2.0 * res else "not-hyperbolic-consistent"
    return HyperbolicityReport(min_d, res, verdict)
