"""Minimal sets of a rational semigroup: discovery, classification, period
structure, mean-stability testing, and bifurcation scans over families.

A minimal set L is a nonempty compact forward-invariant set such that the
semigroup orbit closure of every point of L is all of L.  Discovery works
from fixed points of short words: attracting fixed points seed attracting
minimal sets, and exactly invariant non-attracting fixed-point orbits seed
J-touching or sub-rotative ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .clouds import PointCloud, sphere_embed
from .geometry import GeometryError, INF, RationalMap, compose, eval_map, sphere, \
    spherical_derivative_norm
from .fractal import map_fixed_points
from .grids import GridGeometry
from .rng import as_rng
from .semigroup import DiscreteMeasure, step_array


class MinimalError(ValueError):
    pass


@dataclass
class MinimalSetEstimate:
    """A numerically discovered minimal set.

    cloud is a PointCloud or the symbolic tag "infinity".  classification is
    one of "attracting", "j_touching", "sub_rotative", "unresolved".
    """

    cloud: object
    classification: str = "unresolved"
    period: int = 1
    cycle_components: list = field(default_factory=list)

    @property
    def is_infinity(self) -> bool:
        return isinstance(self.cloud, str) and self.cloud == "infinity"


@dataclass
class MeanStabilityWitness:
    """Grid certificate for mean stability: all n-words map U into V, and
    every cell reaches U within coverage_depth steps.

    For polynomial systems the escape region |z| >= escape_radius is an
    implicit part of both U and V (it cannot be represented as grid cells).
    """

    grid: GridGeometry
    U: np.ndarray  # (n, n) bool
    V: np.ndarray  # (n, n) bool
    n: int
    coverage_depth: int
    includes_escape_region: bool = False


@dataclass
class MeanStabilityReport:
    verdict: str  # "true" | "false" | "inconclusive"
    minimal_sets: list
    witness: MeanStabilityWitness | None = None
    counterexample: MinimalSetEstimate | None = None
    failing_fraction: float = 0.0
    note: str = ""


# -- word utilities -----------------------------------------------------------

def word_compose(system, letters) -> RationalMap:
    """The map of the word: generators applied in order letters[0], letters[1], ..."""
    w = system.generators[letters[0]]
    for j in letters[1:]:
        w = compose(system.generators[j], w)
    return w


def _words_of_length(system, length: int, cap: int, rng):
    m = system.m
    if m ** length <= cap:
        return list(itertools.product(range(m), repeat=length))
    return [tuple(int(x) for x in rng.integers(0, m, size=length)) for _ in range(cap)]


# -- cloud plumbing -----------------------------------------------------------

def _apply_generator(h, pts: np.ndarray) -> np.ndarray:
    fin = np.isfinite(pts.real) & np.isfinite(pts.imag)
    out = np.empty(pts.shape, dtype=complex)
    if np.any(fin):
        out[fin] = h.eval_array(pts[fin])
    if np.any(~fin):
        img = eval_map(h, INF)
        out[~fin] = np.inf + 0j if img.is_inf else img.z
    return out


def hausdorff_chordal(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two complex point sets in the chordal metric."""
    ea, eb = sphere_embed(a), sphere_embed(b)
    ta, tb = cKDTree(ea), cKDTree(eb)
    return max(float(np.max(tb.query(ea)[0])), float(np.max(ta.query(eb)[0])))


@dataclass
class _Closure:
    points: np.ndarray  # complex, inf encoded as inf+0j
    stabilized: bool
    escaped: bool


def forward_closure(measure: DiscreteMeasure, start, dedupe_tol: float,
                    max_points: int = 4096, max_rounds: int = 200) -> _Closure:
    """Close a point set under forward images by all generators.

    New points are added only when farther than dedupe_tol (chordal) from the
    set so far.  escaped=True means some image left the escape radius of a
    polynomial system (the closure leaks toward infinity).
    """
    pts = np.atleast_1d(np.asarray(start, dtype=complex))
    radius = measure.system.escape_radius
    emb = sphere_embed(pts)
    frontier = pts
    escaped = False
    if radius is not None and np.any(~np.isfinite(pts.real) | (np.abs(np.where(
            np.isfinite(pts.real), pts, 0)) >= radius)):
        return _Closure(pts, True, True)
    for _ in range(max_rounds):
        new = []
        for h in measure.system.generators:
            imgs = _apply_generator(h, frontier)
            if radius is not None:
                nonfin = ~np.isfinite(imgs.real) | ~np.isfinite(imgs.imag)
                if np.any(nonfin | (np.abs(np.where(nonfin, 0, imgs)) >= radius)):
                    escaped = True
                    imgs = imgs[~(nonfin | (np.abs(np.where(nonfin, 0, imgs)) >= radius))]
            new.append(imgs)
        cand = np.concatenate(new)
        if cand.size == 0:
            return _Closure(pts, True, escaped)
        tree = cKDTree(emb)
        d, _ = tree.query(sphere_embed(cand))
        fresh = cand[d > dedupe_tol]
        if fresh.size == 0:
            return _Closure(pts, True, escaped)
        # dedupe the fresh batch against itself
        keep = []
        efresh = sphere_embed(fresh)
        ftree = cKDTree(efresh)
        seen = np.zeros(fresh.size, dtype=bool)
        for i in range(fresh.size):
            if seen[i]:
                continue
            keep.append(i)
            seen[ftree.query_ball_point(efresh[i], dedupe_tol)] = True
        fresh = fresh[keep]
        pts = np.concatenate([pts, fresh])
        emb = np.concatenate([emb, sphere_embed(fresh)])
        frontier = fresh
        if pts.size > max_points:
            return _Closure(pts, False, escaped)
    return _Closure(pts, False, escaped)


def _random_tail(measure: DiscreteMeasure, z0: complex, n_steps: int, rng) -> complex:
    z = np.array([z0], dtype=complex)
    m = measure.system.m
    w = np.asarray(measure.weights)
    for _ in range(n_steps):
        z = step_array(measure.system, z, rng.choice(m, size=1, p=w))
    return complex(z[0])


def _is_minimal_cloud(measure: DiscreteMeasure, pts: np.ndarray, dedupe_tol: float) -> bool:
    """Check the orbit closure of sample points recovers the whole cloud."""
    if pts.size == 1:
        return True
    order = np.argsort(np.abs(pts))
    samples = {0, pts.size // 2, pts.size - 1}
    for i in samples:
        c = forward_closure(measure, pts[order[i]], dedupe_tol)
        if not c.stabilized or c.escaped:
            return False
        if hausdorff_chordal(c.points, pts) > 3.0 * dedupe_tol:
            return False
    return True


def _cloud_invariant(measure: DiscreteMeasure, pts: np.ndarray, tol: float) -> bool:
    """Forward-invariance check: h(z) within tol of the cloud for all samples."""
    tree = cKDTree(sphere_embed(pts))
    for h in measure.system.generators:
        imgs = _apply_generator(h, pts)
        d, _ = tree.query(sphere_embed(imgs))
        if np.max(d) > tol:
            return False
    return True


# -- discovery ----------------------------------------------------------------

def _fixed_point_seeds(measure: DiscreteMeasure, search_depth: int, rng, word_cap: int = 64):
    """(point, multiplier norm) for fixed points of words up to search_depth."""
    seeds = []
    for length in range(1, search_depth + 1):
        for letters in _words_of_length(measure.system, length, word_cap, rng):
            try:
                w = word_compose(measure.system, letters)
            except GeometryError:
                continue
            for p in map_fixed_points(w):
                seeds.append((p, spherical_derivative_norm(w, p)))
    return seeds


def _candidate_sets(measure: DiscreteMeasure, search_depth: int, tol: float, rng,
                    include_nonattracting: bool, tail_steps: int = 300) -> list:
    rng = as_rng(rng)
    dedupe_tol = tol / 4.0
    clouds: list[np.ndarray] = []

    def try_add(pts: np.ndarray):
        for i, known in enumerate(clouds):
            tree = cKDTree(sphere_embed(known))
            d, _ = tree.query(sphere_embed(pts))
            if float(np.min(d)) <= 2.0 * tol:
                # same set at resolution: merge in the genuinely new samples
                clouds[i] = np.concatenate([known, pts[d > dedupe_tol]])
                return
        clouds.append(pts)

    for p, mult in _fixed_point_seeds(measure, search_depth, rng):
        attracting = mult < 1.0 - 1e-9
        if not attracting and not include_nonattracting:
            continue
        z0 = np.inf + 0j if p.is_inf else p.z
        c = forward_closure(measure, z0, dedupe_tol)
        if c.stabilized and not c.escaped and _is_minimal_cloud(measure, c.points, dedupe_tol):
            try_add(c.points)
            continue
        if attracting and not (c.escaped and not c.stabilized):
            # transient seed: restart from the tail of a random orbit
            zt = _random_tail(measure, z0, tail_steps, rng)
            if np.isfinite(zt.real) and np.isfinite(zt.imag):
                c2 = forward_closure(measure, zt, dedupe_tol)
                if c2.stabilized and not c2.escaped and \
                        _is_minimal_cloud(measure, c2.points, dedupe_tol):
                    try_add(c2.points)

    out = []
    for pts in clouds:
        est = MinimalSetEstimate(PointCloud(pts, provenance="minimal"))
        try:
            est.period, est.cycle_components = period_structure(measure, est, tol=tol)
        except MinimalError:
            est.period, est.cycle_components = 1, [est.cloud]
            est.classification = "unresolved"
        out.append(est)
    if measure.system.all_polynomial:
        out.append(MinimalSetEstimate("infinity", classification="attracting",
                                      period=1, cycle_components=["infinity"]))
    return out


def find_attracting_minimal_sets(measure: DiscreteMeasure, search_depth: int = 3,
                                 grid: GridGeometry | None = None, rng=0) -> list:
    """Minimal sets seeded by attracting fixed points of words.

    Each finite set is the semigroup orbit closure of an attracting word
    fixed point (or of the tail of a random orbit started there, when the
    fixed point itself is transient).  For all-polynomial systems the tag
    "infinity" is appended.
    """
    tol = (grid or GridGeometry()).capture_tol
    return _candidate_sets(measure, search_depth, tol, rng, include_nonattracting=False)


# -- period structure ---------------------------------------------------------

def period_structure(measure: DiscreteMeasure, L: MinimalSetEstimate, r_max: int = 8,
                     tol: float = 0.05):
    """Cycle decomposition of a minimal set: components permuted by the generators.

    Returns (period r, components ordered so every generator maps component j
    into component (j+1) mod r).
    """
    if L.is_infinity:
        return 1, ["infinity"]
    pts = L.cloud.points
    emb = sphere_embed(pts)
    tree = cKDTree(emb)
    pairs = tree.query_pairs(r=tol, output_type="ndarray")
    n = pts.size
    if pairs.size:
        adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    else:
        adj = coo_matrix((n, n))
    k, comp = connected_components(adj, directed=False)
    if k > r_max:
        raise MinimalError(f"{k} components exceed r_max={r_max}")
    if k == 1:
        return 1, [PointCloud(pts)]
    # permutation induced by generator images
    sigma = np.full(k, -1, dtype=int)
    for h in measure.system.generators:
        imgs = _apply_generator(h, pts)
        d, idx = tree.query(sphere_embed(imgs))
        if np.max(d) > tol:
            raise MinimalError("cloud not closed under generators at tolerance")
        tgt = comp[idx]
        for j in range(k):
            vals = np.unique(tgt[comp == j])
            if len(vals) != 1 or (sigma[j] not in (-1, vals[0])):
                raise MinimalError("generator images do not induce a component map")
            sigma[j] = vals[0]
    # cycle lengths must be uniform; the period is that common length
    seen = np.zeros(k, dtype=bool)
    cycles = []
    for j in range(k):
        if seen[j]:
            continue
        cyc = [j]
        seen[j] = True
        t = sigma[j]
        while not seen[t]:
            cyc.append(t)
            seen[t] = True
            t = sigma[t]
        if t != cyc[0]:
            raise MinimalError("component map is not a permutation of cycles")
        cycles.append(cyc)
    lengths = {len(c) for c in cycles}
    if len(lengths) != 1:
        raise MinimalError(f"mixed cycle lengths {sorted(lengths)}")
    r = lengths.pop()
    comps = []
    for i in range(r):
        members = [c[i] for c in cycles]
        sel = np.isin(comp, members)
        comps.append(PointCloud(pts[sel]))
    return r, comps


# -- classification -----------------------------------------------------------

def _ring_points(pts: np.ndarray, r_chordal: float, n_dirs: int = 8) -> np.ndarray:
    fin = np.isfinite(pts.real) & np.isfinite(pts.imag)
    base = pts[fin]
    if base.size > 40:
        base = base[:: base.size // 40 + 1]
    delta = r_chordal * (1.0 + np.abs(base) ** 2) / 2.0
    th = np.exp(2j * np.pi * np.arange(n_dirs) / n_dirs)
    return (base[:, None] + delta[:, None] * th[None, :]).ravel()


def contraction_witness_n(measure: DiscreteMeasure, cloud: PointCloud,
                          r_outer: float, r_inner: float, n_max: int, rng,
                          word_cap: int = 256) -> int | None:
    """Smallest n such that every (sampled) n-word maps the r_outer
    neighborhood of the cloud into its r_inner neighborhood; None if no
    n <= n_max works."""
    rng = as_rng(rng)
    pts = cloud.points
    test = np.concatenate([pts, _ring_points(pts, r_outer)])
    for n in range(1, n_max + 1):
        ok = True
        for letters in _words_of_length(measure.system, n, word_cap, rng):
            z = test.copy()
            for j in letters:
                z = _apply_generator(measure.system.generators[j], z)
            if float(np.max(cloud.distance_to(z))) > r_inner:
                ok = False
                break
        if ok:
            return n
    return None


def _looks_rotational(measure: DiscreteMeasure, p, w: RationalMap, n_iter: int = 400) -> bool:
    """Orbit of a point near the neutral fixed point p stays on a loop and
    its angles equidistribute."""
    if p.is_inf:
        return False
    z0 = p.z + 0.02 * (1.0 + abs(p.z) ** 2) / 2.0
    z = z0
    rad = np.empty(n_iter)
    ang = np.empty(n_iter)
    for i in range(n_iter):
        q = eval_map(w, z)
        if q.is_inf:
            return False
        z = q.z
        d = z - p.z
        rad[i] = abs(d)
        ang[i] = np.angle(d)
    mu = rad.mean()
    if mu == 0 or rad.std() / mu > 0.2:
        return False
    s = np.sort(ang)
    gaps = np.diff(np.concatenate([s, [s[0] + 2 * np.pi]]))
    return float(np.max(gaps)) < 1.0


def classify_minimal_set(measure: DiscreteMeasure, L: MinimalSetEstimate,
                         julia_cloud: PointCloud, rng=0, tol: float = 0.05,
                         r_inner: float | None = None, r_outer: float | None = None,
                         n_max: int = 8) -> str:
    """Trichotomy: "j_touching" if the cloud meets the Julia cloud at
    tolerance; "attracting" on a two-ring contraction witness; "sub_rotative"
    on a neutral word fixed point with rotational orbit; else "unresolved"."""
    rng = as_rng(rng)
    if L.is_infinity:
        return "attracting"
    r_inner = tol if r_inner is None else r_inner
    pts = L.cloud.points
    if float(np.min(julia_cloud.distance_to(pts))) <= tol:
        return "j_touching"
    # the outer ring must stay inside the attracting neighborhood, whose size
    # we do not know a priori; try a ladder of shrinking outer radii
    outers = (r_outer,) if r_outer is not None else \
        (3.0 * r_inner, 2.0 * r_inner, 1.5 * r_inner)
    for ro in outers:
        if contraction_witness_n(measure, L.cloud, ro, r_inner, n_max, rng) is not None:
            return "attracting"
    # sub-rotative probe: neutral word fixed points on the set
    for length in range(1, 4):
        for letters in _words_of_length(measure.system, length, 64, rng):
            try:
                w = word_compose(measure.system, letters)
            except GeometryError:
                continue
            for p in map_fixed_points(w):
                zp = np.array([np.inf + 0j if p.is_inf else p.z])
                if float(L.cloud.distance_to(zp)[0]) > tol:
                    continue
                if abs(spherical_derivative_norm(w, p) - 1.0) <= 1e-3 and \
                        _looks_rotational(measure, p, w):
                    return "sub_rotative"
    return "unresolved"


# -- mean stability -----------------------------------------------------------

def _in_U(measure, pts, attract_emb_tree, r_u, radius):
    nonfin = ~np.isfinite(pts.real) | ~np.isfinite(pts.imag)
    ok = np.zeros(pts.shape, dtype=bool)
    if radius is not None:
        ok |= nonfin | (np.abs(np.where(nonfin, 0, pts)) >= radius)
    if attract_emb_tree is not None:
        d, _ = attract_emb_tree.query(sphere_embed(pts))
        ok |= d <= r_u
    return ok


def test_mean_stability(measure: DiscreteMeasure, grid: GridGeometry,
                        search_depth: int = 3, coverage_depth: int = 12,
                        n_max: int = 8, n_condition_words: int = 32,
                        julia_cloud: PointCloud | None = None, rng=0) -> MeanStabilityReport:
    """Numerical mean-stability verdict.

    "true" needs (a) every discovered minimal set to classify attracting and
    (b) every grid cell to reach the attracting neighborhood U within
    coverage_depth random steps; a grid witness (U, V, n) is returned.
    "false" carries the offending (j_touching or sub_rotative) set.  Unresolved
    classifications or unreached cells without a counterexample give
    "inconclusive".  The verdict is numerical, not a proof.
    """
    rng = as_rng(rng)
    tol = grid.capture_tol
    if julia_cloud is None:
        from .fractal import julia_backward_cloud
        julia_cloud = julia_backward_cloud(measure, 3000, rng=rng)
    sets = _candidate_sets(measure, search_depth, tol, rng, include_nonattracting=True)
    for est in sets:
        if est.classification == "unresolved":
            est.classification = classify_minimal_set(
                measure, est, julia_cloud, rng=rng, tol=tol, n_max=n_max)
    bad = [e for e in sets if e.classification in ("j_touching", "sub_rotative")]
    if bad:
        return MeanStabilityReport("false", sets, counterexample=bad[0])
    unresolved = [e for e in sets if e.classification == "unresolved"]
    if unresolved:
        return MeanStabilityReport("inconclusive", sets,
                                   note="unresolved minimal-set classification")

    finite_sets = [e for e in sets if not e.is_infinity]
    radius = measure.system.escape_radius
    if finite_sets:
        allpts = np.concatenate([e.cloud.points for e in finite_sets])
        attract_tree = cKDTree(sphere_embed(allpts))
        attract_cloud = PointCloud(allpts)
    else:
        attract_tree = None
        attract_cloud = None
    if attract_tree is None and radius is None:
        return MeanStabilityReport("inconclusive", sets, note="no attracting target found")

    # contraction witness: all n-words map the r_u hull into the r_v hull
    r_v = tol
    n_star = None
    r_u = None
    if attract_cloud is not None:
        for factor in (3.0, 2.0, 1.5):
            cand_r = factor * r_v
            n_star = contraction_witness_n(measure, attract_cloud, cand_r, r_v, n_max, rng)
            if n_star is not None:
                r_u = cand_r
                break
        if n_star is None:
            return MeanStabilityReport("inconclusive", sets,
                                       note="no n-word contraction witness found")
    else:
        r_u = 3.0 * r_v
        n_star = 1  # escape region alone: |h(z)| >= 2|z| beyond the radius

    # condition (III): every cell center reaches U under some sampled word
    centers = grid.points().ravel()
    reached = _in_U(measure, centers, attract_tree, r_u, radius)
    m = measure.system.m
    weights = np.asarray(measure.weights)
    for _ in range(n_condition_words):
        open_idx = np.nonzero(~reached)[0]
        if open_idx.size == 0:
            break
        z = centers[open_idx].copy()
        alive = np.ones(z.size, dtype=bool)
        for _step in range(coverage_depth):
            letters = rng.choice(m, size=z.size, p=weights)
            z = step_array(measure.system, z, letters, active=alive)
            hit = _in_U(measure, z, attract_tree, r_u, radius)
            newly = alive & hit
            if np.any(newly):
                reached[open_idx[newly]] = True
                alive &= ~hit
            if not np.any(alive):
                break
    failing = float((~reached).sum()) / reached.size
    if failing > 0:
        return MeanStabilityReport(
            "inconclusive", sets, failing_fraction=failing,
            note="cells not reaching U within coverage depth and no "
                 "non-attracting minimal set found")

    if attract_cloud is not None:
        dV = attract_cloud.distance_to(centers).reshape(grid.n, grid.n)
        V = dV <= r_v
        U = dV <= r_u
    else:
        V = np.zeros((grid.n, grid.n), dtype=bool)
        U = V.copy()
    witness = MeanStabilityWitness(grid, U, V, n_star, coverage_depth,
                                   includes_escape_region=radius is not None)
    return MeanStabilityReport("true", sets, witness=witness)


# -- bifurcation scan ---------------------------------------------------------

@dataclass
class ScanRow:
    t: float
    n_minimal_sets: int
    verdict: str
    undecided_fraction: float


@dataclass
class ScanResult:
    rows: list
    warnings: list


def scan_family_bifurcation(family, grid: GridGeometry, rng_seed: int = 0,
                            nested_supports: bool = False, search_depth: int = 3,
                            coverage_depth: int = 12) -> ScanResult:
    """Per-parameter minimal-set counts and mean-stability verdicts.

    family: sequence of (t, DiscreteMeasure).  Every t uses the same seed and
    grid.  With nested_supports=True, a count increase in t is flagged as a
    numerical-resolution warning (the true count is non-increasing).
    """
    if not family:
        raise MinimalError("family is empty")
    rows = []
    for t, measure in family:
        report = test_mean_stability(measure, grid, search_depth=search_depth,
                                     coverage_depth=coverage_depth, rng=rng_seed)
        rows.append(ScanRow(float(t), len(report.minimal_sets), report.verdict,
                            report.failing_fraction))
    warnings = []
    if nested_supports:
        for prev, cur in zip(rows, rows[1:]):
            if cur.n_minimal_sets > prev.n_minimal_sets:
                warnings.append(
                    f"count increased {prev.n_minimal_sets} -> {cur.n_minimal_sets} "
                    f"between t={prev.t} and t={cur.t}; likely a resolution artifact")
    return ScanResult(rows, warnings)
