"""Grid-sampled observables and the transition operator M phi = sum_j p_j phi o h_j.

The operator acts on real grid functions with a separate value at infinity.
T_{L} (probability of tending to a minimal set L) is the fixed point of M
started from a smooth bump on L's capture region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .clouds import PointCloud, sphere_embed
from .fractal import BasinLabelGrid, LABEL_ESCAPING
from .geometry import INF, eval_map
from .grids import GridGeometry
from .minimal import MinimalSetEstimate
from .semigroup import DiscreteMeasure


class OperatorError(ValueError):
    pass


@dataclass
class GridFunction:
    """A real observable sampled at grid cell centers, plus its value at infinity.

    `extrapolated` marks cells whose value (at some point of its history)
    depended on a nearest-edge clamp read outside the grid.
    """

    grid: GridGeometry
    values: np.ndarray
    value_at_infinity: float = 0.0
    name: str = ""
    n_iter: int = 0
    extrapolated: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise OperatorError("values shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise OperatorError("grid function values must be finite")
        if self.extrapolated is None:
            self.extrapolated = np.zeros((self.grid.n, self.grid.n), dtype=bool)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.value_at_infinity,
                            self.name, self.n_iter, self.extrapolated.copy())

    def value_at(self, z) -> np.ndarray:
        """Bilinear read at complex point(s); infinity reads value_at_infinity."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        nonfin = ~np.isfinite(zz.real) | ~np.isfinite(zz.imag)
        out = self.grid.interp(self.values, np.where(nonfin, 0, zz))
        out = np.asarray(out, dtype=float)
        out[nonfin.reshape(out.shape)] = self.value_at_infinity
        return out.reshape(np.shape(z)) if np.shape(z) else out.ravel()[0]

    def sup_norm(self) -> float:
        return max(float(np.max(np.abs(self.values))), abs(self.value_at_infinity))


def _same_geometry(a: GridGeometry, b: GridGeometry) -> bool:
    return a.center == b.center and a.half_width == b.half_width and a.n == b.n


class TransitionStencil:
    """Precomputed interpolation data for applying M on a fixed grid.

    Out-of-grid policy per generator image h_j(z):
      |h_j(z)| >= escape radius (or = infinity)  -> value_at_infinity
      otherwise outside the grid, basins known   -> value at the nearest
                                                    classified basin representative
      otherwise                                  -> nearest-edge clamp, cell
                                                    flagged extrapolated
    """

    def __init__(self, measure: DiscreteMeasure, basins: BasinLabelGrid):
        self.measure = measure
        self.basins = basins
        self.grid = basins.grid
        grid = self.grid
        radius = measure.system.escape_radius
        centers = grid.points().ravel()
        # out-of-grid fallback: route through the nearest classified cell;
        # an escaping cell means the image reads value_at_infinity, a basin
        # cell means it reads at that basin's representative
        labels_flat = basins.labels.ravel()
        classified = np.nonzero(labels_flat >= LABEL_ESCAPING)[0]
        cls_tree = cKDTree(sphere_embed(centers[classified])) if classified.size else None
        rep_of = {k: v for k, v in basins.representatives.items()}

        self.per_gen = []
        self.inf_images = []
        for h in measure.system.generators:
            img = h.eval_array(centers)
            nonfin = ~np.isfinite(img.real) | ~np.isfinite(img.imag)
            if radius is not None:
                esc = nonfin | (np.abs(np.where(nonfin, 0, img)) >= radius)
            else:
                esc = nonfin
            ingrid = grid.contains(img)
            out = ~ingrid & ~esc
            rep_idx = np.full(centers.size, -1, dtype=np.int64)
            clamp = np.zeros(centers.size, dtype=bool)
            if np.any(out):
                if cls_tree is not None:
                    _, near = cls_tree.query(sphere_embed(img[out]))
                    near_cell = classified[near]
                    near_label = labels_flat[near_cell]
                    sub_esc = near_label == LABEL_ESCAPING
                    sub_rep = np.array([rep_of.get(int(l), -1) for l in near_label],
                                       dtype=np.int64)
                    sub_clamp = ~sub_esc & (sub_rep < 0)
                    oidx = np.nonzero(out)[0]
                    esc[oidx[sub_esc]] = True
                    rep_idx[oidx] = np.where(sub_esc, -1, sub_rep)
                    clamp[oidx[sub_clamp]] = True
                    rep_idx[oidx[sub_clamp]] = -1
                else:
                    clamp[out] = True
            idx, wt = grid.bilinear_stencil(np.where(ingrid | clamp, img, 0))
            self.per_gen.append((idx, wt, esc, rep_idx, clamp))

            pinf = eval_map(h, INF)
            self.inf_images.append("inf" if pinf.is_inf else pinf.z)
        self.clamped_any = np.zeros(centers.size, dtype=bool)
        for _, _, _, _, clamp in self.per_gen:
            self.clamped_any |= clamp
        self.clamped_any = self.clamped_any.reshape(grid.n, grid.n)

    def reweighted(self, measure: DiscreteMeasure) -> "TransitionStencil":
        """The stencil for a measure with the same generators but new weights;
        shares the precomputed per-generator interpolation data."""
        if measure.system.generators != self.measure.system.generators:
            raise OperatorError("reweighted stencil requires the same generator system")
        out = object.__new__(TransitionStencil)
        out.measure = measure
        out.basins = self.basins
        out.grid = self.grid
        out.per_gen = self.per_gen
        out.inf_images = self.inf_images
        out.clamped_any = self.clamped_any
        return out

    def read_composed(self, phi: GridFunction, j: int):
        """(phi o h_j) at every cell center, plus its extrapolation flags and
        the value of phi(h_j(infinity))."""
        if not _same_geometry(phi.grid, self.grid):
            raise OperatorError("grid geometry mismatch")
        flat = phi.values.ravel()
        flag = phi.extrapolated.ravel().astype(float)
        idx, wt, esc, rep_idx, clamp = self.per_gen[j]
        corners = flat[idx]
        # the true bilinear value lies in the hull of its four corners;
        # clipping removes only rounding, keeping constants/positivity/
        # contraction exact
        vals = np.clip((corners * wt).sum(axis=0),
                       corners.min(axis=0), corners.max(axis=0))
        fl = (flag[idx] * wt).sum(axis=0) > 0
        use_rep = rep_idx >= 0
        vals = np.where(use_rep, flat[np.where(use_rep, rep_idx, 0)], vals)
        fl = np.where(use_rep, flag[np.where(use_rep, rep_idx, 0)] > 0, fl)
        vals = np.where(esc, phi.value_at_infinity, vals)
        fl = np.where(esc, False, fl) | clamp

        im = self.inf_images[j]
        radius = self.measure.system.escape_radius
        if im == "inf":
            vinf = phi.value_at_infinity
        else:
            zim = complex(im)
            if radius is not None and abs(zim) >= radius:
                vinf = phi.value_at_infinity
            elif self.grid.contains(np.array([zim]))[0]:
                vinf = float(self.grid.interp(phi.values, zim))
            else:
                vinf = phi.value_at_infinity
        return vals, fl, vinf

    def apply(self, phi: GridFunction) -> GridFunction:
        if not _same_geometry(phi.grid, self.grid):
            raise OperatorError("grid geometry mismatch")
        n2 = phi.values.size
        acc = np.zeros(n2)
        lo = np.full(n2, np.inf)
        hi = np.full(n2, -np.inf)
        facc = np.zeros(n2, dtype=bool)
        vinf_acc, vinf_lo, vinf_hi = 0.0, np.inf, -np.inf
        for j, p in enumerate(self.measure.weights):
            vals, fl, vinf = self.read_composed(phi, j)
            acc += p * vals
            np.minimum(lo, vals, out=lo)
            np.maximum(hi, vals, out=hi)
            facc |= fl
            vinf_acc += p * vinf
            vinf_lo, vinf_hi = min(vinf_lo, vinf), max(vinf_hi, vinf)
        # the generator average is a convex combination of the reads
        acc = np.clip(acc, lo, hi)
        vinf_acc = min(max(vinf_acc, vinf_lo), vinf_hi)
        n = self.grid.n
        return GridFunction(self.grid, acc.reshape(n, n), float(vinf_acc),
                            phi.name, phi.n_iter + 1, facc.reshape(n, n))


def apply_transition(measure: DiscreteMeasure, phi: GridFunction,
                     basins: BasinLabelGrid,
                     stencil: TransitionStencil | None = None) -> GridFunction:
    """(M phi)(z) = sum_j p_j phi(h_j(z)); pass a TransitionStencil when iterating."""
    if stencil is None:
        stencil = TransitionStencil(measure, basins)
    return stencil.apply(phi)


def transition_read(measure: DiscreteMeasure, phi: GridFunction, z,
                    max_depth: int = 30) -> float:
    """Read phi at any plane point: inside the grid by interpolation, outside
    by the branch expectation phi(z) = sum_j p_j phi(h_j(z)) expanded until
    every branch lands in the grid or escapes."""
    radius = measure.system.escape_radius

    def go(w: complex, depth: int) -> float:
        if not (np.isfinite(w.real) and np.isfinite(w.imag)):
            return phi.value_at_infinity
        if radius is not None and abs(w) >= radius:
            return phi.value_at_infinity
        if phi.grid.contains(np.array([w]))[0]:
            return float(phi.grid.interp(phi.values, w))
        if depth >= max_depth:
            raise OperatorError(f"branch expectation unresolved at depth {max_depth}")
        total = 0.0
        for p, h in zip(measure.weights, measure.generators):
            img = eval_map(h, w)
            total += p * go(np.inf + 0j if img.is_inf else img.z, depth + 1)
        return total

    w = complex(z)
    return go(w, 0)


def bump_function(grid: GridGeometry, cloud: PointCloud, margin_cells: int = 5) -> np.ndarray:
    """Cosine-taper bump: 1 within the capture tolerance of the cloud, 0 beyond
    the capture tolerance plus a margin_cells-cell taper."""
    d = cloud.distance_to(grid.points().ravel()).reshape(grid.n, grid.n)
    inner = grid.capture_tol
    margin = 2.0 * margin_cells * grid.cell  # chordal upper bound of the planar margin
    t = np.clip((d - inner) / margin, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * t))


@dataclass
class _History:
    residuals: list = field(default_factory=list)


def solve_T_fixed_point(measure: DiscreteMeasure, L, basins: BasinLabelGrid,
                        tol: float = 1e-6, max_iter: int = 2000,
                        others: list | None = None,
                        stencil: TransitionStencil | None = None) -> GridFunction:
    """T_{L} = lim M^n(phi_L) on the grid, phi_L a smooth bump at L.

    Returns a GridFunction whose recorded residual (stored as .residual)
    satisfies ||M T - T||_inf <= tol.  Raises OperatorError with the residual
    history on non-convergence.
    """
    grid = basins.grid
    if stencil is None:
        stencil = TransitionStencil(measure, basins)
    to_infinity = isinstance(L, str) and L == "infinity" or \
        (isinstance(L, MinimalSetEstimate) and L.is_infinity)
    if to_infinity:
        if not measure.system.all_polynomial:
            raise OperatorError('L="infinity" requires a polynomial system')
        phi = GridFunction(grid, np.zeros((grid.n, grid.n)), 1.0, name="T_infinity")
    else:
        cloud = L.cloud if isinstance(L, MinimalSetEstimate) else L
        vals = bump_function(grid, cloud)
        if others is not None:
            for o in others:
                oc = o.cloud if isinstance(o, MinimalSetEstimate) else o
                if isinstance(oc, str):
                    continue
                od = oc.distance_to(grid.points().ravel()).reshape(grid.n, grid.n)
                if np.any((od <= grid.capture_tol) & (vals > 0)):
                    raise OperatorError("bump overlaps another minimal set's capture region")
        phi = GridFunction(grid, vals, 0.0, name="T_L")

    hist = _History()
    for _ in range(max_iter):
        nxt = stencil.apply(phi)
        res = max(float(np.max(np.abs(nxt.values - phi.values))),
                  abs(nxt.value_at_infinity - phi.value_at_infinity))
        hist.residuals.append(res)
        phi = nxt
        if res <= tol:
            break
    else:
        raise OperatorError(
            f"no fixed point within {max_iter} iterations; last residuals "
            f"{hist.residuals[-5:]} (non-mean-stable or under-resolved?)")
    lo, hi = float(phi.values.min()), float(phi.values.max())
    if lo < -10 * tol or hi > 1 + 10 * tol:
        raise OperatorError(f"fixed point leaves [0,1]: range [{lo}, {hi}]")
    phi.values = np.clip(phi.values, 0.0, 1.0)
    phi.residual = hist.residuals[-1]
    phi.residual_history = hist.residuals
    return phi


@dataclass
class RateEstimate:
    lam_hat: float
    r_squared: float
    below_noise_floor: bool
    increments: np.ndarray
    nonuniform_decay: bool = False


def _log_fit(n: np.ndarray, e: np.ndarray):
    x = n.astype(float)
    y = np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-20 else 1.0
    return float(np.exp(slope)), r2


def estimate_convergence_rate(measure: DiscreteMeasure, phi: GridFunction,
                              basins: BasinLabelGrid, n_iters: int = 40,
                              stencil: TransitionStencil | None = None) -> RateEstimate:
    """Fit log ||M^{n+1} phi - M^n phi||_inf against n; the slope exponential
    is the empirical contraction rate lambda-hat.

    A genuinely contracting operator shows a single exponential regime.  A
    persistent oscillation (kernel Julia set nonempty) shows a plateau of
    near-constant increments followed by a fast decay once the oscillating
    feature compresses below grid resolution; in that case the plateau rate
    is reported with nonuniform_decay set, since the late decay measures the
    grid, not the operator.
    """
    if n_iters < 10:
        raise OperatorError("n_iters must be >= 10")
    if stencil is None:
        stencil = TransitionStencil(measure, basins)
    cur = phi
    incs = []
    for _ in range(n_iters):
        nxt = stencil.apply(cur)
        incs.append(max(float(np.max(np.abs(nxt.values - cur.values))),
                        abs(nxt.value_at_infinity - cur.value_at_infinity)))
        cur = nxt
    incs = np.array(incs)
    burn = 2
    usable = np.nonzero(incs[burn:] > 1e-14)[0] + burn
    if usable.size < 5:
        return RateEstimate(0.0, 1.0, True, incs)
    lam, r2 = _log_fit(usable, incs[usable])

    # plateau detection: initial run of near-unit consecutive ratios,
    # scanned from the very first increment (no burn; the plateau of a
    # persistent oscillation starts immediately)
    run = 0
    for k in range(incs.size - 1):
        if incs[k] > 1e-14 and incs[k + 1] / incs[k] >= 0.95:
            run += 1
        else:
            break
    if run >= 3 and lam < 0.9:
        plateau = np.arange(run + 1)
        lam_p, r2_p = _log_fit(plateau, incs[plateau])
        return RateEstimate(lam_p, r2_p, False, incs, nonuniform_decay=True)
    return RateEstimate(lam, r2, False, incs)


def project_pi_tau(measure: DiscreteMeasure, phi: GridFunction, minimal_sets: list,
                   basins: BasinLabelGrid, tol: float = 1e-6,
                   T_functions: dict | None = None,
                   stencil: TransitionStencil | None = None) -> GridFunction:
    """Projection onto the span of the T-functions: pi(phi) = sum_L c_L T_L,
    c_L = lim M^n(phi) on L.  Supported for attracting minimal sets with
    period 1 only; the general decomposition would take per-cycle averages
    c_{L,j} along each component, and higher periods raise an
    unsupported-configuration error here.
    """
    for L in minimal_sets:
        if L.classification != "attracting":
            raise OperatorError("projection requires all minimal sets attracting")
        if L.period != 1:
            raise OperatorError("projection implemented for period-1 minimal sets only")
    if stencil is None:
        stencil = TransitionStencil(measure, basins)

    finite = [L for L in minimal_sets if not L.is_infinity]
    cur = phi
    prev_reads = None
    for _ in range(2000):
        reads = np.array([float(np.mean(cur.value_at(L.cloud.points))) for L in finite])
        if prev_reads is not None and (reads.size == 0 or
                                       np.max(np.abs(reads - prev_reads)) <= tol):
            break
        prev_reads = reads
        cur = stencil.apply(cur)
    else:
        raise OperatorError("limit averages did not settle within the iteration cap")
    c = {id(L): reads[i] for i, L in enumerate(finite)}

    out = np.zeros_like(phi.values)
    vinf = 0.0
    for L in minimal_sets:
        if T_functions is not None and id(L) in T_functions:
            TL = T_functions[id(L)]
        else:
            TL = solve_T_fixed_point(measure, L, basins, tol=tol, stencil=stencil)
        cL = phi.value_at_infinity if L.is_infinity else c[id(L)]
        out = out + cL * TL.values
        vinf += cL * TL.value_at_infinity
    return GridFunction(phi.grid, out, float(vinf), name="pi_tau")
