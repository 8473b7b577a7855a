"""Parameter derivatives of T (complex Takagi functions), Green's functions,
analytic Hoelder exponents, and the maximal-entropy sampler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clouds import PointCloud
from .fractal import BasinLabelGrid, FractalError, backward_chaos_game
from .geometry import SpherePoint, critical_points
from .operator import GridFunction, OperatorError, TransitionStencil, solve_T_fixed_point
from .rng import as_rng
from .semigroup import DiscreteMeasure, RandomWord
from .series import NeumannTruncation


class AnalysisError(ValueError):
    pass


def zeta_field(measure: DiscreteMeasure, T: GridFunction, i: int,
               basins: BasinLabelGrid,
               stencil: TransitionStencil | None = None) -> GridFunction:
    """zeta_i(z) = T(h_i(z)) - T(h_m(z)), the derivative source term.

    Uses the same interpolation and out-of-grid policy as the transition
    operator; the last generator is the pivot of the weight simplex.
    """
    m = measure.system.m
    if not 0 <= i < m - 1:
        raise AnalysisError(f"generator index {i} must be below the pivot {m - 1}")
    if stencil is None:
        stencil = TransitionStencil(measure, basins)
    vi, fi, inf_i = stencil.read_composed(T, i)
    vm, fm, inf_m = stencil.read_composed(T, m - 1)
    n = basins.grid.n
    return GridFunction(basins.grid, (vi - vm).reshape(n, n), float(inf_i - inf_m),
                        name=f"zeta_{i}", extrapolated=(fi | fm).reshape(n, n))


def takagi_series(measure: DiscreteMeasure, zeta: GridFunction,
                  basins: BasinLabelGrid, lam_hat: float, tol: float = 1e-3,
                  stencil: TransitionStencil | None = None,
                  max_terms: int = 10000) -> GridFunction:
    """psi = sum_n M^n zeta, the unique solution of (I - M) psi = zeta.

    Truncated when the observed tail bound ||M^N zeta||_inf / (1 - lam_hat)
    falls below tol.  The achieved residual ||(I - M) psi - zeta||_inf is
    recorded on the result as .residual, the term count as .n_terms.
    """
    if stencil is None:
        stencil = TransitionStencil(measure, basins)
    trunc = NeumannTruncation(lam_hat, tol)
    term = zeta.copy()
    vals = term.values.copy()
    vinf = term.value_at_infinity
    flags = term.extrapolated.copy()
    while not trunc.should_stop(term.sup_norm()):
        if trunc.n_terms >= max_terms:
            raise AnalysisError(f"series not certified within {max_terms} terms")
        term = stencil.apply(term)
        vals += term.values
        vinf += term.value_at_infinity
        flags |= term.extrapolated
    psi = GridFunction(zeta.grid, vals, float(vinf), name="psi",
                       n_iter=trunc.n_terms, extrapolated=flags)
    Mpsi = stencil.apply(psi)
    psi.residual = max(
        float(np.max(np.abs(psi.values - Mpsi.values - zeta.values))),
        abs(psi.value_at_infinity - Mpsi.value_at_infinity - zeta.value_at_infinity))
    psi.n_terms = trunc.n_terms
    return psi


def finite_difference_check(family, a, L, i: int, delta: float,
                            probes: np.ndarray, basins: BasinLabelGrid,
                            psi: GridFunction, solver_tol: float = 1e-6,
                            stencil: TransitionStencil | None = None) -> float:
    """Max deviation over probes between psi and the central difference
    (T_{a + delta e_i} - T_{a - delta e_i}) / (2 delta), pivot-compensated.

    family is a callable weights -> DiscreteMeasure over a fixed generator
    system; a is the base weight vector.
    """
    a = np.asarray(a, dtype=float)
    wp = a.copy()
    wm = a.copy()
    wp[i] += delta
    wp[-1] -= delta
    wm[i] -= delta
    wm[-1] += delta
    if np.min(wp) <= 0 or np.min(wm) <= 0:
        raise AnalysisError("perturbed weights leave the simplex")
    mp, mm = family(wp), family(wm)
    sp = stencil.reweighted(mp) if stencil is not None else None
    sm = stencil.reweighted(mm) if stencil is not None else None
    Tp = solve_T_fixed_point(mp, L, basins, tol=solver_tol, stencil=sp)
    Tm = solve_T_fixed_point(mm, L, basins, tol=solver_tol, stencil=sm)
    probes = np.asarray(probes, dtype=complex)
    fd = (Tp.value_at(probes) - Tm.value_at(probes)) / (2.0 * delta)
    return float(np.max(np.abs(fd - psi.value_at(probes))))


_LOG_SWITCH = 1e30


def _log_abs_poly(h, z: complex) -> float:
    """log|h(z)| for a polynomial h at large |z|, computed without overflow."""
    d = h.degree
    lead = h.num[-1]
    r = 0j
    for j in range(d):
        r += h.num[j] / lead * z ** (j - d)
    return float(d * np.log(abs(z)) + np.log(abs(lead)) + np.log(abs(1 + r)))


def green_function_value(system, word: RandomWord, y, n_terms: int) -> float:
    """G_gamma(y) = lim (1/deg gamma_{n,1}) log+ |gamma_{n,1}(y)|.

    Iterates exactly while |z| is moderate; past that the orbit is tracked in
    log space, where log|h(z)| = deg(h) log|z| + log|lead(h)| up to a
    relative correction below |z|^{-1}.  Returns 0 for orbits still inside
    the escape radius after n_terms steps.
    """
    if not system.all_polynomial:
        raise AnalysisError("Green's functions require a polynomial system")
    letters = word.letters if hasattr(word, "letters") else tuple(word)
    if len(letters) < n_terms:
        raise AnalysisError("word shorter than n_terms")
    z = y.z if isinstance(y, SpherePoint) and not y.is_inf else y
    if isinstance(y, SpherePoint) and y.is_inf:
        return np.inf
    z = complex(z)
    radius = system.escape_radius
    g = None  # running L_k / D_k once in the log regime
    log_D = 0.0
    for k in range(n_terms):
        h = system.generators[letters[k]]
        d = h.degree
        log_D += np.log(d)
        if g is None:
            w = h.eval_array(np.array([z]))[0]
            if np.isfinite(w.real) and np.isfinite(w.imag) and abs(w) <= _LOG_SWITCH:
                z = w
            else:
                # eval can saturate past its overflow cap, so recompute the
                # magnitude from the still-representable preimage
                g = _log_abs_poly(h, z) * np.exp(-log_D)
        else:
            g += np.log(abs(h.num[-1])) * np.exp(-log_D)
    if g is None:
        return float(np.log(abs(z)) * np.exp(-log_D)) if abs(z) >= radius else 0.0
    return float(max(g, 0.0))


def omega_integral_mc(measure: DiscreteMeasure, n_words: int, word_len: int,
                      rng=0) -> tuple[float, float]:
    """Monte Carlo estimate of int Omega(gamma) dtau, Omega = sum over finite
    critical points c of gamma_1 of G_gamma(c).  Returns (estimate, stderr)."""
    if not measure.system.all_polynomial:
        raise AnalysisError("Omega requires a polynomial system")
    rng = as_rng(rng)
    m = measure.system.m
    weights = np.asarray(measure.weights)
    crit = [[c.z for c in critical_points(h) if not c.is_inf]
            for h in measure.system.generators]
    vals = np.empty(n_words)
    for k in range(n_words):
        letters = tuple(int(j) for j in rng.choice(m, size=word_len, p=weights))
        word = RandomWord(letters)
        vals[k] = sum(green_function_value(measure.system, word, c, word_len)
                      for c in crit[letters[0]])
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_words)) if n_words > 1 else 0.0
    return est, stderr


@dataclass
class AnalysisReport:
    u_value: float
    dimH_lambda: float
    omega_integral: float
    omega_stderr: float
    entropy_term: float
    degree_term: float
    u_stderr: float
    dimH_stderr: float
    n_words: int = 0
    word_len: int = 0
    seed: int | None = None


def analytic_exponents(measure: DiscreteMeasure, omega: tuple[float, float],
                       n_words: int = 0, word_len: int = 0,
                       seed: int | None = None) -> AnalysisReport:
    """u = entropy / (degree term + Omega) and
    dim_H(lambda) = (degree term + entropy) / (degree term + Omega)."""
    if not measure.system.all_polynomial:
        raise AnalysisError("exponent formulas require a polynomial system")
    om, om_err = float(omega[0]), float(omega[1])
    if om < -om_err:
        raise AnalysisError("negative Omega estimate beyond its own stderr")
    p = np.asarray(measure.weights)
    degs = np.array([h.degree for h in measure.system.generators], dtype=float)
    entropy = float(-(p * np.log(p)).sum())
    degree_term = float((p * np.log(degs)).sum())
    denom = degree_term + om
    if denom <= 0:
        raise AnalysisError("nonpositive denominator in exponent formula")
    u = entropy / denom
    dim = (degree_term + entropy) / denom
    return AnalysisReport(u, dim, om, om_err, entropy, degree_term,
                          entropy * om_err / denom ** 2,
                          (degree_term + entropy) * om_err / denom ** 2,
                          n_words, word_len, seed)


def sample_lambda(measure: DiscreteMeasure, n_points: int, burn_in: int = 100,
                  rng=0, seed_point=None) -> PointCloud:
    """Samples of the maximal relative entropy measure lambda: generator j
    with probability p_j, then a uniform inverse branch (with multiplicity)."""
    return backward_chaos_game(measure, n_points, burn_in, as_rng(rng),
                               "lambda", seed_point)


def holder_exponent_estimate(phi: GridFunction, z0, scales=None) -> float:
    """Pointwise Hoelder exponent at z0: slope of log osc(phi, B(z0, r))
    against log r over dyadic scales, osc = max - min over cells meeting
    the ball.  Raises on fewer than 4 usable scales."""
    grid = phi.grid
    z0 = z0.z if isinstance(z0, SpherePoint) else complex(z0)
    if scales is None:
        scales = grid.cell * 2.0 ** np.arange(1, 7)
    scales = np.asarray(scales, dtype=float)
    w = z0 - grid.center
    margin = grid.half_width - max(abs(w.real), abs(w.imag))
    if margin < np.max(scales):
        raise AnalysisError("largest scale exceeds the grid margin at z0")
    pts = grid.points()
    dist = np.abs(pts - z0)
    rs, oscs = [], []
    for r in scales:
        sel = phi.values[dist <= r + grid.cell / 2]
        if sel.size < 2:
            continue
        osc = float(sel.max() - sel.min())
        if osc > 0:
            rs.append(r)
            oscs.append(osc)
    if len(rs) < 4:
        raise AnalysisError("fewer than 4 usable scales")
    slope = np.polyfit(np.log(rs), np.log(oscs), 1)[0]
    return float(slope)
