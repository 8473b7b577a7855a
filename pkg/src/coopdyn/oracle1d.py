"""Closed-form real-line analogues: Lebesgue singular functions, the classical
Takagi function, the devil's staircase, and expanding affine random systems.

Everything here is grid-free (recursion or series), so these serve as exact
oracles for the plane machinery; grids appear only as evaluation points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import as_rng
from .series import NeumannTruncation


class OracleError(ValueError):
    pass


def _as_unit_interval(x) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0.0) | (xs > 1.0)):
        raise OracleError("argument outside [0, 1]")
    return xs


def _unwrap(out: np.ndarray, x):
    return float(out[0]) if np.ndim(x) == 0 else out


def lebesgue_singular(a: float, x, depth: int = 50):
    """Lebesgue's singular function L_a via the dyadic recursion
    L_a(x) = a L_a(2x) on [0,1/2], L_a(x) = a + (1-a) L_a(2x-1) on [1/2,1].

    Truncation error <= max(a, 1-a)^depth; exact at dyadic rationals
    resolved within depth.
    """
    if not 0.0 < a < 1.0:
        raise OracleError("a must lie in (0, 1)")
    y = _as_unit_interval(x).copy()
    off = np.zeros_like(y)
    sc = np.ones_like(y)
    for _ in range(depth):
        left = y <= 0.5
        off = np.where(left, off, off + sc * a)
        sc = np.where(left, sc * a, sc * (1.0 - a))
        y = np.where(left, 2.0 * y, 2.0 * y - 1.0)
    out = off + sc * y
    # pin the boundary conditions: the accumulated products round off 1 ulp
    xs = _as_unit_interval(x)
    out = np.where(xs == 0.0, 0.0, np.where(xs == 1.0, 1.0, out))
    return _unwrap(out, x)


def takagi_classic(x, n_terms: int = 40):
    """Partial sum of T(x) = sum_n 2^{-n} dist(2^n x, Z); tail <= 2^{1-n_terms}."""
    if n_terms < 1:
        raise OracleError("need at least one term")
    t = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    s = np.zeros_like(t)
    for n in range(n_terms):
        s += np.abs(t - np.round(t)) / 2.0 ** n
        t = 2.0 * t
    return _unwrap(s, x)


def devils_staircase(x, depth: int = 50):
    """The Cantor function by ternary recursion: C = C(3x)/2 on [0,1/3],
    1/2 on the middle plateau, 1/2 + C(3x-2)/2 on [2/3,1]."""
    y = _as_unit_interval(x).copy()
    off = np.zeros_like(y)
    sc = np.ones_like(y)
    for _ in range(depth):
        low = y <= 1.0 / 3.0
        high = y >= 2.0 / 3.0
        mid = ~low & ~high
        off = np.where(high | mid, off + 0.5 * sc, off)
        sc = np.where(mid, 0.0, 0.5 * sc)
        y = np.where(low, 3.0 * y, np.where(high, 3.0 * y - 2.0, y))
    return _unwrap(off + sc * y, x)


@dataclass(frozen=True)
class RealAffineSystem:
    """Expanding real affine maps x -> s_k x + t_k with weights, on an interval.

    Each map must be orientation-preserving with s_k > 1 and carry the domain
    onto a superset of itself, so that once an orbit leaves the domain it
    never returns (this justifies boundary absorption in the recursions).
    """

    maps: tuple[tuple[float, float], ...]
    weights: tuple[float, ...]
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise OracleError("empty domain interval")
        if len(self.maps) != len(self.weights) or not self.maps:
            raise OracleError("maps and weights must align and be nonempty")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise OracleError("weights must be positive and sum to 1")
        for s, t in self.maps:
            if s <= 1.0:
                raise OracleError("maps must be expanding with s > 1")
            if s * lo + t > lo + 1e-12 or s * hi + t < hi - 1e-12:
                raise OracleError("each map must carry the domain onto a superset")


def doubling_system(a: float) -> RealAffineSystem:
    """g_1(x) = 2x, g_2(x) = 2(x-1)+1 with weights (a, 1-a); its T is L_a."""
    return RealAffineSystem(((2.0, 0.0), (2.0, -1.0)), (a, 1.0 - a))


def ternary_system() -> RealAffineSystem:
    """h_1(x) = 3x, h_2(x) = 3(x-1)+1 with equal weights; its T is the
    devil's staircase."""
    return RealAffineSystem(((3.0, 0.0), (3.0, -2.0)), (0.5, 0.5))


def _branch_step(system: RealAffineSystem, y: np.ndarray):
    """One exact recursion level, vectorized.

    For each point: the probability mass of branches absorbed right of the
    domain, the weight and image of the (at most one) branch staying inside.
    Branch preimages of these systems tile the domain, so at most one image
    stays interior; overlapping-preimage systems are rejected.
    """
    lo, hi = system.domain
    right = np.zeros_like(y)
    p_in = np.zeros_like(y)
    y_in = np.zeros_like(y)
    n_in = np.zeros_like(y)
    for (s, t), p in zip(system.maps, system.weights):
        g = s * y + t
        # endpoints absorb exactly: T(lo) = 0 and T(hi) = 1
        right += p * (g >= hi)
        inside = (g > lo) & (g < hi)
        p_in = np.where(inside, p, p_in)
        y_in = np.where(inside, g, y_in)
        n_in += inside
    if np.any(n_in > 1):
        raise OracleError("branch preimages overlap; use monte-carlo mode")
    return right, p_in, y_in


def _exact_T(system: RealAffineSystem, xs: np.ndarray, depth: int) -> np.ndarray:
    """T by the absorption recursion, following each point's single interior
    branch; truncation closed with the linear base value."""
    lo, hi = system.domain
    out = np.where(xs > hi, 1.0, 0.0)
    mid = (xs >= lo) & (xs <= hi)
    y = xs[mid].copy()
    val = np.zeros_like(y)
    wgt = np.ones_like(y)
    for _ in range(depth):
        right, p_in, y_in = _branch_step(system, y)
        val += wgt * right
        wgt *= p_in
        y = y_in
    out[mid] = val + wgt * (y - lo) / (hi - lo)
    return out


def real_random_T(system: RealAffineSystem, x, mode: str = "exact-recursion",
                  depth: int = 50, n_samples: int = 10000,
                  max_steps: int = 200, rng=0):
    """Probability of tending to +infinity from x.

    exact-recursion solves T(x) = sum_k p_k T(g_k(x)) with absorption 0 left
    of the domain and 1 right of it; monte-carlo samples random words.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = system.domain
    if mode == "exact-recursion":
        out = _exact_T(system, xs, depth)
    elif mode == "monte-carlo":
        gen = as_rng(rng)
        w = np.asarray(system.weights)
        out = np.empty(xs.size)
        for i, x0 in enumerate(xs):
            z = np.full(n_samples, x0)
            val = np.full(n_samples, np.nan)
            for _ in range(max_steps):
                open_ = np.isnan(val)
                if not np.any(open_):
                    break
                ks = gen.choice(len(system.maps), size=int(open_.sum()), p=w)
                ss = np.array([system.maps[k][0] for k in ks])
                ts = np.array([system.maps[k][1] for k in ks])
                z[open_] = ss * z[open_] + ts
                val[open_ & (z < lo)] = 0.0
                val[open_ & (z > hi) & np.isnan(val)] = 1.0
            rem = np.isnan(val)
            val[rem] = (np.clip(z[rem], lo, hi) - lo) / (hi - lo)
            out[i] = val.mean()
    else:
        raise OracleError(f"unknown mode {mode!r}")
    return _unwrap(out, x)


def real_parameter_derivative(xs, a: float = 0.5, mode: str = "series",
                              family=None, depth: int = 40, T_depth: int = 50,
                              delta: float = 1e-4, tol: float = 1e-12,
                              lam_hat: float = 0.5) -> np.ndarray:
    """psi(x) = d/da T(x) for a one-parameter weight family (doubling by
    default, where (1/2) psi is the classical Takagi function).

    series mode sums M^n zeta with zeta = T o g_1 - T o g_2, truncated by the
    shared tail-bound rule (capped at depth terms); finite-difference mode
    central-differences the exact recursion.
    """
    if family is None:
        family = doubling_system
    xs = np.asarray(xs, dtype=float)
    if mode == "series":
        system = family(a)
        if len(system.maps) != 2:
            raise OracleError("series mode needs a two-map family")
        (s1, t1), (s2, t2) = system.maps

        def zeta_fn(ys):
            return (_exact_T(system, s1 * ys + t1, T_depth)
                    - _exact_T(system, s2 * ys + t2, T_depth))

        # M^n zeta evaluated along each point's single interior branch:
        # (M^n zeta)(x) = w_n zeta(y_n), since zeta vanishes outside the
        # domain and exterior orbits never return
        lo, hi = system.domain
        mid = (xs >= lo) & (xs <= hi)
        y = xs[mid].copy()
        wgt = np.ones_like(y)
        psi = np.zeros_like(xs)
        acc = np.zeros_like(y)
        trunc = NeumannTruncation(lam_hat, tol)
        for _ in range(depth):
            term = wgt * zeta_fn(y)
            acc += term
            if trunc.should_stop(float(np.max(np.abs(term), initial=0.0))):
                break
            _, p_in, y_in = _branch_step(system, y)
            wgt *= p_in
            y = y_in
        psi[mid] = acc
        return psi
    if mode == "finite-difference":
        sp, sm = family(a + delta), family(a - delta)
        Tp = real_random_T(sp, xs, depth=T_depth)
        Tm = real_random_T(sm, xs, depth=T_depth)
        return (np.atleast_1d(Tp) - np.atleast_1d(Tm)) / (2.0 * delta)
    raise OracleError(f"unknown mode {mode!r}")


def real_transition(system: RealAffineSystem, phi, xs: np.ndarray) -> np.ndarray:
    """(M phi)(x) = sum_k p_k phi(g_k(x)) for a callable phi; the 1-D twin of
    the plane transition operator, used by the shared axiom battery."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    for (s, t), p in zip(system.maps, system.weights):
        out += p * np.asarray(phi(s * xs + t), dtype=float)
    return out
