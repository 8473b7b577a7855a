"""Complex/sphere geometry: rational maps, chordal metric, preimages, critical points.

Points on the Riemann sphere are `SpherePoint` values: either a finite complex
number or the distinguished point at infinity.  All map evaluation is total on
the sphere; near-infinity arithmetic switches to the reciprocal chart w = 1/z
instead of overflowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npoly

# |z| beyond which evaluation switches to the w = 1/z chart.
CHART_SWITCH = 1e8
# |value| beyond which a finite result is collapsed to the infinity point
# (the reciprocal-chart image underflows to 0 at this scale anyway).
OVERFLOW_CAP = 1e150

COEF_TOL = 1e-12
COMMON_ROOT_TOL = 1e-6


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SpherePoint:
    """A point on the Riemann sphere: a finite complex value or infinity."""

    z: complex = 0j
    is_inf: bool = False

    def __post_init__(self):
        if self.is_inf:
            object.__setattr__(self, "z", 0j)
        elif not (math.isfinite(self.z.real) and math.isfinite(self.z.imag)):
            raise GeometryError(f"finite SpherePoint with non-finite value {self.z}")

    @property
    def value(self) -> complex:
        if self.is_inf:
            raise GeometryError("infinity has no finite value")
        return self.z

    def __repr__(self):
        return "SpherePoint(inf)" if self.is_inf else f"SpherePoint({self.z})"


INF = SpherePoint(is_inf=True)


def sphere(z) -> SpherePoint:
    """Coerce a complex number (or SpherePoint) to a canonical SpherePoint."""
    if isinstance(z, SpherePoint):
        return z
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return INF
    return SpherePoint(z)


def _hom(p: SpherePoint) -> tuple[complex, complex]:
    """Unit homogeneous coordinates (a, b) with p = a/b and |a|^2+|b|^2 = 1."""
    if p.is_inf:
        return (1.0 + 0j, 0j)
    z = p.z
    az = abs(z)
    if az <= 1.0:
        b = 1.0 / math.sqrt(1.0 + az * az)
        return (z * b, b)
    u = 1.0 / z
    au = abs(u)
    a = 1.0 / math.sqrt(1.0 + au * au)
    return (a, u * a)


def chordal_distance(p, q) -> float:
    """Chordal metric on the sphere, normalized to diameter 2.

    d(z, w) = 2|z-w| / (sqrt(1+|z|^2) sqrt(1+|w|^2)), d(z, inf) = 2/sqrt(1+|z|^2).
    Computed from unit homogeneous coordinates, so it is overflow-safe.
    """
    a1, b1 = _hom(sphere(p))
    a2, b2 = _hom(sphere(q))
    return 2.0 * abs(a1 * b2 - a2 * b1)


def _embed3(z: np.ndarray) -> np.ndarray:
    """Diameter-2 sphere embedding of finite complex points (chord = chordal)."""
    s = 1.0 + np.abs(z) ** 2
    return np.stack([2.0 * z.real / s, 2.0 * z.imag / s, (np.abs(z) ** 2 - 1.0) / s], axis=-1)


def _trim(coeffs: np.ndarray) -> np.ndarray:
    """Strip trailing (near-)zero high-degree coefficients."""
    c = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return c[:1] if c.size else np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > COEF_TOL * scale)[0]
    if keep.size == 0:
        return np.zeros(1, dtype=complex)
    return c[: keep[-1] + 1]


class RationalMap:
    """A non-constant rational self-map of the sphere, p(z)/q(z).

    Coefficients are stored ascending by degree.  `is_polynomial` means the
    denominator is the constant 1.
    """

    def __init__(self, num, den=(1.0,)):
        self.num = _trim(np.asarray(num, dtype=complex))
        self.den = _trim(np.asarray(den, dtype=complex))
        if len(self.den) == 1:
            # normalize constant denominators to exactly 1
            self.num = self.num / self.den[0]
            self.den = np.ones(1, dtype=complex)
        dn, dd = len(self.num) - 1, len(self.den) - 1
        self.degree = max(dn, dd)
        self.is_polynomial = dd == 0
        self._validate()
        # reciprocal-chart representation: h(1/w) = rev(num)(w) / rev(den)(w),
        # both padded with high-degree zeros to the full degree before reversal
        d = self.degree
        self._rev_num = np.concatenate([self.num, np.zeros(d - dn, dtype=complex)])[::-1]
        self._rev_den = np.concatenate([self.den, np.zeros(d - dd, dtype=complex)])[::-1]

    def _validate(self):
        if self.degree < 1:
            raise GeometryError("map must be non-constant (degree >= 1)")
        # _trim guarantees leading coefficients exceed COEF_TOL relative to the
        # largest coefficient, so no absolute-size check here (compositions of
        # small-leading-coefficient polynomials are legitimate maps)
        if not self.is_polynomial and len(self.num) > 1:
            # no common root: compare root sets in the chordal metric
            # (magnitude tests misfire on high-degree monomial denominators)
            rn = np.roots(self.num[::-1])
            rd = np.roots(self.den[::-1])
            if rn.size and rd.size:
                en = _embed3(rn)
                ed = _embed3(rd)
                d2 = ((en[:, None, :] - ed[None, :, :]) ** 2).sum(axis=-1)
                if np.min(d2) < COMMON_ROOT_TOL ** 2:
                    raise GeometryError("numerator and denominator share a root")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, p) -> SpherePoint:
        return eval_map(self, p)

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at an array of finite complex points.

        Returns complex values; points that map to (or overflow toward) the
        infinity point come back as `np.inf + 0j`.  Intended for |z| at grid
        scale; callers handling huge |z| should use `eval_map` pointwise.
        """
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            n = npoly.polyval(z, self.num)
            if self.is_polynomial:
                out = n
            else:
                d = npoly.polyval(z, self.den)
                out = np.where(d == 0, np.inf + 0j, n / np.where(d == 0, 1, d))
            bad = ~np.isfinite(out.real) | ~np.isfinite(out.imag) | (np.abs(out) > OVERFLOW_CAP)
            out = np.where(bad, np.inf + 0j, out)
        return out

    def derivative_wronskian(self) -> np.ndarray:
        """Coefficients of p'q - pq' (the numerator of h')."""
        dp = npoly.polyder(self.num)
        if self.is_polynomial:
            return _trim(dp)
        dq = npoly.polyder(self.den)
        return _trim(npoly.polysub(npoly.polymul(dp, self.den), npoly.polymul(self.num, dq)))

    def reciprocal_source(self) -> "RationalMap":
        """The map w -> h(1/w) (source chart swapped)."""
        return RationalMap(self._rev_num, self._rev_den)

    def inverted(self) -> "RationalMap":
        """The map 1/h."""
        return RationalMap(self.den, self.num)

    def coeff_equal(self, other: "RationalMap", tol=1e-9) -> bool:
        if len(self.num) != len(other.num) or len(self.den) != len(other.den):
            return False
        # normalize by denominator leading coefficient
        s, o = self.den[-1], other.den[-1]
        scale = max(np.max(np.abs(self.num / s)), 1.0)
        return (np.allclose(self.num / s, other.num / o, atol=tol * scale)
                and np.allclose(self.den / s, other.den / o, atol=tol))

    def __repr__(self):
        if self.is_polynomial:
            return f"RationalMap(poly deg {self.degree})"
        return f"RationalMap(deg {self.degree})"


def polynomial(coeffs) -> RationalMap:
    return RationalMap(coeffs)


def eval_map(h: RationalMap, p) -> SpherePoint:
    """Evaluate h at a sphere point, total on the sphere (chart-swapped near inf)."""
    p = sphere(p)
    if p.is_inf or abs(p.z) > CHART_SWITCH:
        # h(1/w) = rev(num)(w) / rev(den)(w) with both padded to the full degree
        w = 0j if p.is_inf else 1.0 / p.z
        n = npoly.polyval(w, h._rev_num)
        d = npoly.polyval(w, h._rev_den)
        if d == 0 or abs(n) > abs(d) * OVERFLOW_CAP:
            return INF
        val = n / d
        if not (math.isfinite(val.real) and math.isfinite(val.imag)) or abs(val) > OVERFLOW_CAP:
            return INF
        return SpherePoint(val)
    z = p.z
    n = npoly.polyval(z, h.num)
    if h.is_polynomial:
        val = n
    else:
        d = npoly.polyval(z, h.den)
        if d == 0 or abs(n) > abs(d) * OVERFLOW_CAP:
            return INF
        val = n / d
    if not (math.isfinite(val.real) and math.isfinite(val.imag)) or abs(val) > OVERFLOW_CAP:
        return INF
    return SpherePoint(val)


def spherical_derivative_norm(h: RationalMap, p) -> float:
    """Norm of Dh at p with respect to the spherical (chordal) metric.

    ||Dh_z|| = |h'(z)| (1+|z|^2) / (1+|h(z)|^2), with chart swaps at/near
    infinity (inversion is a chordal isometry, so pre/post-composing with
    1/z leaves the norm unchanged).
    """
    p = sphere(p)
    g = h
    if p.is_inf or abs(p.z) > 1.0:
        g = h.reciprocal_source()
        p = SpherePoint(0j) if p.is_inf else SpherePoint(1.0 / p.z)
    img = eval_map(g, p)
    if img.is_inf or abs(img.z) > 1.0:
        g = g.inverted()
        img = eval_map(g, p)
    z = p.z
    q = npoly.polyval(z, g.den)
    if q == 0:
        # pole of the chart-adjusted map with bounded image: derivative blows up
        return math.inf
    w = npoly.polyval(z, g.derivative_wronskian())
    deriv = w / (q * q)
    hz = abs(img.z) if not img.is_inf else math.inf
    return abs(deriv) * (1.0 + abs(z) ** 2) / (1.0 + hz * hz)


def _newton_polish(coeffs: np.ndarray, roots: np.ndarray, steps=1) -> np.ndarray:
    dc = npoly.polyder(coeffs)
    r = roots.astype(complex)
    for _ in range(steps):
        f = npoly.polyval(r, coeffs)
        df = npoly.polyval(r, dc)
        ok = df != 0
        r = np.where(ok, r - f / np.where(ok, df, 1), r)
    return r


def poly_roots(coeffs) -> np.ndarray:
    """All finite roots of a polynomial (ascending coefficients), Newton-polished."""
    c = _trim(np.asarray(coeffs, dtype=complex))
    if len(c) == 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(c[::-1])
    return _newton_polish(c, r)


def preimages(h: RationalMap, w) -> list[SpherePoint]:
    """All solutions of h(z) = w, with multiplicity; list length = deg(h)."""
    w = sphere(w)
    dn, dd = len(h.num) - 1, len(h.den) - 1
    if w.is_inf:
        c = h.den
        inf_mult = h.degree - dd  # inf is a preimage of inf for polynomial-like maps
    else:
        nd = max(len(h.num), len(h.den))
        num = np.concatenate([h.num, np.zeros(nd - len(h.num), dtype=complex)])
        den = np.concatenate([h.den, np.zeros(nd - len(h.den), dtype=complex)])
        c = _trim(num - w.z * den)
        inf_mult = h.degree - (len(c) - 1)
    finite = poly_roots(c)
    out = [SpherePoint(z) for z in finite]
    out.extend([INF] * inf_mult)
    return out


def critical_points(h: RationalMap) -> list[SpherePoint]:
    """Finite-plane critical points of h, with multiplicity."""
    wr = h.derivative_wronskian()
    return [SpherePoint(z) for z in poly_roots(wr)]


def compose(f: RationalMap, g: RationalMap) -> RationalMap:
    """The composition f(g(z)) as a RationalMap; deg = deg f * deg g."""
    d = f.degree
    nf = np.concatenate([f.num, np.zeros(d + 1 - len(f.num), dtype=complex)])
    df_ = np.concatenate([f.den, np.zeros(d + 1 - len(f.den), dtype=complex)])
    # powers of g.num and g.den
    pn = [np.ones(1, dtype=complex)]
    pd = [np.ones(1, dtype=complex)]
    for _ in range(d):
        pn.append(npoly.polymul(pn[-1], g.num))
        pd.append(npoly.polymul(pd[-1], g.den))
    num = np.zeros(1, dtype=complex)
    den = np.zeros(1, dtype=complex)
    for k in range(d + 1):
        term = npoly.polymul(pn[k], pd[d - k])
        num = npoly.polyadd(num, nf[k] * term)
        den = npoly.polyadd(den, df_[k] * term)
    num, den = _trim(num), _trim(den)
    m = max(np.max(np.abs(num)), np.max(np.abs(den)))
    if not math.isfinite(m) or m > OVERFLOW_CAP:
        raise GeometryError(
            "composed coefficients overflow; evaluate orbits instead of composing")
    lead = den[-1]
    return RationalMap(num / lead, den / lead)
