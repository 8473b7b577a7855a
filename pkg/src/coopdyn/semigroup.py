"""Generator systems, finitely supported measures, random words and orbits.

The i.i.d. random dynamics: at every step draw a generator h_j with
probability p_j and apply it.  `estimate_T_monte_carlo` estimates the
probability of tending to a target set by finite-step capture.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clouds import PointCloud, sphere_embed
from .geometry import INF, RationalMap, SpherePoint, eval_map, sphere
from .rng import as_rng


class SemigroupError(ValueError):
    pass


def escape_radius_poly(h: RationalMap) -> float:
    """Radius R with |h(z)| >= 2|z| for all |z| >= R (coefficient bound)."""
    if not h.is_polynomial:
        raise SemigroupError("escape radius requires a polynomial map")
    a = np.abs(h.num)
    d = h.degree
    lead = a[-1]
    r1 = (1.0 + 2.0 * a[:-1].sum()) / lead
    r2 = (4.0 / lead) ** (1.0 / (d - 1)) if d > 1 else 4.0 / lead
    return max(1.0, r1, r2)


@dataclass(frozen=True)
class GeneratorSystem:
    """An ordered generator system {h_1, ..., h_m}, m >= 1, pairwise distinct."""

    generators: tuple[RationalMap, ...]
    all_polynomial: bool = field(init=False)
    escape_radius: float | None = field(init=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(gens) == 0:
            raise SemigroupError("generator list is empty")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if gens[i].coeff_equal(gens[j]):
                    raise SemigroupError(f"generators {i} and {j} are identical")
        object.__setattr__(self, "generators", gens)
        all_poly = all(g.is_polynomial for g in gens)
        object.__setattr__(self, "all_polynomial", all_poly)
        rad = max(escape_radius_poly(g) for g in gens) if all_poly else None
        object.__setattr__(self, "escape_radius", rad)

    @property
    def m(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class DiscreteMeasure:
    """tau = sum_j p_j delta_{h_j}: a finitely supported measure on Rat."""

    system: GeneratorSystem
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != self.system.m:
            raise SemigroupError("weights length must match generator count")
        if any(x <= 0 for x in w):
            raise SemigroupError("weights must be positive")
        if abs(sum(w) - 1.0) > 1e-12:
            raise SemigroupError(f"weights must sum to 1 (got {sum(w)!r})")
        object.__setattr__(self, "weights", w)

    @property
    def generators(self):
        return self.system.generators

    def permuted(self, order) -> "DiscreteMeasure":
        gens = tuple(self.system.generators[i] for i in order)
        return DiscreteMeasure(GeneratorSystem(gens), tuple(self.weights[i] for i in order))


def build_semigroup(maps, weights) -> DiscreteMeasure:
    """Validate and assemble a DiscreteMeasure from maps and weights."""
    return DiscreteMeasure(GeneratorSystem(tuple(maps)), tuple(weights))


@dataclass(frozen=True)
class RandomWord:
    """Generator indices in application order: the orbit is gamma_n o ... o gamma_1."""

    letters: tuple[int, ...]

    def __len__(self):
        return len(self.letters)


def sample_word(measure: DiscreteMeasure, length: int, rng) -> RandomWord:
    """An i.i.d. word of the given length with letter law (p_j)."""
    if length < 0:
        raise SemigroupError("length must be >= 0")
    rng = as_rng(rng)
    letters = rng.choice(measure.system.m, size=length, p=measure.weights)
    return RandomWord(tuple(int(i) for i in letters))


def forward_orbit(system: GeneratorSystem, word: RandomWord, z) -> list[SpherePoint]:
    """[z, g1(z), g2 g1(z), ...]; length len(word)+1."""
    p = sphere(z)
    orbit = [p]
    for j in word.letters:
        p = eval_map(system.generators[j], p)
        orbit.append(p)
    return orbit


# -- vectorized stepping ------------------------------------------------------

def step_array(system: GeneratorSystem, z: np.ndarray, letters: np.ndarray,
               active=None) -> np.ndarray:
    """Apply the letter-chosen generator to each point of a complex array.

    Infinity is encoded as inf+0j.  Non-active entries pass through unchanged.
    """
    out = z.copy()
    if active is None:
        active = np.ones(z.shape, dtype=bool)
    finite = np.isfinite(z.real) & np.isfinite(z.imag)
    for j, h in enumerate(system.generators):
        sel = active & finite & (letters == j)
        if np.any(sel):
            out[sel] = h.eval_array(z[sel])
        sel_inf = active & ~finite & (letters == j)
        if np.any(sel_inf):
            img = eval_map(h, INF)
            out[sel_inf] = np.inf + 0j if img.is_inf else img.z
    return out


def _target_cloud(target):
    if isinstance(target, PointCloud):
        return target
    cloud = getattr(target, "cloud", None)
    if isinstance(cloud, PointCloud):
        return cloud
    return PointCloud(np.atleast_1d(np.asarray(target, dtype=complex)))


@dataclass
class TEstimate:
    estimate: float
    stderr: float
    n_samples: int
    undecided: int


def estimate_T_monte_carlo(measure: DiscreteMeasure, target, z, n_samples: int,
                           n_steps: int = 200, capture_dist: float | None = None,
                           rng=0) -> TEstimate:
    """Monte Carlo estimate of the probability of tending to the target set.

    A sampled orbit counts as tending once it enters the capture region
    (chordal distance <= capture_dist to the target cloud; for target
    "infinity", |z| >= escape radius).  Orbits that neither get captured nor
    settle near a bounded attractor within n_steps are counted "undecided"
    (and as non-tending).
    """
    if n_samples <= 0:
        raise SemigroupError("n_samples must be positive")
    rng = as_rng(rng)
    to_infinity = isinstance(target, str) and target == "infinity"
    if to_infinity:
        if not measure.system.all_polynomial:
            raise SemigroupError('target "infinity" requires a polynomial system')
        radius = measure.system.escape_radius
        settle_tol = 1e-6 if capture_dist is None else capture_dist
    else:
        if capture_dist is None or capture_dist <= 0:
            raise SemigroupError("capture_dist must be positive for a finite target")
        cloud = _target_cloud(target)
        settle_tol = capture_dist

    p0 = sphere(z)
    pts = np.full(n_samples, np.inf + 0j if p0.is_inf else p0.z, dtype=complex)
    captured = np.zeros(n_samples, dtype=bool)
    history = []  # last few states, for the settledness check
    for _ in range(n_steps):
        act = ~captured
        if not np.any(act):
            break
        letters = rng.choice(measure.system.m, size=n_samples, p=measure.weights)
        pts = step_array(measure.system, pts, letters, active=act)
        if to_infinity:
            nonfinite = ~np.isfinite(pts.real) | ~np.isfinite(pts.imag)
            hit = nonfinite | (np.abs(np.where(nonfinite, 0, pts)) >= radius)
        else:
            hit = cloud.distance_to(pts) <= capture_dist
        captured |= act & hit
        history.append(pts.copy())
        history = history[-5:]

    n_hits = int(captured.sum())
    undecided = 0
    if n_hits < n_samples and history:
        last = history[-1]
        open_idx = np.nonzero(~captured)[0]
        settled = np.zeros(len(open_idx), dtype=bool)
        e_last = sphere_embed(last[open_idx])
        for prev in history[:-1]:
            d = np.linalg.norm(e_last - sphere_embed(prev[open_idx]), axis=-1)
            settled |= d <= settle_tol
        undecided = int((~settled).sum())

    p_hat = n_hits / n_samples
    stderr = float(np.sqrt(p_hat * (1.0 - p_hat) / n_samples))
    return TEstimate(p_hat, stderr, n_samples, undecided)
