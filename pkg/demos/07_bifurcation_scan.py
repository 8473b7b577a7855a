"""Bifurcation along a nested quadratic family.

Sample z^2 + c at three c-values on a circle of radius 0.9 R.  For small R all
maps are near z^2 and two minimal sets coexist ({finite attractor}, infinity);
once R reaches outside the Mandelbrot set every finite orbit can be flushed to
infinity and only one minimal set survives.  Counts are non-increasing along
the nested family.
"""

import numpy as np

from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.minimal import scan_family_bifurcation
from coopdyn.semigroup import DiscreteMeasure, GeneratorSystem

family = []
for t, R in zip((0.0, 0.5, 1.0), (0.05, 0.1, 2.5)):
    cs = [0.9 * R * np.exp(2j * np.pi * j / 3) for j in range(3)]
    maps = tuple(RationalMap([c, 0, 1]) for c in cs)
    family.append((t, DiscreteMeasure(GeneratorSystem(maps),
                                      (1 / 3, 1 / 3, 1 / 3))))

res = scan_family_bifurcation(family, GridGeometry(half_width=4.0, n=512),
                              rng_seed=7, nested_supports=True)
print(f"{'t':>4}  {'minimal sets':>12}  {'mean stable':>11}")
for row in res.rows:
    print(f"{row.t:>4}  {row.n_minimal_sets:>12}  {row.verdict:>11}")
for w in res.warnings:
    print("warning:", w)
