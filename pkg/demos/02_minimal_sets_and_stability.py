"""Discover minimal sets and test mean stability for three contrasting systems.

1. The reference degree-4 pair: two attracting minimal sets ({0} and infinity),
   mean stable.
2. A single map z^2: the repelling fixed point 1 is a forward-invariant
   singleton touching the Julia set, so the system is not mean stable.
3. A quadratic with a Siegel disk paired with a tiny cubic: the finite minimal
   set lives inside the rotation domain (sub-rotative), again not mean stable.
"""

import numpy as np

from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.minimal import find_attracting_minimal_sets, test_mean_stability
from coopdyn.semigroup import build_semigroup

grid = GridGeometry(half_width=4.0, n=256)


def report(name, measure, grid):
    sets = find_attracting_minimal_sets(measure, grid=grid, rng=1)
    tags = ["infinity" if s.is_infinity else
            f"{len(s.cloud)} pts near {s.cloud.finite_points()[0]:.3f}"
            for s in sets]
    rep = test_mean_stability(measure, grid, rng=1)
    print(f"{name}: {len(sets)} minimal sets ({'; '.join(tags)})")
    print(f"  mean stable: {rep.verdict}", end="")
    if rep.counterexample is not None:
        print(f"  (counterexample: {rep.counterexample.classification})")
    else:
        print()


report("reference pair",
       build_semigroup([RationalMap([0, 0, -2, 0, 1]),
                        RationalMap([0, 0, 0, 0, 1.0 / 64.0])], [0.5, 0.5]),
       grid)

report("single z^2",
       build_semigroup([RationalMap([0, 0, 1])], [1.0]),
       grid)

lam = np.exp(2j * np.pi * (np.sqrt(5.0) - 1.0) / 2.0)
report("Siegel + contraction",
       build_semigroup([RationalMap([0, lam, 1]),
                        RationalMap([0, 0, 0, 1e-4])], [0.5, 0.5]),
       GridGeometry(half_width=2.0, n=256))
