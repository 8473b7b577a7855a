"""The complex Takagi function: the weight-derivative of T as a Neumann series.

T depends real-analytically on the generator weights.  Its partial derivative
in the first weight (pivoting on the last) solves (I - M) psi = zeta with
zeta = T o h_1 - T o h_m, so psi = sum_n M^n zeta.  The partial sums converge
geometrically at the operator's contraction rate; we verify the functional
equation and a central-difference probe.
"""

from pathlib import Path

import numpy as np

from coopdyn.fractal import classify_plane_grid
from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.io import write_pgm16
from coopdyn.minimal import find_attracting_minimal_sets
from coopdyn.operator import TransitionStencil, solve_T_fixed_point
from coopdyn.semigroup import DiscreteMeasure, build_semigroup
from coopdyn.takagi import finite_difference_check, takagi_series, zeta_field

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

measure = build_semigroup([RationalMap([0, 0, -2, 0, 1]),
                           RationalMap([0, 0, 0, 0, 1.0 / 64.0])], [0.5, 0.5])
grid = GridGeometry(half_width=4.0, n=512)

sets = find_attracting_minimal_sets(measure, grid=grid, rng=1)
basins = classify_plane_grid(measure, sets, grid, rng=2)
stencil = TransitionStencil(measure, basins)
inf_set = next(s for s in sets if s.is_infinity)
others = [s for s in sets if not s.is_infinity]
T = solve_T_fixed_point(measure, inf_set, basins, others=others,
                        stencil=stencil)

zeta = zeta_field(measure, T, 0, basins, stencil=stencil)
psi = takagi_series(measure, zeta, basins, lam_hat=0.55, stencil=stencil)
print(f"series: {psi.n_terms} terms, residual ||(I-M)psi - zeta|| = "
      f"{psi.residual:.2e}")
print(f"psi(0) = {float(psi.value_at(np.array([0j]))[0]):.2e}, "
      f"psi(inf) = {psi.value_at_infinity:.2e}")

write_pgm16(OUT / "takagi_psi.pgm", psi.values)
print("wrote", OUT / "takagi_psi.pgm")

# central-difference probe of dT/da at a handful of classified cells
classified = np.nonzero(basins.labels.ravel() >= 0)[0]
picks = classified[np.linspace(0, classified.size - 1, 9).astype(int)]
probes = grid.points().ravel()[picks]
family = lambda w: DiscreteMeasure(measure.system, tuple(w))
dev = finite_difference_check(family, [0.5, 0.5], "infinity", 0, 1e-3,
                              probes, basins, psi, stencil=stencil)
print(f"max |finite difference - psi| over {probes.size} probes: {dev:.2e}")
