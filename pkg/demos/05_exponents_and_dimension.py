"""Analytic exponents: the Hoelder exponent of T and dim_H of the maximal
relative entropy measure.

u = entropy / (expected log-degree + Omega), where Omega averages Green's
function values over critical orbits of random words.  For the reference pair
every critical orbit stays bounded, so Omega = 0 exactly and u = 1/2,
dim_H(lambda) = 3/2.  We confirm the median pointwise Hoelder estimate of
T along lambda-distributed points agrees with u.
"""

import numpy as np

from coopdyn.fractal import classify_plane_grid
from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.minimal import find_attracting_minimal_sets
from coopdyn.operator import TransitionStencil, solve_T_fixed_point
from coopdyn.rng import make_rng
from coopdyn.semigroup import build_semigroup
from coopdyn.takagi import (analytic_exponents, holder_exponent_estimate,
                            omega_integral_mc, sample_lambda)

measure = build_semigroup([RationalMap([0, 0, -2, 0, 1]),
                           RationalMap([0, 0, 0, 0, 1.0 / 64.0])], [0.5, 0.5])

omega = omega_integral_mc(measure, 400, 60, rng=make_rng(1))
report = analytic_exponents(measure, omega)
print(f"Omega integral: {report.omega_integral:.3e} +- {report.omega_stderr:.3e}")
print(f"u = {report.u_value:.4f} +- {report.u_stderr:.1e}")
print(f"dim_H(lambda) = {report.dimH_lambda:.4f} +- {report.dimH_stderr:.1e}")

grid = GridGeometry(half_width=4.0, n=512)
sets = find_attracting_minimal_sets(measure, grid=grid, rng=1)
basins = classify_plane_grid(measure, sets, grid, rng=2)
stencil = TransitionStencil(measure, basins)
inf_set = next(s for s in sets if s.is_infinity)
others = [s for s in sets if not s.is_infinity]
T = solve_T_fixed_point(measure, inf_set, basins, others=others,
                        stencil=stencil)

cloud = sample_lambda(measure, 500, rng=make_rng(2))
margin = grid.cell * 64
ests = []
for z, at_inf in zip(cloud.points, cloud.inf_mask):
    if at_inf or max(abs(z.real), abs(z.imag)) > grid.half_width - margin:
        continue
    ests.append(holder_exponent_estimate(T, z))
    if len(ests) == 100:
        break
print(f"median Hoelder estimate over {len(ests)} lambda-points: "
      f"{np.median(ests):.4f}  (analytic u = {report.u_value:.4f})")
