"""coopdyn: simulation and numerical analysis of i.i.d. random dynamics of
rational maps on the Riemann sphere.

Core objects: rational maps and sphere geometry (`geometry`), generator
systems and random words (`semigroup`), Julia-set sampling and plane
classification (`fractal`), minimal sets and mean-stability tests
(`minimal`), the grid transition operator and its fixed points (`operator`),
complex Takagi functions and analytic exponents (`takagi`), and exact 1-D
singular-function oracles (`oracle1d`).
"""

__version__ = "0.1.0"

from .geometry import (INF, RationalMap, SpherePoint, chordal_distance,
                       compose, critical_points, eval_map, polynomial,
                       preimages, sphere, spherical_derivative_norm)
from .semigroup import (DiscreteMeasure, GeneratorSystem, RandomWord,
                        build_semigroup, estimate_T_monte_carlo,
                        forward_orbit, sample_word)
from .clouds import PointCloud
from .rng import make_rng

__all__ = [
    "INF", "RationalMap", "SpherePoint", "chordal_distance", "compose",
    "critical_points", "eval_map", "polynomial", "preimages", "sphere",
    "spherical_derivative_norm", "DiscreteMeasure", "GeneratorSystem",
    "RandomWord", "build_semigroup", "estimate_T_monte_carlo",
    "forward_orbit", "sample_word", "PointCloud", "make_rng",
]
