import time

import numpy as np
import pytest

from coopdyn.fractal import (classify_plane_grid, julia_backward_cloud,
                             kernel_julia_probe)
from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.minimal import find_attracting_minimal_sets, test_mean_stability
from coopdyn.operator import TransitionStencil, solve_T_fixed_point
from coopdyn.semigroup import build_semigroup


def make_dc1():
    """h1 = z^4 - 2z^2 (the doubled basilica map), h2 = z^4/64, equal weights."""
    return build_semigroup([RationalMap([0, 0, -2, 0, 1]),
                            RationalMap([0, 0, 0, 0, 1.0 / 64.0])], [0.5, 0.5])


def make_single(coeffs):
    return build_semigroup([RationalMap(coeffs)], [1.0])


def make_measure(coeff_list, weights):
    return build_semigroup([RationalMap(c) for c in coeff_list], list(weights))


@pytest.fixture(scope="session")
def dc1():
    return make_dc1()


@pytest.fixture(scope="session")
def dc1_pipeline(dc1):
    """Full discovery/classification pipeline at 1024^2, with wall time."""
    grid = GridGeometry(n=1024)
    t0 = time.monotonic()
    sets = find_attracting_minimal_sets(dc1, grid=grid, rng=1)
    stability = test_mean_stability(dc1, grid, rng=3)
    julia = julia_backward_cloud(dc1, 20000, rng=4)
    basins = classify_plane_grid(dc1, sets, grid, rng=2)
    probe = kernel_julia_probe(dc1, julia, basins, word_depth=20, rng=5)
    elapsed = time.monotonic() - t0
    return {"grid": grid, "sets": sets, "stability": stability,
            "julia": julia, "basins": basins, "probe": probe,
            "elapsed": elapsed}


@pytest.fixture(scope="session")
def dc1_fields(dc1, dc1_pipeline):
    """Solved T functions and stencil on the shared 1024^2 grid."""
    basins = dc1_pipeline["basins"]
    stencil = TransitionStencil(dc1, basins)
    T_inf = solve_T_fixed_point(dc1, "infinity", basins, stencil=stencil)
    finite = [s for s in dc1_pipeline["sets"] if not s.is_infinity]
    T_zero = solve_T_fixed_point(dc1, finite[0], basins, stencil=stencil)
    return {"stencil": stencil, "T_inf": T_inf, "T_zero": T_zero,
            "L_zero": finite[0]}


def probe_lattice(extent: float = 2.8, side: int = 5) -> np.ndarray:
    ax = np.linspace(-extent, extent, side)
    return (ax[None, :] + 1j * ax[:, None]).ravel()
