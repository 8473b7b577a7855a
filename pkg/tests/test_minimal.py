import numpy as np
import pytest

from conftest import make_dc1, make_single
from coopdyn.fractal import julia_backward_cloud
from coopdyn.geometry import RationalMap
from coopdyn.grids import GridGeometry
from coopdyn.minimal import (classify_minimal_set, find_attracting_minimal_sets,
                             hausdorff_chordal, period_structure,
                             scan_family_bifurcation)
from coopdyn.minimal import test_mean_stability as mean_stability
from coopdyn.semigroup import DiscreteMeasure, GeneratorSystem

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def make_siegel():
    # quadratic with a Siegel disk at 0 (golden rotation number) paired with
    # a strongly contracting cubic pinning the disk
    lam = np.exp(2j * np.pi * GOLDEN)
    h1 = RationalMap([0, lam, 1])
    h2 = RationalMap([0, 0, 0, 1e-4])
    return DiscreteMeasure(GeneratorSystem((h1, h2)), (0.5, 0.5))


def test_dc1_minimal_sets_small_grid():
    m = make_dc1()
    grid = GridGeometry(n=128)
    sets = find_attracting_minimal_sets(m, grid=grid, rng=1)
    assert len(sets) == 2
    finite = [s for s in sets if not s.is_infinity]
    assert len(finite) == 1
    assert np.max(np.abs(finite[0].cloud.finite_points())) < grid.capture_tol
    assert finite[0].period == 1


def test_period_two_cycle_of_basilica():
    single = make_single([-1, 0, 1])
    grid = GridGeometry(n=128)
    sets = find_attracting_minimal_sets(single, grid=grid, rng=1)
    finite = [s for s in sets if not s.is_infinity]
    assert len(finite) == 1
    L = finite[0]
    pts = sorted(L.cloud.finite_points(), key=lambda z: z.real)
    assert np.allclose(pts, [-1.0, 0.0], atol=1e-8)
    period, comps = period_structure(single, L)
    assert period == 2
    assert len(comps) == 2


def test_infinity_set_has_period_one():
    m = make_dc1()
    sets = find_attracting_minimal_sets(m, grid=GridGeometry(n=64), rng=1)
    inf_sets = [s for s in sets if s.is_infinity]
    assert len(inf_sets) == 1
    assert inf_sets[0].period == 1


def test_classify_j_touching_fixed_point():
    single = make_single([0, 0, 1])
    cloud = julia_backward_cloud(single, 2000, rng=1)
    from coopdyn.clouds import PointCloud
    from coopdyn.minimal import MinimalSetEstimate
    L = MinimalSetEstimate(PointCloud(np.array([1.0 + 0j])))
    assert classify_minimal_set(single, L, cloud, rng=2) == "j_touching"


def test_mean_stability_dc1_true():
    m = make_dc1()
    rep = mean_stability(m, GridGeometry(n=128), rng=1)
    assert rep.verdict == "true"
    assert rep.witness is not None
    assert rep.witness.U.any() and rep.witness.V.any()


def test_mean_stability_single_map_false():
    single = make_single([0, 0, 1])
    rep = mean_stability(single, GridGeometry(n=128), rng=1)
    assert rep.verdict == "false"
    assert rep.counterexample is not None
    assert rep.counterexample.classification == "j_touching"


def test_mean_stability_siegel_false():
    m = make_siegel()
    rep = mean_stability(m, GridGeometry(half_width=2.0, n=128), rng=1)
    assert rep.verdict == "false"
    assert rep.counterexample is not None
    assert rep.counterexample.classification == "sub_rotative"


def test_hausdorff_distance_sanity():
    a = np.array([0j, 1 + 0j])
    b = np.array([0j, 1 + 0j, 1 + 0j])
    assert hausdorff_chordal(a, a) == 0.0
    assert hausdorff_chordal(a, b) == pytest.approx(0.0, abs=1e-12)
    c = np.array([0j])
    d = np.array([1 + 0j])
    assert hausdorff_chordal(c, d) == pytest.approx(np.sqrt(2), rel=1e-9)


def test_constant_family_scan_is_constant():
    m = make_dc1()
    family = [(0.0, m), (0.5, m), (1.0, m)]
    res = scan_family_bifurcation(family, GridGeometry(n=128), rng_seed=3)
    counts = [r.n_minimal_sets for r in res.rows]
    verdicts = [r.verdict for r in res.rows]
    assert counts == [counts[0]] * 3
    assert verdicts == [verdicts[0]] * 3
