import numpy as np
import pytest

from conftest import make_dc1, make_single
from coopdyn.fractal import classify_plane_grid, julia_backward_cloud
from coopdyn.grids import GridGeometry
from coopdyn.minimal import find_attracting_minimal_sets
from coopdyn.operator import GridFunction, TransitionStencil, solve_T_fixed_point
from coopdyn.rng import make_rng
from coopdyn.semigroup import sample_word
from coopdyn.takagi import (AnalysisError, analytic_exponents,
                            green_function_value, holder_exponent_estimate,
                            omega_integral_mc, sample_lambda, takagi_series,
                            zeta_field)


@pytest.fixture(scope="module")
def setup256():
    m = make_dc1()
    grid = GridGeometry(n=256)
    sets = find_attracting_minimal_sets(m, grid=grid, rng=1)
    basins = classify_plane_grid(m, sets, grid, rng=2)
    stencil = TransitionStencil(m, basins)
    inf_set = next(s for s in sets if s.is_infinity)
    others = [s for s in sets if not s.is_infinity]
    T = solve_T_fixed_point(m, inf_set, basins, others=others, stencil=stencil)
    return m, grid, basins, stencil, T


def test_zeta_closed_form_values(setup256):
    m, grid, basins, stencil, T = setup256
    zeta = zeta_field(m, T, 0, basins, stencil=stencil)
    assert abs(float(zeta.value_at(np.array([0j]))[0])) <= 1e-6
    assert zeta.value_at_infinity == 0.0
    far = grid.points()[np.abs(grid.points()) >= m.system.escape_radius]
    if far.size:
        assert np.max(np.abs(zeta.value_at(far))) <= 1e-6
    assert np.min(zeta.values) >= -1.0 - 2e-6
    assert np.max(zeta.values) <= 1.0 + 2e-6


def test_takagi_series_residual_and_zero_case(setup256):
    m, grid, basins, stencil, T = setup256
    zeta = zeta_field(m, T, 0, basins, stencil=stencil)
    psi = takagi_series(m, zeta, basins, lam_hat=0.55, stencil=stencil)
    assert psi.residual <= 1e-3
    Mpsi = stencil.apply(psi)
    again = max(float(np.max(np.abs(psi.values - Mpsi.values - zeta.values))),
                abs(psi.value_at_infinity - Mpsi.value_at_infinity
                    - zeta.value_at_infinity))
    assert abs(again - psi.residual) <= 1e-12
    assert abs(float(psi.value_at(np.array([0j]))[0])) <= 1e-6
    assert abs(psi.value_at_infinity) <= 1e-6

    zero = GridFunction(grid, np.zeros((grid.n, grid.n)), 0.0)
    psi0 = takagi_series(m, zero, basins, lam_hat=0.55, stencil=stencil)
    assert np.max(np.abs(psi0.values)) == 0.0


def test_green_closed_forms():
    single = make_single([0, 0, 1])
    word = sample_word(single, 40, make_rng(1))
    assert green_function_value(single.system, word, 2.0 + 0j, 40) \
        == pytest.approx(np.log(2.0), rel=1e-12)
    assert green_function_value(single.system, word, 0.5 + 0j, 40) == 0.0
    assert green_function_value(single.system, word, 1e20 + 0j, 40) \
        == pytest.approx(np.log(1e20), rel=1e-12)


def test_green_monotone_on_ray():
    single = make_single([0, 0, 1])
    word = sample_word(single, 40, make_rng(1))
    ys = np.linspace(1.1, 8.0, 20)
    gs = [green_function_value(single.system, word, complex(y), 40) for y in ys]
    assert all(a < b for a, b in zip(gs, gs[1:]))


def test_green_word_independent_for_single_map():
    single = make_single([0, 0, 1])
    w1 = sample_word(single, 40, make_rng(1))
    w2 = sample_word(single, 40, make_rng(2))
    v1 = green_function_value(single.system, w1, 1.5 + 0.5j, 40)
    v2 = green_function_value(single.system, w2, 1.5 + 0.5j, 40)
    assert v1 == v2


def test_omega_single_map_is_zero_and_dc1_nonnegative():
    single = make_single([0, 0, 1])
    est, se = omega_integral_mc(single, 50, 40, rng=make_rng(2))
    assert est == 0.0 and se == 0.0
    m = make_dc1()
    est, se = omega_integral_mc(m, 100, 40, rng=make_rng(2))
    assert est >= 0.0


def test_omega_stderr_sqrt_n_scaling():
    # nontrivial variance needs escaping critical orbits; tilt a quadratic
    # pair so some critical values wander
    from conftest import make_measure
    m = make_measure([[0.26, 0, 1], [-1.77, 0, 1]], (0.5, 0.5))
    _, se1 = omega_integral_mc(m, 200, 40, rng=make_rng(3))
    _, se4 = omega_integral_mc(m, 800, 40, rng=make_rng(4))
    assert se1 > 0.0
    assert 0.7 * 0.5 <= se4 / se1 <= 1.3 * 0.5


def test_exponent_formula_and_permutation_invariance():
    m = make_dc1()
    rep = analytic_exponents(m, (0.0, 0.0))
    assert rep.u_value == 0.5
    assert rep.dimH_lambda == 1.5
    swapped = analytic_exponents(m.permuted([1, 0]), (0.0, 0.0))
    assert swapped.u_value == rep.u_value
    with pytest.raises(AnalysisError):
        analytic_exponents(m, (-10.0, 0.0))


def test_sample_lambda_determinism_and_support():
    m = make_dc1()
    c1 = sample_lambda(m, 400, rng=make_rng(5))
    c2 = sample_lambda(m, 400, rng=make_rng(5))
    assert np.array_equal(c1.points, c2.points)
    ref = julia_backward_cloud(m, 5000, rng=6)
    grid = GridGeometry(n=256)
    d = ref.distance_to(c1.finite_points())
    assert np.max(d) <= 2.0 * np.sqrt(2.0) * grid.cell


def test_sample_lambda_uniform_angles_for_squaring():
    single = make_single([0, 0, 1])
    cloud = sample_lambda(single, 4000, rng=make_rng(7))
    ang = np.angle(cloud.finite_points())
    counts, _ = np.histogram(ang, bins=16, range=(-np.pi, np.pi))
    n, k = ang.size, 16
    sigma = np.sqrt(n * (1.0 / k) * (1.0 - 1.0 / k))
    assert np.max(np.abs(counts - n / k)) <= 4.0 * sigma


def test_holder_constructed_exponents(setup256):
    m, grid, basins, stencil, T = setup256
    z0 = 0.3 + 0.2j
    d = np.abs(grid.points() - z0)
    cusp = GridFunction(grid, np.sqrt(d))
    assert 0.4 <= holder_exponent_estimate(cusp, z0) <= 0.6
    smooth = GridFunction(grid, grid.points().real)
    assert holder_exponent_estimate(smooth, z0) >= 0.9
    with pytest.raises(AnalysisError):
        holder_exponent_estimate(smooth, complex(grid.half_width * 0.999, 0.0))
