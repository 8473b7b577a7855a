import numpy as np
import pytest

import coopdyn.oracle1d as oracle1d
import coopdyn.takagi as takagi_mod
from coopdyn.oracle1d import (OracleError, RealAffineSystem, devils_staircase,
                              doubling_system, lebesgue_singular,
                              real_parameter_derivative, real_random_T,
                              takagi_classic, ternary_system)
from coopdyn.series import NeumannTruncation, SeriesDivergenceError


def test_lebesgue_singular_known_values():
    for a in (0.2, 0.5, 0.73):
        assert lebesgue_singular(a, 0.5) == pytest.approx(a, abs=1e-15)
        assert lebesgue_singular(a, 0.0) == 0.0
        assert lebesgue_singular(a, 1.0) == 1.0
    xs = np.linspace(0, 1, 2049)
    assert np.max(np.abs(lebesgue_singular(0.5, xs) - xs)) <= 1e-12
    with pytest.raises(OracleError):
        lebesgue_singular(0.5, 1.5)
    with pytest.raises(OracleError):
        lebesgue_singular(1.0, 0.5)


def test_lebesgue_monotone_and_functional_equation():
    xs = np.linspace(0, 1, 1025)
    vals = lebesgue_singular(0.3, xs)
    assert np.all(np.diff(vals) >= 0)
    # L_a(x) = a L_a(2x) on the left half, exactly at dyadics
    left = xs[xs <= 0.5]
    assert np.max(np.abs(lebesgue_singular(0.3, left)
                         - 0.3 * lebesgue_singular(0.3, 2 * left))) <= 1e-12


def test_takagi_classic_known_values():
    assert takagi_classic(0.5) == 0.5
    assert takagi_classic(1.0 / 3.0, 60) == pytest.approx(2.0 / 3.0, abs=1e-15)
    xs = np.linspace(0, 1, 513)
    assert np.max(np.abs(takagi_classic(xs) - takagi_classic(1 - xs))) <= 1e-12


def test_devils_staircase_known_values():
    assert devils_staircase(0.5) == 0.5
    assert devils_staircase(1.0 / 3.0) == pytest.approx(0.5, abs=1e-15)
    xs = np.linspace(0, 1, 1025)
    assert np.all(np.diff(devils_staircase(xs)) >= -1e-15)


def test_real_random_T_matches_closed_forms():
    xs = np.linspace(0, 1, 1025)
    for a in (0.3, 0.5, 0.8):
        sys_a = doubling_system(a)
        got = real_random_T(sys_a, xs)
        assert np.max(np.abs(got - lebesgue_singular(a, xs))) <= 1e-10
    assert real_random_T(doubling_system(0.5), -0.2) == 0.0
    assert real_random_T(doubling_system(0.5), 1.2) == 1.0
    got = real_random_T(ternary_system(), xs)
    assert np.max(np.abs(got - devils_staircase(xs))) == 0.0


def test_real_random_T_monte_carlo_agrees():
    sys_a = doubling_system(0.4)
    x = 0.37
    exact = real_random_T(sys_a, x)
    mc = real_random_T(sys_a, x, mode="monte-carlo", n_samples=20000, rng=5)
    assert abs(mc - exact) <= 0.02


def test_system_validation():
    with pytest.raises(OracleError):
        RealAffineSystem(((0.5, 0.0),), (1.0,), (0.0, 1.0))  # not expanding
    with pytest.raises(OracleError):
        RealAffineSystem(((2.0, 0.0), (2.0, -1.0)), (0.6, 0.6), (0.0, 1.0))


def test_parameter_derivative_series_vs_finite_difference():
    xs = np.linspace(0, 1, 257)
    series = real_parameter_derivative(xs, depth=40)
    fd = real_parameter_derivative(xs, mode="finite-difference", delta=1e-4)
    assert np.max(np.abs(series - fd)) <= 1e-4
    assert real_parameter_derivative(np.array([0.0]))[0] == 0.0


def test_shared_truncation_logic():
    # the 1-D series and the grid series use one truncation implementation
    assert oracle1d.NeumannTruncation is takagi_mod.NeumannTruncation
    assert oracle1d.NeumannTruncation is NeumannTruncation

    # identical stopping decisions on a synthetic decaying tail
    sups = [0.5 ** n for n in range(30)]
    t1 = NeumannTruncation(0.5, 1e-6)
    t2 = NeumannTruncation(0.5, 1e-6)
    decisions = [(t1.should_stop(s), t2.should_stop(s)) for s in sups]
    assert all(a == b for a, b in decisions)
    assert any(a for a, _ in decisions)
    assert t1.tail_bound(0.25) == 0.25 / (1 - 0.5)


def test_divergence_error_on_flat_tail():
    trunc = NeumannTruncation(0.5, 1e-12, max_flat=50)
    with pytest.raises(SeriesDivergenceError):
        for _ in range(60):
            trunc.should_stop(1.0)
