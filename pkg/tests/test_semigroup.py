import numpy as np
import pytest

from conftest import make_dc1, make_single
from coopdyn.geometry import INF, RationalMap, eval_map, sphere
from coopdyn.rng import make_rng
from coopdyn.semigroup import (DiscreteMeasure, GeneratorSystem,
                               SemigroupError, escape_radius_poly,
                               estimate_T_monte_carlo, forward_orbit,
                               sample_word, step_array)


def test_escape_radius_guarantees_doubling():
    for coeffs in ([0, 0, 1], [0, 0, -2, 0, 1], [0, 0, 0, 0, 1.0 / 64.0]):
        h = RationalMap(coeffs)
        R = escape_radius_poly(h)
        for ang in np.linspace(0, 2 * np.pi, 7):
            z = R * np.exp(1j * ang)
            assert abs(h.eval_array(np.array([z]))[0]) >= 2 * abs(z)


def test_system_escape_radius_is_max():
    m = make_dc1()
    assert m.system.escape_radius == max(
        escape_radius_poly(h) for h in m.system.generators)


def test_measure_validation():
    h1, h2 = RationalMap([0, 0, 1]), RationalMap([-1, 0, 1])
    with pytest.raises(SemigroupError):
        DiscreteMeasure(GeneratorSystem((h1, h2)), (0.7, 0.4))
    with pytest.raises(SemigroupError):
        DiscreteMeasure(GeneratorSystem((h1, h2)), (1.0, 0.0))
    with pytest.raises(SemigroupError):
        GeneratorSystem((h1, h1))


def test_permuted_measure_swaps_consistently():
    m = make_dc1()
    p = m.permuted([1, 0])
    assert p.weights == m.weights[::-1]
    assert p.system.generators == m.system.generators[::-1]


def test_word_sampling_deterministic():
    m = make_dc1()
    w1 = sample_word(m, 20, make_rng(5))
    w2 = sample_word(m, 20, make_rng(5))
    assert w1 == w2


def test_forward_orbit_matches_step_array():
    m = make_dc1()
    word = sample_word(m, 15, make_rng(9))
    orbit = forward_orbit(m.system, word, 0.4 + 0.3j)
    z = np.array([0.4 + 0.3j])
    for k, j in enumerate(word.letters):
        z = step_array(m.system, z, np.array([j]))
        p = orbit[k + 1]
        if p.is_inf:
            assert not np.isfinite(z[0].real)
        else:
            assert z[0] == pytest.approx(p.z, rel=1e-9, abs=1e-9)


def test_step_array_handles_infinity():
    m = make_dc1()
    z = np.array([np.inf + 0j, 1.0 + 0j])
    out = step_array(m.system, z, np.array([0, 0]))
    assert not np.isfinite(out[0].real)
    assert out[1] == pytest.approx(-1.0)


def test_monte_carlo_T_closed_forms():
    single = make_single([0, 0, 1])
    far = estimate_T_monte_carlo(single, "infinity", 3.0 + 0j, 500, rng=1)
    assert far.estimate == 1.0 and far.stderr == 0.0
    inner = estimate_T_monte_carlo(single, "infinity", 0.25 + 0j, 500, rng=2)
    assert inner.estimate == 0.0


def test_monte_carlo_T_midrange_probability():
    m = make_dc1()
    est = estimate_T_monte_carlo(m, "infinity", 1.0 + 0.5j, 4000, rng=3)
    assert 0.0 < est.estimate < 1.0
    assert est.stderr > 0.0
    again = estimate_T_monte_carlo(m, "infinity", 1.0 + 0.5j, 4000, rng=3)
    assert est.estimate == again.estimate
