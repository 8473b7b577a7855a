import numpy as np
import pytest

from coopdyn.clouds import PointCloud, sphere_embed
from coopdyn.grids import GridError, GridGeometry


def test_sphere_embedding_radius():
    z = np.array([0j, 1 + 0j, 3 - 4j, np.inf + 0j])
    xyz = sphere_embed(z)
    # diameter-2 sphere centered at (0, 0, 0.. ) pole convention: all points
    # at unit distance from the center
    center = np.array([0.0, 0.0, 0.0])
    assert np.allclose(np.linalg.norm(xyz - center, axis=1), 1.0)
    assert np.allclose(xyz[-1], [0, 0, 1])


def test_embedding_distance_is_chordal():
    from coopdyn.geometry import chordal_distance, sphere
    z = np.array([0.5 + 0.2j, -3 + 1j])
    xyz = sphere_embed(z)
    d = np.linalg.norm(xyz[0] - xyz[1])
    assert d == pytest.approx(chordal_distance(sphere(z[0]), sphere(z[1])))


def test_point_cloud_distance_and_resolution():
    cloud = PointCloud(np.exp(1j * np.linspace(0, 2 * np.pi, 200, endpoint=False)))
    d = cloud.distance_to(np.array([0j]))
    assert d[0] == pytest.approx(np.sqrt(2), rel=1e-3)
    assert cloud.nn_distance() < 0.05


def test_point_cloud_weights_validation():
    with pytest.raises(ValueError):
        PointCloud(np.array([0j, 1j]), weights=np.array([0.7, 0.4]))


def test_grid_geometry_basics():
    g = GridGeometry(center=1 + 1j, half_width=2.0, n=8)
    assert g.cell == pytest.approx(0.5)
    pts = g.points()
    assert pts.shape == (8, 8)
    assert pts[0, 0] == pytest.approx(1 + 1j + (-1.75 - 1.75j))
    assert g.contains(np.array([1 + 1j]))[0]
    assert not g.contains(np.array([4 + 1j]))[0]
    assert not g.contains(np.array([np.inf + 0j]))[0]
    with pytest.raises(GridError):
        GridGeometry(n=1)


def test_cell_index_roundtrip():
    g = GridGeometry(half_width=4.0, n=64)
    pts = g.points()
    iy, ix = g.cell_index(pts.ravel())
    assert np.array_equal(iy * 64 + ix, np.arange(64 * 64))


def test_bilinear_interp_reproduces_linear_functions():
    g = GridGeometry(half_width=3.0, n=32)
    vals = g.points().real + 2 * g.points().imag
    probe = np.array([0.1 + 0.2j, -1.3 + 2.0j, 2.9 - 2.9j])
    out = g.interp(vals, probe)
    assert np.allclose(out, probe.real + 2 * probe.imag, atol=1e-12)


def test_capture_tolerance_scales_with_cell():
    g1 = GridGeometry(n=256)
    g2 = GridGeometry(n=512)
    assert g1.capture_tol == pytest.approx(2 * g2.capture_tol)
