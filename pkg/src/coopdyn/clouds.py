"""Weighted sphere-point samples (Julia set / lambda-measure approximations)."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .geometry import INF, SpherePoint, sphere


class CloudError(ValueError):
    pass


def sphere_embed(z: np.ndarray, inf_mask=None) -> np.ndarray:
    """Embed complex points into R^3 on the radius-1 sphere (chordal/2 = chord)."""
    z = np.asarray(z, dtype=complex)
    if inf_mask is None:
        inf_mask = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
    zz = np.where(inf_mask, 0, z)
    s = 1.0 + np.abs(zz) ** 2
    x = 2.0 * zz.real / s
    y = 2.0 * zz.imag / s
    w = (np.abs(zz) ** 2 - 1.0) / s
    x = np.where(inf_mask, 0.0, x)
    y = np.where(inf_mask, 0.0, y)
    w = np.where(inf_mask, 1.0, w)
    return np.stack([x, y, w], axis=-1)


def chordal_to_cloud(z: np.ndarray, cloud_xyz: np.ndarray, tree: cKDTree | None = None) -> np.ndarray:
    """Min chordal distance from each point of `z` to the embedded cloud.

    Chordal distance equals the R^3 chord length in the diameter-2 embedding.
    """
    pts = sphere_embed(z)
    if tree is None:
        tree = cKDTree(cloud_xyz)
    d, _ = tree.query(pts.reshape(-1, 3), k=1)
    return d.reshape(np.shape(z))


class PointCloud:
    """A finite weighted sample of sphere points.

    `points` is a complex array; `inf_mask` marks samples at infinity.
    Provenance is one of "julia", "lambda", "postcritical", or "custom".
    """

    def __init__(self, points, weights=None, provenance="custom", inf_mask=None):
        self.points = np.asarray(points, dtype=complex)
        if self.points.size == 0:
            raise CloudError("point cloud must be nonempty")
        if inf_mask is None:
            inf_mask = ~np.isfinite(self.points.real) | ~np.isfinite(self.points.imag)
        self.inf_mask = np.asarray(inf_mask, dtype=bool)
        self.points = np.where(self.inf_mask, np.inf + 0j, self.points)
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != self.points.shape or np.any(weights < 0):
                raise CloudError("weights must be nonnegative and match points")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise CloudError("weights must sum to 1 within 1e-12")
        self.weights = weights
        self.provenance = provenance
        self._xyz = sphere_embed(self.points, self.inf_mask)
        self._tree = cKDTree(self._xyz)

    def __len__(self):
        return len(self.points)

    def distance_to(self, z) -> np.ndarray:
        """Min chordal distance from point(s) z to this cloud."""
        if isinstance(z, SpherePoint):
            z = np.inf + 0j if z.is_inf else z.z
        return chordal_to_cloud(np.asarray(z, dtype=complex), self._xyz, self._tree)

    def nn_distance(self) -> float:
        """Median nearest-neighbor chordal distance (cloud resolution estimate)."""
        if len(self.points) < 2:
            return 0.0
        d, _ = self._tree.query(self._xyz, k=2)
        return float(np.median(d[:, 1]))

    def finite_points(self) -> np.ndarray:
        return self.points[~self.inf_mask]

    def sphere_points(self) -> list[SpherePoint]:
        return [INF if m else sphere(z) for z, m in zip(self.points, self.inf_mask)]

    def __repr__(self):
        return f"PointCloud({len(self)} pts, {self.provenance})"
