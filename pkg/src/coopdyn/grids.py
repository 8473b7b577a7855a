"""Square plane grids: geometry, bilinear interpolation, capture tolerance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridGeometry:
    """An n x n grid of cell centers covering the square |Re z - cx|, |Im z - cy| <= half_width."""

    center: complex = 0j
    half_width: float = 4.0
    n: int = 1024

    def __post_init__(self):
        if self.n < 2:
            raise GridError("grid resolution must be >= 2")
        if self.half_width <= 0:
            raise GridError("half_width must be positive")

    @property
    def cell(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def capture_tol(self) -> float:
        """Default set-membership tolerance: two cell diagonals, in chordal units.

        The chordal metric scales planar distance by at most 2 (at the origin),
        so 2 * sqrt(2) * cell planar becomes 4 * sqrt(2) * cell chordal.
        """
        return 4.0 * np.sqrt(2.0) * self.cell

    def axis(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n) + 0.5) * self.cell

    def points(self) -> np.ndarray:
        """Complex cell centers, shape (n, n); [iy, ix] = center + x[ix] + i*y[iy]."""
        ax = self.axis()
        return self.center + ax[None, :] + 1j * ax[:, None]

    def contains(self, z: np.ndarray) -> np.ndarray:
        w = z - self.center
        finite = np.isfinite(z.real) & np.isfinite(z.imag)
        wr = np.where(finite, w.real, 0.0)
        wi = np.where(finite, w.imag, 0.0)
        return finite & (np.abs(wr) <= self.half_width) & (np.abs(wi) <= self.half_width)

    def cell_index(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest-cell indices (iy, ix), clipped to the grid."""
        w = np.asarray(z) - self.center
        ix = np.clip(((w.real + self.half_width) / self.cell - 0.5).round(), 0, self.n - 1)
        iy = np.clip(((w.imag + self.half_width) / self.cell - 0.5).round(), 0, self.n - 1)
        return iy.astype(np.int64), ix.astype(np.int64)

    def bilinear_stencil(self, z: np.ndarray):
        """Flat indices (4, N) and weights (4, N) for bilinear reads at points z.

        Points outside the cell-center hull are clamped (constant extension
        within the boundary half-cell); callers decide what out-of-square
        points mean before calling this.
        """
        z = np.asarray(z, dtype=complex).ravel()
        w = z - self.center
        fx = (w.real + self.half_width) / self.cell - 0.5
        fy = (w.imag + self.half_width) / self.cell - 0.5
        fx = np.clip(fx, 0.0, self.n - 1.0)
        fy = np.clip(fy, 0.0, self.n - 1.0)
        x0 = np.floor(fx).astype(np.int64)
        y0 = np.floor(fy).astype(np.int64)
        x0 = np.minimum(x0, self.n - 2)
        y0 = np.minimum(y0, self.n - 2)
        tx = fx - x0
        ty = fy - y0
        idx = np.empty((4, z.size), dtype=np.int64)
        wt = np.empty((4, z.size), dtype=np.float64)
        idx[0] = y0 * self.n + x0
        idx[1] = y0 * self.n + x0 + 1
        idx[2] = (y0 + 1) * self.n + x0
        idx[3] = (y0 + 1) * self.n + x0 + 1
        wt[0] = (1 - tx) * (1 - ty)
        wt[1] = tx * (1 - ty)
        wt[2] = (1 - tx) * ty
        wt[3] = tx * ty
        return idx, wt

    def interp(self, values: np.ndarray, z) -> np.ndarray:
        """Bilinear read of a (n, n) value array at complex point(s) z."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        idx, wt = self.bilinear_stencil(zz)
        flat = values.ravel()
        out = (flat[idx] * wt).sum(axis=0)
        return out.reshape(np.shape(z)) if np.shape(z) else out[0]
