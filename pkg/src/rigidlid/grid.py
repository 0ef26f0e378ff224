"""Uniform 2D Cartesian meshes for one subdomain.

Cells are indexed 1-based as (i, j), i = 1..nx in x and j = 1..nz in z,
mirroring the (i +- 1/2, j) face subscripts of the flux-difference update.
Storage of cell data is row-major over j then i, i.e. arrays are shaped
(nz, nx) with array[j-1, i-1] holding cell (i, j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StructuredGrid2D:
    """Geometry of a uniform Cartesian mesh.

    Attributes
    ----------
    nx, nz : int
        Cell counts in x and z.
    x0, z0 : float
        Domain origin (lower-left corner).
    dx, dz : float
        Cell widths.
    """

    nx: int
    nz: int
    x0: float
    z0: float
    dx: float
    dz: float

    def __post_init__(self):
        if self.nx < 1 or self.nz < 1:
            raise ValueError(f"cell counts must be >= 1, got nx={self.nx}, nz={self.nz}")
        if not (self.dx > 0.0 and self.dz > 0.0):
            raise ValueError(f"cell widths must be positive, got dx={self.dx}, dz={self.dz}")

    @property
    def n_cells(self) -> int:
        return self.nx * self.nz

    @property
    def cell_measure(self) -> float:
        """Lebesgue measure |K| of every cell."""
        return self.dx * self.dz

    @property
    def x_max(self) -> float:
        return self.x0 + self.nx * self.dx

    @property
    def z_max(self) -> float:
        return self.z0 + self.nz * self.dz

    @property
    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def z_centers(self) -> np.ndarray:
        return self.z0 + (np.arange(self.nz) + 0.5) * self.dz

    def meshgrid(self):
        """Cell-center coordinate arrays (X, Z), each shaped (nz, nx)."""
        return np.meshgrid(self.x_centers, self.z_centers)


def build_grid(nx, nz, x_extent, z_extent) -> StructuredGrid2D:
    """Construct a uniform grid covering x_extent x z_extent.

    Parameters
    ----------
    nx, nz : int
        Cell counts (>= 1).
    x_extent, z_extent : (float, float)
        Nondegenerate intervals (min, max).
    """
    nx = int(nx)
    nz = int(nz)
    if nx < 1 or nz < 1:
        raise ValueError(f"cell counts must be >= 1, got nx={nx}, nz={nz}")
    x_min, x_max = map(float, x_extent)
    z_min, z_max = map(float, z_extent)
    if not (x_max > x_min) or not (z_max > z_min):
        raise ValueError(f"empty extent: x={x_extent}, z={z_extent}")
    return StructuredGrid2D(
        nx=nx, nz=nz, x0=x_min, z0=z_min,
        dx=(x_max - x_min) / nx, dz=(z_max - z_min) / nz,
    )


def cell_center(grid: StructuredGrid2D, i: int, j: int):
    """Center coordinates (x, z) of cell (i, j), 1-based indices."""
    if not (1 <= i <= grid.nx and 1 <= j <= grid.nz):
        raise IndexError(f"cell ({i}, {j}) outside grid {grid.nx}x{grid.nz}")
    return (grid.x0 + (i - 0.5) * grid.dx, grid.z0 + (j - 0.5) * grid.dz)
