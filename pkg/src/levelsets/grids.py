"""Regular grids on [0, T]^d and scalar fields sampled on their vertices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, ParameterError


@dataclass(frozen=True)
class GridSpec:
    """A regular discretization of the box [0, T]^d.

    `cells` cells per axis of width h = T / cells; vertices at
    {0, h, 2h, ..., T}, so cells + 1 vertices per axis.
    """

    dim: int
    T: float
    cells: int

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"grid dim must be >= 1, got {self.dim}")
        if not self.T > 0:
            raise ParameterError(f"grid extent T must be > 0, got {self.T}")
        if self.cells < 2:
            raise ParameterError(f"cells per axis must be >= 2, got {self.cells}")

    @property
    def h(self) -> float:
        """Cell width."""
        return self.T / self.cells

    @property
    def vertex_shape(self) -> tuple[int, ...]:
        return (self.cells + 1,) * self.dim

    @property
    def cell_shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.dim

    @property
    def vertex_count(self) -> int:
        return (self.cells + 1) ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def cell_diameter(self) -> float:
        return self.h * float(np.sqrt(self.dim))

    def axis_vertices(self) -> np.ndarray:
        """Vertex coordinates along one axis, shape (cells + 1,)."""
        return np.arange(self.cells + 1) * self.h

    def axis_centers(self) -> np.ndarray:
        """Cell-center coordinates along one axis, shape (cells,)."""
        return (np.arange(self.cells) + 0.5) * self.h

    def scaled(self, a: float) -> "GridSpec":
        """The grid for the box [0, a*T]^d with the same cell count."""
        if not a > 0:
            raise ParameterError(f"scale factor must be > 0, got {a}")
        return GridSpec(self.dim, a * self.T, self.cells)


@dataclass(frozen=True)
class ScalarField:
    """A function sampled on every vertex of a GridSpec.

    `values` has shape grid.vertex_shape. Fields holding (estimated)
    distribution functions additionally satisfy values in [0, 1] and
    componentwise monotonicity; that is a property of how they are built,
    not enforced here, since perturbed synthetic estimators may break it.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.vertex_shape:
            raise ParameterError(
                f"field values shape {values.shape} does not match grid "
                f"vertex shape {self.grid.vertex_shape}"
            )
        object.__setattr__(self, "values", values)

    def cell_center_values(self) -> np.ndarray:
        """Multilinear interpolation of the vertex values at all cell centers.

        At a cell center the multilinear interpolant is the mean of the 2^d
        corner vertex values; computed as a d-fold pairwise average, one axis
        at a time. Shape grid.cell_shape.
        """
        out = self.values
        for ax in range(self.grid.dim):
            lo = [slice(None)] * self.grid.dim
            hi = [slice(None)] * self.grid.dim
            lo[ax] = slice(0, -1)
            hi[ax] = slice(1, None)
            out = 0.5 * (out[tuple(lo)] + out[tuple(hi)])
        return out

    def is_monotone(self) -> bool:
        """True if values are componentwise nondecreasing along every axis."""
        for ax in range(self.grid.dim):
            if np.any(np.diff(self.values, axis=ax) < 0):
                return False
        return True


def require_same_grid(a: ScalarField | "object", b: ScalarField | "object"):
    """Raise GridMismatchError unless a and b carry identical grids."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")
