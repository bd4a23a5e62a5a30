"""Multivariate empirical distribution function and grid-based F-distances.

The grid evaluator is the performance kernel of the package: it computes the
ecdf at every vertex of a regular grid by offline dominance counting
(histogram + d-dimensional prefix sum) instead of the naive per-vertex scan.

Complexity for n points on a grid with G = (m+1)^d vertices:

* naive:     O(n * G) comparisons,
* here:      O(n * d * log m) for the bin search, O(n) for the histogram,
             O(d * G) for the prefix sums; memory O(G).

For d = 2, n = 10^6, m = 512 this runs in well under a second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .grids import GridSpec, ScalarField, require_same_grid


@dataclass(frozen=True)
class Sample:
    """An n x d array of observation points in the nonnegative orthant."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"sample must be a nonempty n x d array, got shape {pts.shape}")
        if np.any(pts < 0) or not np.all(np.isfinite(pts)):
            raise ParameterError("sample points must be finite and nonnegative")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def load_sample_csv(path) -> Sample:
    """Read a sample from CSV: d columns, no header, one point per row."""
    data = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    return Sample(data)


def ecdf_eval(sample: Sample, x) -> float:
    """Fraction of sample points dominated by x, componentwise closed:
    (1/n) * #{i : X_i <= x in every coordinate}.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sample.dim,):
        raise ParameterError(f"point shape {x.shape} does not match sample dim {sample.dim}")
    return float(np.all(sample.points <= x, axis=1).mean())


def ecdf_eval_grid(sample: Sample, grid: GridSpec) -> ScalarField:
    """The ecdf at every grid vertex, by offline dominance counting.

    Each point is binned per axis with ``searchsorted(vertices, x, 'left')``,
    the first vertex index whose coordinate is >= x; the point is dominated
    exactly by vertices whose index is >= that bin on every axis, so the
    vertex counts are the d-dimensional prefix sums of the bin histogram.
    Ties (a point exactly on a vertex coordinate) count as dominated,
    matching the closed <= of ecdf_eval. Counts are integers, so the result
    equals the per-vertex definition exactly.
    """
    if grid.dim != sample.dim:
        raise ParameterError(f"grid dim {grid.dim} does not match sample dim {sample.dim}")
    verts = grid.axis_vertices()
    m1 = grid.cells + 1
    pos = np.empty(sample.points.shape, dtype=np.int64)
    for ax in range(grid.dim):
        pos[:, ax] = np.searchsorted(verts, sample.points[:, ax], side="left")
    # Points beyond T on any axis are dominated by no vertex of the box.
    keep = np.all(pos <= grid.cells, axis=1)
    pos = pos[keep]
    flat = np.ravel_multi_index(tuple(pos.T), grid.vertex_shape) if pos.size else np.empty(0, np.int64)
    counts = np.bincount(flat, minlength=grid.vertex_count).reshape(grid.vertex_shape)
    for ax in range(grid.dim):
        np.cumsum(counts, axis=ax, out=counts)
    return ScalarField(grid, counts / sample.n)


def sup_distance(field_a: ScalarField, field_b: ScalarField) -> float:
    """max over vertices of |A - B|.

    This is a lower bound of the sup over the whole box; the gap is bounded
    by the fields' modulus of continuity times the cell diameter, so report
    the grid resolution alongside when quoting it.
    """
    require_same_grid(field_a, field_b)
    return float(np.max(np.abs(field_a.values - field_b.values)))


def lp_distance(field_a: ScalarField, field_b: ScalarField, p: float) -> float:
    """Midpoint Riemann sum of |A - B|^p over [0, T]^d.

    The integrand is evaluated at cell centers via multilinear interpolation
    (vertex average), second-order accurate for smooth integrands.
    """
    require_same_grid(field_a, field_b)
    if not p >= 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    diff = np.abs(
        ScalarField(field_a.grid, field_a.values - field_b.values).cell_center_values()
    )
    return float(np.sum(diff**p) * field_a.grid.cell_volume)
