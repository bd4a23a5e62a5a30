"""Plug-in level-set masks on [0, T]^d, boundary extraction, and scaling.

A mask marks the grid cells whose center-interpolated field value reaches the
level c. Its boundary is the set of inside cells with an outside face
neighbor, where neighbors beyond the box faces count as inside: the box walls
are truncation artifacts, not part of the level curve, so they are never
reported as boundary. The reference boundary of an analytic model is found by
root bisection along grid lines, which is unconditionally convergent because
the distribution function is monotone along every axis line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import eval_cdf
from .ecdf import Sample
from .errors import ParameterError
from .grids import GridSpec, ScalarField

__all__ = [
    "GridSpec",
    "LevelSetMask",
    "BoundaryPoints",
    "plug_in_levelset",
    "extract_boundary",
    "analytic_boundary",
    "scale_points",
    "scale_sample",
    "write_boundary_csv",
    "write_mask_rle",
    "read_mask_rle",
]


@dataclass(frozen=True)
class LevelSetMask:
    """Boolean cell membership on a grid; True means the cell is in the set."""

    grid: GridSpec
    inside: np.ndarray = field(repr=False)

    def __post_init__(self):
        inside = np.asarray(self.inside, dtype=bool)
        if inside.shape != self.grid.cell_shape:
            raise ParameterError(
                f"mask shape {inside.shape} does not match grid cell shape {self.grid.cell_shape}"
            )
        object.__setattr__(self, "inside", inside)

    def volume(self) -> float:
        return float(np.count_nonzero(self.inside)) * self.grid.cell_volume


@dataclass(frozen=True)
class BoundaryPoints:
    """A finite sample of a set boundary, as points in [0, T]^d.

    ``resolution`` is the generating grid's cell diameter h * sqrt(d); it
    bounds how far these points can sit from the continuous boundary they
    sample.
    """

    points: np.ndarray = field(repr=False)
    resolution: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 and pts.size:
            raise ParameterError(f"boundary points must be a k x d array, got shape {pts.shape}")
        if pts.size == 0:
            pts = pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.count == 0


def _lexsorted(points: np.ndarray) -> np.ndarray:
    """Sort rows lexicographically (first coordinate outermost) for
    deterministic output regardless of internal evaluation order."""
    if points.shape[0] == 0:
        return points
    order = np.lexsort(tuple(points[:, ax] for ax in reversed(range(points.shape[1]))))
    return points[order]


def plug_in_levelset(field: ScalarField, c: float) -> LevelSetMask:
    """Cells whose center-interpolated field value is >= c.

    Center evaluation makes the mask volume a midpoint Riemann approximation
    of the set's Lebesgue measure and keeps boundary cells symmetric around
    the level curve.
    """
    if not 0 < c < 1:
        raise ParameterError(f"level c must lie in (0, 1), got {c}")
    return LevelSetMask(field.grid, field.cell_center_values() >= c)


def extract_boundary(mask: LevelSetMask) -> BoundaryPoints:
    """Centers of inside cells with at least one face-adjacent outside cell.

    Cells beyond the box faces count as inside, so a mask that reaches a wall
    produces no boundary there: the boundary sampled here is the level curve
    inside the box, not the topological boundary of the truncated set. A full
    or empty mask therefore has an empty boundary.
    """
    inside = mask.inside
    padded = np.pad(inside, 1, constant_values=True)
    exposed = np.zeros_like(inside)
    for ax in range(mask.grid.dim):
        sl = [slice(1, -1)] * mask.grid.dim
        for shift in (slice(0, -2), slice(2, None)):
            sl_n = list(sl)
            sl_n[ax] = shift
            exposed |= ~padded[tuple(sl_n)]
    boundary_cells = np.argwhere(inside & exposed)
    points = (boundary_cells + 0.5) * mask.grid.h
    return BoundaryPoints(_lexsorted(points), mask.grid.cell_diameter)


def analytic_boundary(model, c: float, grid: GridSpec, tol: float | None = None) -> BoundaryPoints:
    """Sample the level curve {F = c} inside the box along grid lines.

    For every grid line parallel to an axis (one per vertex combination of
    the other coordinates), if F crosses c strictly between the line's
    endpoints, the crossing is located by bisection to within ``tol``
    (default 1e-10 * T) and emitted. The union over all axes samples the
    level curve with spacing at most h. Returns an empty set when the curve
    misses the box entirely.
    """
    if not 0 < c < 1:
        raise ParameterError(f"level c must lie in (0, 1), got {c}")
    if tol is None:
        tol = 1e-10 * grid.T
    if not tol > 0:
        raise ParameterError(f"tol must be > 0, got {tol}")
    verts = grid.axis_vertices()
    dim = grid.dim
    collected = []
    iterations = int(np.ceil(np.log2(grid.T / tol))) + 1
    for ax in range(dim):
        other = [verts] * (dim - 1)
        fixed = (
            np.stack([g.ravel() for g in np.meshgrid(*other, indexing="ij")], axis=-1)
            if dim > 1
            else np.zeros((1, 0))
        )

        def line_points(t: np.ndarray) -> np.ndarray:
            pts = np.empty((fixed.shape[0], dim))
            pts[:, [i for i in range(dim) if i != ax]] = fixed
            pts[:, ax] = t
            return pts

        f_lo = eval_cdf(model, line_points(np.zeros(fixed.shape[0])))
        f_hi = eval_cdf(model, line_points(np.full(fixed.shape[0], grid.T)))
        active = (f_lo < c) & (c < f_hi)
        if not np.any(active):
            continue
        fixed = fixed[active]
        lo = np.zeros(fixed.shape[0])
        hi = np.full(fixed.shape[0], grid.T)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            above = eval_cdf(model, line_points(mid)) >= c
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        roots = 0.5 * (lo + hi)
        pts = np.empty((fixed.shape[0], dim))
        pts[:, [i for i in range(dim) if i != ax]] = fixed
        pts[:, ax] = roots
        collected.append(pts)
    if not collected:
        return BoundaryPoints(np.empty((0, dim)), grid.cell_diameter)
    points = _lexsorted(np.concatenate(collected, axis=0))
    return BoundaryPoints(points, grid.cell_diameter)


def scale_points(points: BoundaryPoints, a: float) -> BoundaryPoints:
    """Multiply every coordinate (and the resolution metadata) by a > 0."""
    if not a > 0:
        raise ParameterError(f"scale factor must be > 0, got {a}")
    return BoundaryPoints(points.points * a, points.resolution * a)


def scale_sample(sample: Sample, a: float) -> Sample:
    """The sample of a*X: every coordinate multiplied by a > 0."""
    if not a > 0:
        raise ParameterError(f"scale factor must be > 0, got {a}")
    return Sample(sample.points * a)


def write_boundary_csv(points: BoundaryPoints, path):
    """Export boundary points as CSV with d coordinate columns, no header."""
    np.savetxt(Path(path), points.points, delimiter=",", fmt="%.17g")


_MASK_MAGIC = "levelset-mask 1"


def write_mask_rle(mask: LevelSetMask, path):
    """Export a mask as run-length-encoded text.

    Format (version 1): a magic line ``levelset-mask 1``; a header line
    ``dim=<d> cells=<m> T=<extent>``; then ``start:length`` runs of inside
    cells over the C-order flattened mask, whitespace separated.
    """
    flat = mask.inside.ravel()
    idx = np.flatnonzero(np.diff(np.concatenate(([False], flat, [False])).astype(np.int8)))
    starts, ends = idx[0::2], idx[1::2]
    runs = [f"{s}:{e - s}" for s, e in zip(starts, ends)]
    lines = [_MASK_MAGIC, f"dim={mask.grid.dim} cells={mask.grid.cells} T={mask.grid.T!r}"]
    for i in range(0, len(runs), 64):
        lines.append(" ".join(runs[i : i + 64]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mask_rle(path) -> LevelSetMask:
    """Read a mask written by :func:`write_mask_rle`."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != _MASK_MAGIC:
        raise ParameterError(f"{path}: not a version-1 mask file")
    header = dict(kv.split("=", 1) for kv in text[1].split())
    grid = GridSpec(int(header["dim"]), float(header["T"]), int(header["cells"]))
    flat = np.zeros(grid.cells**grid.dim, dtype=bool)
    for token in " ".join(text[2:]).split():
        start, length = token.split(":")
        flat[int(start) : int(start) + int(length)] = True
    return LevelSetMask(grid, flat.reshape(grid.cell_shape))
