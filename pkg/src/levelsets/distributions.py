"""Analytic d-variate distribution families on the nonnegative orthant.

Two families with closed-form distribution function, gradient, Hessian and
exact samplers serve as ground truth for every experiment:

* ``indep_exponential``: independent exponential margins,
  F(x) = prod_i (1 - exp(-rate_i * x_i)).
* ``clayton_exponential``: a Clayton copula
  C(u) = (sum_i u_i^(-theta) - d + 1)^(-1/theta) over exponential margins
  u_i = 1 - exp(-rate_i * x_i), giving tunable lower-tail dependence.

Both have support exactly R^d_+ with strictly positive density, are twice
differentiable on the open orthant, and have a nonvanishing gradient on
compact tubes away from the axes, which is what the bound machinery in
:mod:`levelsets.theory` needs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ecdf import Sample
from .errors import DomainError, ParameterError
from .grids import GridSpec, ScalarField


class Family(enum.Enum):
    INDEP_EXPONENTIAL = "indep_exponential"
    CLAYTON_EXPONENTIAL = "clayton_exponential"


@dataclass(frozen=True)
class AnalyticModel:
    """An immutable ground-truth distribution on R^d_+.

    ``theta`` is the Clayton dependence parameter; it is ignored by the
    independent family. Instances are safe to share across workers; sampling
    takes an explicit seed and keeps no mutable state.
    """

    family: Family
    dim: int
    rates: tuple[float, ...]
    theta: float = 1.0


def make_model(family, dim: int, margin_rates, theta: float | None = None) -> AnalyticModel:
    """Build and validate a model.

    ``family`` may be a Family member or its string value. ``margin_rates``
    supplies the d exponential rates (units 1/x). ``theta`` must be a
    positive real for the Clayton family and is ignored otherwise.
    """
    if not isinstance(family, Family):
        try:
            family = Family(family)
        except ValueError:
            names = ", ".join(f.value for f in Family)
            raise ParameterError(f"unknown family {family!r}; expected one of: {names}") from None
    if int(dim) != dim or dim < 2:
        raise ParameterError(f"dim must be an integer >= 2, got {dim}")
    rates = tuple(float(r) for r in np.atleast_1d(margin_rates))
    if len(rates) != dim:
        raise ParameterError(f"expected {dim} margin rates, got {len(rates)}")
    if any(not (r > 0) for r in rates):
        raise ParameterError(f"margin rates must all be > 0, got {rates}")
    if family is Family.CLAYTON_EXPONENTIAL:
        if theta is None or not (theta > 0):
            raise ParameterError(f"theta must be > 0 for the Clayton family, got {theta}")
    theta = 1.0 if theta is None else float(theta)
    return AnalyticModel(family, int(dim), rates, theta)


def scale_model(model: AnalyticModel, a: float) -> AnalyticModel:
    """The model of a*X when X follows ``model`` (exponential rates divide by a)."""
    if not a > 0:
        raise ParameterError(f"scale factor must be > 0, got {a}")
    return AnalyticModel(model.family, model.dim, tuple(r / a for r in model.rates), model.theta)


def _checked_points(model: AnalyticModel, x, strict_positive: bool = False) -> tuple[np.ndarray, bool]:
    """Validate and reshape x into an (k, d) batch; returns (points, was_1d)."""
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 0 or pts.shape[-1] != model.dim:
        raise ParameterError(
            f"point has dimension {pts.shape[-1] if pts.ndim else 0}, model has {model.dim}"
        )
    if np.any(pts < 0):
        raise DomainError("points must lie in the nonnegative orthant")
    if strict_positive and np.any(pts == 0):
        raise DomainError(
            "Clayton gradient/Hessian requires strictly positive coordinates"
        )
    was_1d = pts.ndim == 1
    return pts.reshape(-1, model.dim), was_1d


def _margins(model: AnalyticModel, pts: np.ndarray) -> np.ndarray:
    """u_i = 1 - exp(-rate_i x_i), shape like pts."""
    return -np.expm1(-np.asarray(model.rates) * pts)


def eval_cdf(model: AnalyticModel, x) -> float | np.ndarray:
    """F(x). Accepts a single point (d,) or a batch (..., d)."""
    pts, was_1d = _checked_points(model, x)
    u = _margins(model, pts)
    if model.family is Family.INDEP_EXPONENTIAL:
        out = np.prod(u, axis=-1)
    else:
        out = _clayton_cdf_from_margins(u, model.theta, model.dim)
    return float(out[0]) if was_1d else out.reshape(np.shape(x)[:-1])


def _clayton_cdf_from_margins(u: np.ndarray, theta: float, dim: int) -> np.ndarray:
    # u == 0 sends u^(-theta) to inf and the copula value to 0, which is the
    # correct limit; suppress the transient divide warning.
    with np.errstate(divide="ignore"):
        s = np.sum(u ** (-theta), axis=-1) - (dim - 1)
    return s ** (-1.0 / theta)


def eval_gradient(model: AnalyticModel, x) -> np.ndarray:
    """Gradient of F, shape (..., d). All components are >= 0 where defined."""
    strict = model.family is Family.CLAYTON_EXPONENTIAL
    pts, was_1d = _checked_points(model, x, strict_positive=strict)
    rates = np.asarray(model.rates)
    u = _margins(model, pts)
    du = rates * (1.0 - u)  # d u_i / d x_i = rate_i * exp(-rate_i x_i)
    if model.family is Family.INDEP_EXPONENTIAL:
        grad = du * _product_excluding_self(u)
    else:
        theta = model.theta
        s = np.sum(u ** (-theta), axis=-1, keepdims=True) - (model.dim - 1)
        # dC/du_k = s^(-1/theta - 1) * u_k^(-theta - 1)
        grad = s ** (-1.0 / theta - 1.0) * u ** (-theta - 1.0) * du
    return grad[0] if was_1d else grad.reshape(np.shape(x))


def eval_hessian(model: AnalyticModel, x) -> np.ndarray:
    """Hessian of F, shape (..., d, d), symmetric."""
    strict = model.family is Family.CLAYTON_EXPONENTIAL
    pts, was_1d = _checked_points(model, x, strict_positive=strict)
    rates = np.asarray(model.rates)
    u = _margins(model, pts)
    du = rates * (1.0 - u)
    d2u = -rates * du  # second margin derivative: -rate_i^2 exp(-rate_i x_i)
    k, d = pts.shape
    if model.family is Family.INDEP_EXPONENTIAL:
        prod_one = _product_excluding_self(u)  # prod over j != k
        prod_two = _product_excluding_pairs(u)  # (k, d, d): prod over j not in {k, l}
        hess = prod_two * (du[:, :, None] * du[:, None, :])
        diag = d2u * prod_one
    else:
        theta = model.theta
        s = np.sum(u ** (-theta), axis=-1) - (d - 1)
        c_k = s[:, None] ** (-1.0 / theta - 1.0) * u ** (-theta - 1.0)
        # d2C/du_k du_l = (1 + theta) s^(-1/theta - 2) (u_k u_l)^(-theta - 1)
        mixed = (1.0 + theta) * s[:, None, None] ** (-1.0 / theta - 2.0) * (
            u[:, :, None] * u[:, None, :]
        ) ** (-theta - 1.0)
        hess = mixed * (du[:, :, None] * du[:, None, :])
        # d2C/du_k^2 = (1+theta) [s^(-1/theta-2) u^(-2theta-2) - s^(-1/theta-1) u^(-theta-2)]
        c_kk = (1.0 + theta) * (
            s[:, None] ** (-1.0 / theta - 2.0) * u ** (-2.0 * theta - 2.0)
            - s[:, None] ** (-1.0 / theta - 1.0) * u ** (-theta - 2.0)
        )
        diag = c_kk * du**2 + c_k * d2u
    idx = np.arange(d)
    hess[:, idx, idx] = diag
    if was_1d:
        return hess[0]
    return hess.reshape(np.shape(x) + (d,))


def _product_excluding_self(u: np.ndarray) -> np.ndarray:
    """prod_{j != k} u_j for each k, computed without dividing by u_k."""
    k, d = u.shape
    out = np.empty_like(u)
    for i in range(d):
        mask = np.ones(d, dtype=bool)
        mask[i] = False
        out[:, i] = np.prod(u[:, mask], axis=1)
    return out


def _product_excluding_pairs(u: np.ndarray) -> np.ndarray:
    """prod_{j not in {k, l}} u_j for each pair (k, l), shape (n, d, d)."""
    k, d = u.shape
    out = np.empty((k, d, d))
    for i in range(d):
        for j in range(d):
            mask = np.ones(d, dtype=bool)
            mask[i] = False
            mask[j] = False
            out[:, i, j] = np.prod(u[:, mask], axis=1)
    return out


def sample(model: AnalyticModel, n: int, seed: int) -> Sample:
    """Draw n i.i.d. points; deterministic given (model, n, seed).

    The generator is numpy's PCG64 via ``np.random.default_rng(seed)``.
    Independent margins use per-coordinate inverse-transform sampling.
    The Clayton family uses the gamma-frailty construction, exact for every
    theta > 0 and every d: draw W ~ Gamma(1/theta, 1) and E_i i.i.d. standard
    exponential, set U_i = (1 + E_i/W)^(-1/theta), then invert the margins.
    """
    if n < 1:
        raise ParameterError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    rates = np.asarray(model.rates)
    if model.family is Family.INDEP_EXPONENTIAL:
        uniforms = rng.random((n, model.dim))
        points = -np.log1p(-uniforms) / rates
    else:
        w = rng.gamma(1.0 / model.theta, 1.0, size=n)
        e = -np.log1p(-rng.random((n, model.dim)))
        copula_uniforms = (1.0 + e / w[:, None]) ** (-1.0 / model.theta)
        points = -np.log1p(-copula_uniforms) / rates
    return Sample(points)


def cdf_field(model: AnalyticModel, grid: GridSpec) -> ScalarField:
    """F evaluated on every grid vertex, O(vertex_count) time and memory.

    Uses the separable structure of both families: per-axis margin vectors
    are broadcast across the grid instead of materializing the (G, d) array
    of vertex coordinates.
    """
    if grid.dim != model.dim:
        raise ParameterError(f"grid dim {grid.dim} does not match model dim {model.dim}")
    verts = grid.axis_vertices()
    axis_margins = [-np.expm1(-model.rates[i] * verts) for i in range(model.dim)]
    if model.family is Family.INDEP_EXPONENTIAL:
        values = np.ones(grid.vertex_shape)
        for ax, u in enumerate(axis_margins):
            values = values * _along_axis(u, ax, model.dim)
    else:
        theta = model.theta
        s = np.full(grid.vertex_shape, -(model.dim - 1), dtype=np.float64)
        with np.errstate(divide="ignore"):
            for ax, u in enumerate(axis_margins):
                s = s + _along_axis(u ** (-theta), ax, model.dim)
        values = s ** (-1.0 / theta)
    return ScalarField(grid, values)


def _along_axis(v: np.ndarray, axis: int, dim: int) -> np.ndarray:
    shape = [1] * dim
    shape[axis] = v.size
    return v.reshape(shape)
