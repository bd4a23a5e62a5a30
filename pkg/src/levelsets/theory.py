"""Constants and bounds for plug-in level-set error control.

Around the level curve {F = c} sits a tube E: the set of points within
Euclidean distance ``zeta`` of the band {|F - c| <= r}. Two constants of F
over E drive everything here:

* ``m_grad``: the infimum of the gradient norm over E. When positive, level
  curves move Lipschitz-stably in the level, with constant A = 2 / m_grad,
  and the boundary of the plug-in set is within 6 * A * sup|F - F_n| of the
  true boundary once the estimator is uniformly close enough.
* ``M_H``: the supremum of the Hessian spectral norm over E. Only its
  finiteness matters; it is kept as a diagnostic.

Both are estimated by scanning a grid over a box that covers the in-box part
of the tube. A grid minimum can only overestimate an infimum, and a smaller
m_grad would only loosen the 6*A bound, so the scan value is the strict
choice for verifying the bound empirically; a refinement pass (cell size
halved until the values move < 1%) is reported alongside.

Rate schedules encode the sequences of a truncated volume-convergence
experiment as explicit power laws: T_n = T0 * n^tau, v_n = n^beta_v, and the
derived weight p_n whose product with the symmetric-difference volume should
vanish. The little-o headroom is an explicit exponent slack ``delta`` so that
schedules are serializable and comparable across runs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .distributions import (
    AnalyticModel,
    Family,
    cdf_field,
    eval_cdf,
    eval_gradient,
    eval_hessian,
)
from .errors import ConfigurationError, HypothesisGateError, ParameterError
from .grids import GridSpec

_M_GRAD_FLOOR = 1e-6
_SCAN_VERTEX_CAP = 25_000_000
_HESS_CHUNK = 262_144


@dataclass(frozen=True)
class TheoryConstants:
    """Level, tube geometry, and the scanned constants of one model.

    ``m_grad`` is the raw scan value at the requested resolution (used for
    every bound, see module docstring); ``m_grad_refined`` is the
    refinement-converged value. ``gamma`` is the level radius within which
    the Lipschitz stability of level curves is trusted; it is set to r by
    convention, since the machinery that yields A operates inside that band.
    """

    c: float
    r: float
    zeta: float
    m_grad: float
    M_H: float
    gamma: float
    m_grad_refined: float | None = None
    M_H_refined: float | None = None
    degenerate: bool = False

    @property
    def A(self) -> float:
        """Level-stability constant, exactly 2 / m_grad."""
        return 2.0 / self.m_grad

    @property
    def gate_ok(self) -> bool:
        """True when the bound hypotheses hold: gradient infimum bounded away
        from zero and finite Hessian supremum."""
        return (
            not self.degenerate
            and self.m_grad > _M_GRAD_FLOOR
            and np.isfinite(self.M_H)
        )


def _check_tube_params(c: float, r: float, zeta: float):
    if not 0 < c < 1:
        raise ParameterError(f"level c must lie in (0, 1), got {c}")
    if not r > 0 or not zeta > 0:
        raise ParameterError(f"tube parameters must be > 0, got r={r}, zeta={zeta}")


def _scan_extent(model: AnalyticModel, c: float, r: float, zeta: float) -> tuple[float, bool]:
    """Box size for the tube scan: the diagonal point where F reaches c + r,
    plus the zeta margin. Returns (extent, degenerate): when c + r >= 1 the
    band never closes (F cannot exceed 1), the true gradient infimum is 0 for
    these families, and the scan box is capped near the F -> 1 saturation.
    """
    target = c + r
    degenerate = target >= 1.0
    if degenerate:
        target = 1.0 - 0.5 * (1.0 - c) if c < 1 else 1.0 - 1e-9
    hi = 1.0
    ones = np.ones(model.dim)
    while eval_cdf(model, hi * ones) <= target:
        hi *= 2.0
        if hi > 1e12:
            raise ConfigurationError("could not bracket the scan box extent")
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if eval_cdf(model, mid * ones) > target:
            hi = mid
        else:
            lo = mid
    return hi + zeta, degenerate


def _spectral_norms(hess: np.ndarray) -> np.ndarray:
    """Spectral norms of a (k, d, d) batch of symmetric matrices."""
    d = hess.shape[-1]
    if d == 2:
        a = hess[:, 0, 0]
        b = hess[:, 0, 1]
        c = hess[:, 1, 1]
        half_tr = 0.5 * (a + c)
        root = np.sqrt(0.25 * (a - c) ** 2 + b**2)
        return np.maximum(np.abs(half_tr + root), np.abs(half_tr - root))
    return np.max(np.abs(np.linalg.eigvalsh(hess)), axis=-1)


def spectral_norm(mat) -> float:
    """Spectral norm (largest |eigenvalue|) of a single symmetric matrix."""
    mat = np.asarray(mat, dtype=np.float64)
    return float(np.max(np.abs(np.linalg.eigvalsh(mat))))


def _tube_scan(
    model: AnalyticModel, c: float, r: float, zeta: float, cells: int
) -> tuple[float, float, int]:
    """One scan at fixed resolution: (min gradient norm, max Hessian spectral
    norm, number of tube vertices found). Tube membership is tested on
    vertices: within distance zeta (exact Euclidean distance transform) of
    the sampled band {|F - c| <= r}.
    """
    extent, _ = _scan_extent(model, c, r, zeta)
    grid = GridSpec(model.dim, extent, cells)
    values = cdf_field(model, grid).values
    band = np.abs(values - c) <= r
    n_band = int(np.count_nonzero(band))
    if n_band == 0:
        return np.nan, np.nan, 0
    dist = distance_transform_edt(~band, sampling=grid.h)
    in_tube = dist <= zeta
    idx = np.argwhere(in_tube)
    points = idx * grid.h
    if model.family is Family.CLAYTON_EXPONENTIAL:
        # Clayton derivatives are undefined on the axes; those points carry
        # F = 0, far below any admissible band, so dropping them is safe.
        points = points[np.all(points > 0, axis=1)]
        if points.shape[0] == 0:
            return np.nan, np.nan, 0
    grad = eval_gradient(model, points)
    min_grad = float(np.min(np.linalg.norm(grad, axis=1)))
    max_hess = 0.0
    for start in range(0, points.shape[0], _HESS_CHUNK):
        chunk = eval_hessian(model, points[start : start + _HESS_CHUNK])
        max_hess = max(max_hess, float(np.max(_spectral_norms(chunk))))
    return min_grad, max_hess, points.shape[0]


def _refined_scan(
    model: AnalyticModel,
    c: float,
    r: float,
    zeta: float,
    scan_cells: int,
    max_refinements: int = 3,
    rel_tol: float = 0.01,
) -> tuple[float, float, float, float]:
    """Scan, then halve the cell size until both constants move < rel_tol.

    Returns (raw m_grad, refined m_grad, raw M_H, refined M_H), where "raw"
    means the first resolution at which the tube was visible at all.
    """
    _check_tube_params(c, r, zeta)
    cells = scan_cells
    cells_max = scan_cells * 2**max_refinements
    raw = None
    prev = None
    while cells <= cells_max and (cells + 1) ** model.dim <= _SCAN_VERTEX_CAP:
        mg, mh, n_tube = _tube_scan(model, c, r, zeta, cells)
        if n_tube == 0:
            cells *= 2
            continue
        if raw is None:
            raw = (mg, mh)
        converged = prev is not None and (
            abs(mg - prev[0]) <= rel_tol * abs(prev[0])
            and abs(mh - prev[1]) <= rel_tol * max(abs(prev[1]), 1e-300)
        )
        prev = (mg, mh)
        if converged:
            break
        cells *= 2
    if raw is None:
        raise ConfigurationError(
            f"tube empty in scan box at every admissible resolution up to "
            f"{cells_max} cells per axis; check c={c}, r={r}, zeta={zeta} "
            f"(or lower scan_cells if the vertex budget was exceeded)"
        )
    return raw[0], prev[0], raw[1], prev[1]


def estimate_m_grad(
    model: AnalyticModel,
    c: float,
    r: float,
    zeta: float,
    scan_cells: int = 256,
    max_refinements: int = 3,
) -> float:
    """Scan estimate of the gradient-norm infimum over the tube, refined by
    halving the cell size until the value changes by less than 1%.

    The result is an upper estimate of the true infimum (a grid minimum over
    finitely many tube points). Raises ConfigurationError when the band
    misses the scan lattice entirely.
    """
    return _refined_scan(model, c, r, zeta, scan_cells, max_refinements)[1]


def estimate_M_H(
    model: AnalyticModel,
    c: float,
    r: float,
    zeta: float,
    scan_cells: int = 256,
    max_refinements: int = 3,
) -> float:
    """Scan estimate of the Hessian spectral-norm supremum over the tube,
    refined like :func:`estimate_m_grad`. A lower estimate of the true sup;
    used to confirm finiteness, not quoted in any bound."""
    return _refined_scan(model, c, r, zeta, scan_cells, max_refinements)[3]


def compute_constants(
    model: AnalyticModel,
    c: float,
    r: float,
    zeta: float,
    scan_cells: int = 256,
    max_refinements: int = 3,
) -> TheoryConstants:
    """Run the tube scan once and assemble TheoryConstants.

    ``m_grad`` is the raw first-resolution value (strictest for bound
    checks), the refined values ride along. When c + r >= 1 the band is
    unbounded and the true infimum is 0: the constants are flagged
    degenerate, a warning is emitted, and every bound is refused.
    """
    _check_tube_params(c, r, zeta)
    _, degenerate = _scan_extent(model, c, r, zeta)
    raw_mg, ref_mg, raw_mh, ref_mh = _refined_scan(
        model, c, r, zeta, scan_cells, max_refinements
    )
    if degenerate or raw_mg <= _M_GRAD_FLOOR:
        warnings.warn(
            f"gradient infimum degenerate over the tube (c={c}, r={r}): "
            "bounds will be refused",
            RuntimeWarning,
            stacklevel=2,
        )
    return TheoryConstants(
        c=c,
        r=r,
        zeta=zeta,
        m_grad=raw_mg,
        M_H=raw_mh,
        gamma=r,
        m_grad_refined=ref_mg,
        M_H_refined=ref_mh,
        degenerate=degenerate,
    )


def hausdorff_bound(constants: TheoryConstants, supnorm: float, a: float = 1.0) -> float:
    """The boundary-displacement bound 6 * A * a * supnorm.

    ``a`` is the data scale factor (1 for unscaled data); the bound is exactly
    linear in it. Refused when the gradient gate fails.
    """
    if not a > 0:
        raise ParameterError(f"scale factor must be > 0, got {a}")
    if not constants.gate_ok:
        raise HypothesisGateError(
            "gradient infimum vanishes (or Hessian unbounded) over the tube; "
            "the displacement bound does not apply"
        )
    return 6.0 * constants.A * a * supnorm


def band_volume_bound(constants: TheoryConstants, eps: float, d: int, T: float) -> float:
    """Volume bound 2 * eps * A * d * T^(d-1) for the band {|F - c| < eps}
    inside [0, T]^d. Refused when the gradient gate fails."""
    if eps < 0:
        raise ParameterError(f"eps must be >= 0, got {eps}")
    if not constants.gate_ok:
        raise HypothesisGateError(
            "gradient infimum vanishes (or Hessian unbounded) over the tube; "
            "the band-volume bound does not apply"
        )
    return 2.0 * eps * constants.A * d * T ** (d - 1)


def scaled_m_grad(m_grad: float, a: float) -> float:
    """Gradient infimum of the a-scaled data: m_grad / a (chain rule through
    F_aX(x) = F_X(x / a), with the tube scaled to (r, a * zeta))."""
    if not a > 0:
        raise ParameterError(f"scale factor must be > 0, got {a}")
    return m_grad / a


@dataclass(frozen=True)
class RateSchedule:
    """Power-law sequences of a volume-convergence run.

    T_n = T0 * n^tau (tau = 0 means a fixed box); v_n = v_scale * n^beta_v is
    the estimator-convergence speed the run is entitled to assume; delta > 0
    is the little-o slack carved out of the weight exponent. ``p`` is the
    integral order of the F-distance.
    """

    dim: int
    p: float
    T0: float
    tau: float
    beta_v: float
    delta: float
    v_scale: float = 1.0

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"dim must be >= 2, got {self.dim}")
        if not self.p >= 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not self.T0 > 0:
            raise ParameterError(f"T0 must be > 0, got {self.T0}")
        if self.tau < 0:
            raise ParameterError(f"tau must be >= 0, got {self.tau}")
        if self.beta_v < 0:
            raise ParameterError(f"beta_v must be >= 0, got {self.beta_v}")
        if not self.v_scale > 0:
            raise ParameterError(f"v_scale must be > 0, got {self.v_scale}")

    def T_n(self, n) -> float | np.ndarray:
        return self.T0 * np.asarray(n, dtype=np.float64) ** self.tau

    def v_n(self, n) -> float | np.ndarray:
        return self.v_scale * np.asarray(n, dtype=np.float64) ** self.beta_v


@dataclass(frozen=True)
class RateRule:
    """The weight sequence p_n = a^(-a_exponent) * n^exponent in exponent form.

    ``n_exponent`` and ``T_exponent`` spell out the ceiling
    n^n_exponent / T_n^T_exponent that p_n must stay under; the realized
    exponent substitutes T_n = T0 * n^tau and subtracts the slack delta.
    Rules with a nonpositive realized exponent are rejected: the weight must
    be increasing for the convergence statement to carry content.
    """

    n_exponent: float
    T_exponent: float
    a_exponent: float
    tau: float
    delta: float
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"scale factor must be > 0, got {self.a}")
        if not self.exponent > 0:
            raise ParameterError(
                f"schedule rejected: realized weight exponent {self.exponent} <= 0 "
                "(no valid increasing rate)"
            )

    @property
    def exponent(self) -> float:
        return self.n_exponent - self.tau * self.T_exponent - self.delta

    @property
    def coeff(self) -> float:
        return self.a ** (-self.a_exponent)

    @property
    def is_little_o(self) -> bool:
        """True when the slack actually puts the rule below its ceiling."""
        return self.delta > 0

    def __call__(self, n) -> float | np.ndarray:
        out = self.coeff * np.asarray(n, dtype=np.float64) ** self.exponent
        return float(out) if np.isscalar(n) else out


def rate_pn(schedule: RateSchedule, a: float = 1.0) -> RateRule:
    """Weight rule from an integral-distance speed v_n: ceiling
    v_n^(1/(p+1)) / T_n^((d-1)p/(p+1)), scale divisor a^(dp/(p+1))."""
    d, p = schedule.dim, schedule.p
    return RateRule(
        n_exponent=schedule.beta_v / (p + 1.0),
        T_exponent=(d - 1.0) * p / (p + 1.0),
        a_exponent=d * p / (p + 1.0),
        tau=schedule.tau,
        delta=schedule.delta,
        a=a,
    )


def rate_pn_supnorm(
    d: int, p: float, beta_v: float, tau: float = 0.0, delta: float = 0.05, a: float = 1.0
) -> RateRule:
    """Weight rule from a sup-norm speed v_n = n^beta_v: ceiling
    v_n^(p/(p+1)) / T_n^((d+(d-1)p)/(p+1)).

    Equivalent to feeding w_n = v_n^p / T_n^d into :func:`rate_pn`, since a
    sup-norm speed v_n yields the integral-distance speed w_n over a box of
    volume T_n^d.
    """
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    if not p >= 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    return RateRule(
        n_exponent=beta_v * p / (p + 1.0),
        T_exponent=(d + (d - 1.0) * p) / (p + 1.0),
        a_exponent=d * p / (p + 1.0),
        tau=tau,
        delta=delta,
        a=a,
    )


def eps_n(p_n_value: float, v_n_value: float, p: float) -> float:
    """Band half-width (p_n / v_n)^(1/p) linking the weight to the
    integral-distance speed."""
    if not (p_n_value > 0 and v_n_value > 0 and p >= 1):
        raise ParameterError(
            f"need p_n > 0, v_n > 0, p >= 1; got {p_n_value}, {v_n_value}, {p}"
        )
    return (p_n_value / v_n_value) ** (1.0 / p)
