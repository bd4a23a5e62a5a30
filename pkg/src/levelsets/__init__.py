"""Plug-in estimation of upper level sets of multivariate distribution
functions, with Hausdorff and symmetric-difference error metrics, bound
constants, and a reproducible convergence-experiment harness."""

from .distributions import (
    AnalyticModel,
    Family,
    cdf_field,
    eval_cdf,
    eval_gradient,
    eval_hessian,
    make_model,
    sample,
    scale_model,
)
from .ecdf import (
    Sample,
    ecdf_eval,
    ecdf_eval_grid,
    load_sample_csv,
    lp_distance,
    sup_distance,
)
from .errors import (
    ConfigurationError,
    DomainError,
    EmptySetError,
    GridMismatchError,
    HypothesisGateError,
    LevelSetsError,
    ParameterError,
)
from .grids import GridSpec, ScalarField
from .harness import (
    EstimatorMode,
    ExperimentConfig,
    ExperimentKind,
    ExperimentRecord,
    fit_loglog_slope,
    load_config,
    load_records,
    run_hausdorff_experiment,
    run_scaling_experiment,
    run_volume_experiment,
    write_config,
    write_records,
)
from .levelset import (
    BoundaryPoints,
    LevelSetMask,
    analytic_boundary,
    extract_boundary,
    plug_in_levelset,
    read_mask_rle,
    scale_points,
    scale_sample,
    write_boundary_csv,
    write_mask_rle,
)
from .metrics import band_volume, hausdorff, sym_diff_volume
from .theory import (
    RateRule,
    RateSchedule,
    TheoryConstants,
    band_volume_bound,
    compute_constants,
    eps_n,
    estimate_M_H,
    estimate_m_grad,
    hausdorff_bound,
    rate_pn,
    rate_pn_supnorm,
    scaled_m_grad,
    spectral_norm,
)

__version__ = "0.1.0"
