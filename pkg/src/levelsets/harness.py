"""Experiment orchestration: configs, seeded replications, records.

An experiment walks a schedule of sample sizes n (and, for scaling runs, a
list of scale factors a), builds the true and estimated fields on the box
[0, a * T_n]^d, and records per replication the sup distance, the Hausdorff
distance between the two set boundaries with its bound, the symmetric
difference volume with its weight, and the level-band volume with its bound.

Determinism contract: a record is a pure function of (config, n, a,
replication index); replication seeds are base_seed + replication index, so
adding replications never perturbs earlier ones, and the worker count never
changes any output except the wall_ms timing column.

Config files are TOML with strict unknown-key rejection and a versioned
``spec_version`` key; records are CSV with a fixed header and floats at 17
significant digits (lossless for float64).
"""

from __future__ import annotations

import csv
import enum
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .distributions import (
    AnalyticModel,
    cdf_field,
    eval_cdf,
    make_model,
    sample,
    scale_model,
)
from .ecdf import ecdf_eval_grid, sup_distance
from .errors import ConfigurationError, HypothesisGateError, ParameterError
from .grids import GridSpec, ScalarField
from .levelset import extract_boundary, plug_in_levelset, scale_sample
from .metrics import band_volume, hausdorff, sym_diff_volume
from .theory import (
    TheoryConstants,
    band_volume_bound,
    compute_constants,
    eps_n,
    hausdorff_bound,
    rate_pn,
    rate_pn_supnorm,
    RateSchedule,
)

RECORD_COLUMNS = (
    "n,a,T_n,h,supnorm,d_H,d_H_bound,violation,d_lambda,p_n,p_n_d_lambda,"
    "band_vol,band_vol_bound,seed,wall_ms"
)


class ExperimentKind(enum.Enum):
    HAUSDORFF = "hausdorff"
    VOLUME = "volume"
    SCALING = "scaling"
    BOUNDS = "bounds"


class EstimatorMode(enum.Enum):
    ECDF = "ecdf"
    PERFECT = "perfect"
    PERTURBED = "perturbed"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    model: AnalyticModel
    c: float
    r: float
    zeta: float
    T0: float
    cells: int
    tau: float
    ns: tuple[int, ...]
    replications: int
    base_seed: int
    mode: EstimatorMode
    perturb_amplitude: float
    p: float
    beta_v: float
    delta: float
    route: str
    a_values: tuple[float, ...]
    scan_cells: int
    max_refinements: int
    output: str | None = None

    def rate_schedule(self) -> RateSchedule:
        return RateSchedule(
            dim=self.model.dim,
            p=self.p,
            T0=self.T0,
            tau=self.tau,
            beta_v=self.beta_v,
            delta=self.delta,
        )

    def weight_rule(self, a: float = 1.0):
        """The p_n rule for this config's route at scale a."""
        if self.route == "supnorm":
            return rate_pn_supnorm(
                self.model.dim, self.p, self.beta_v, self.tau, self.delta, a
            )
        return rate_pn(self.rate_schedule(), a)

    def integral_speed(self, n: int) -> float:
        """The integral-distance speed the route entitles us to: v_n for the
        integral route, w_n = v_n^p / T_n^d (unit scale) for the sup-norm
        route."""
        if self.route == "supnorm":
            return float(n) ** (self.p * self.beta_v - self.model.dim * self.tau)
        return float(n) ** self.beta_v


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    a: float
    T_n: float
    h: float
    supnorm: float
    d_H: float
    d_H_bound: float
    violation: bool
    d_lambda: float
    p_n: float
    p_n_d_lambda: float
    band_vol: float
    band_vol_bound: float
    seed: int
    wall_ms: float


# ---------------------------------------------------------------------------
# Config I/O
# ---------------------------------------------------------------------------

_SCHEMA = {
    None: {"spec_version", "kind", "output"},
    "model": {"family", "dim", "rates", "theta"},
    "levelset": {"c", "r", "zeta"},
    "grid": {"T0", "cells", "tau"},
    "sample": {
        "ns",
        "n_start",
        "n_factor",
        "n_count",
        "replications",
        "base_seed",
        "mode",
        "perturb_amplitude",
    },
    "rate": {"p", "beta_v", "delta", "route"},
    "scaling": {"a_values"},
    "constants": {"scan_cells", "max_refinements"},
}


def _reject_unknown(raw: dict, path: str | None = None):
    section = _SCHEMA.get(path)
    for key, value in raw.items():
        if isinstance(value, dict):
            if path is not None or key not in _SCHEMA:
                raise ConfigurationError(f"unknown config section [{key}]")
            _reject_unknown(value, key)
        else:
            where = f"[{path}] " if path else ""
            if section is None or key not in section:
                raise ConfigurationError(f"unknown config key {where}{key!r}")


def _need(raw: dict, section: str, key: str):
    try:
        return raw[section][key]
    except KeyError:
        raise ConfigurationError(f"missing config key [{section}] {key!r}") from None


def load_config(path) -> ExperimentConfig:
    """Parse, type-check and validate a TOML experiment config.

    Unknown keys are rejected by name; the level/box feasibility gate is
    enforced here so a bad configuration fails before any work is scheduled.
    """
    with open(Path(path), "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    _reject_unknown(raw)
    version = raw.get("spec_version")
    if version != 1:
        raise ConfigurationError(f"unsupported spec_version {version!r} (expected 1)")
    try:
        kind = ExperimentKind(raw.get("kind"))
    except ValueError:
        names = ", ".join(k.value for k in ExperimentKind)
        raise ConfigurationError(
            f"unknown kind {raw.get('kind')!r}; expected one of: {names}"
        ) from None

    model_raw = raw.get("model")
    if model_raw is None:
        raise ConfigurationError("missing config section [model]")
    try:
        model = make_model(
            model_raw.get("family"),
            model_raw.get("dim", 0),
            model_raw.get("rates", ()),
            model_raw.get("theta"),
        )
    except ParameterError as exc:
        raise ConfigurationError(f"[model] {exc}") from None

    c = float(_need(raw, "levelset", "c"))
    r = float(_need(raw, "levelset", "r"))
    zeta = float(_need(raw, "levelset", "zeta"))
    T0 = float(_need(raw, "grid", "T0"))
    cells = int(_need(raw, "grid", "cells"))
    tau = float(raw["grid"].get("tau", 0.0))

    sample_raw = raw.get("sample", {})
    if "ns" in sample_raw:
        ns = tuple(int(n) for n in sample_raw["ns"])
    elif {"n_start", "n_factor", "n_count"} <= sample_raw.keys():
        start, factor, count = (
            int(sample_raw["n_start"]),
            float(sample_raw["n_factor"]),
            int(sample_raw["n_count"]),
        )
        ns = tuple(int(round(start * factor**i)) for i in range(count))
    else:
        raise ConfigurationError(
            "missing [sample] schedule: give ns or n_start/n_factor/n_count"
        )
    replications = int(_need(raw, "sample", "replications"))
    base_seed = int(_need(raw, "sample", "base_seed"))
    try:
        mode = EstimatorMode(sample_raw.get("mode", "ecdf"))
    except ValueError:
        names = ", ".join(m.value for m in EstimatorMode)
        raise ConfigurationError(
            f"unknown estimator mode {sample_raw.get('mode')!r}; expected one of: {names}"
        ) from None
    perturb_amplitude = float(sample_raw.get("perturb_amplitude", 0.0))
    if mode is EstimatorMode.PERTURBED and not perturb_amplitude > 0:
        raise ConfigurationError(
            "[sample] perturb_amplitude must be > 0 in perturbed mode"
        )

    rate_raw = raw.get("rate", {})
    p = float(_need(raw, "rate", "p"))
    beta_v = float(_need(raw, "rate", "beta_v"))
    delta = float(rate_raw.get("delta", 0.05))
    route = rate_raw.get("route", "supnorm")
    if route not in ("supnorm", "integral"):
        raise ConfigurationError(f"unknown rate route {route!r}")

    a_values = tuple(float(a) for a in raw.get("scaling", {}).get("a_values", (1.0,)))
    constants_raw = raw.get("constants", {})
    scan_cells = int(constants_raw.get("scan_cells", 256))
    max_refinements = int(constants_raw.get("max_refinements", 3))

    config = ExperimentConfig(
        kind=kind,
        model=model,
        c=c,
        r=r,
        zeta=zeta,
        T0=T0,
        cells=cells,
        tau=tau,
        ns=ns,
        replications=replications,
        base_seed=base_seed,
        mode=mode,
        perturb_amplitude=perturb_amplitude,
        p=p,
        beta_v=beta_v,
        delta=delta,
        route=route,
        a_values=a_values,
        scan_cells=scan_cells,
        max_refinements=max_refinements,
        output=raw.get("output"),
    )
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig):
    """Structural checks plus the level/box feasibility gate."""
    if not 0 < config.c < 1:
        raise ConfigurationError(f"c must lie in (0, 1), got {config.c}")
    if not (config.r > 0 and config.zeta > 0):
        raise ConfigurationError(f"r and zeta must be > 0, got {config.r}, {config.zeta}")
    if not config.T0 > 0 or config.cells < 2 or config.tau < 0:
        raise ConfigurationError(
            f"bad grid: T0={config.T0}, cells={config.cells}, tau={config.tau}"
        )
    if not config.ns or any(n < 1 for n in config.ns):
        raise ConfigurationError(f"sample sizes must all be >= 1, got {config.ns}")
    if list(config.ns) != sorted(config.ns):
        raise ConfigurationError("sample sizes must be nondecreasing")
    if config.replications < 1:
        raise ConfigurationError(f"replications must be >= 1, got {config.replications}")
    if any(not a > 0 for a in config.a_values):
        raise ConfigurationError(f"scale factors must be > 0, got {config.a_values}")
    if config.scan_cells < 8 or config.max_refinements < 0:
        raise ConfigurationError(
            f"bad constants section: scan_cells={config.scan_cells}, "
            f"max_refinements={config.max_refinements}"
        )
    try:
        config.weight_rule()
    except ParameterError as exc:
        raise ConfigurationError(str(exc)) from None
    # Feasibility gate: every level within r of c must cut the smallest box,
    # so the boundary objects under study are nonempty at all schedule steps.
    d = config.model.dim
    top = eval_cdf(config.model, np.full(d, config.T0))
    low = eval_cdf(config.model, np.full(d, config.T0 / config.cells))
    if not (top > config.c + config.r and low < config.c - config.r):
        raise HypothesisGateError(
            f"level band [c-r, c+r] = [{config.c - config.r}, {config.c + config.r}] "
            f"does not cut the box: F at the far corner is {top:.6g}, near the "
            f"origin {low:.6g}; enlarge T0 or move c"
        )


def write_config(config: ExperimentConfig, path):
    """Serialize a config back to TOML; load_config(write_config(x)) == x."""
    lines = ["spec_version = 1", f'kind = "{config.kind.value}"']
    if config.output is not None:
        lines.append(f'output = "{config.output}"')
    lines += [
        "",
        "[model]",
        f'family = "{config.model.family.value}"',
        f"dim = {config.model.dim}",
        f"rates = [{', '.join(repr(r) for r in config.model.rates)}]",
        f"theta = {config.model.theta!r}",
        "",
        "[levelset]",
        f"c = {config.c!r}",
        f"r = {config.r!r}",
        f"zeta = {config.zeta!r}",
        "",
        "[grid]",
        f"T0 = {config.T0!r}",
        f"cells = {config.cells}",
        f"tau = {config.tau!r}",
        "",
        "[sample]",
        f"ns = [{', '.join(str(n) for n in config.ns)}]",
        f"replications = {config.replications}",
        f"base_seed = {config.base_seed}",
        f'mode = "{config.mode.value}"',
        f"perturb_amplitude = {config.perturb_amplitude!r}",
        "",
        "[rate]",
        f"p = {config.p!r}",
        f"beta_v = {config.beta_v!r}",
        f"delta = {config.delta!r}",
        f'route = "{config.route}"',
        "",
        "[scaling]",
        f"a_values = [{', '.join(repr(a) for a in config.a_values)}]",
        "",
        "[constants]",
        f"scan_cells = {config.scan_cells}",
        f"max_refinements = {config.max_refinements}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# The per-replication pipeline
# ---------------------------------------------------------------------------


def _perturbation(grid: GridSpec, amplitude: float, seed: int) -> np.ndarray:
    """A smooth seeded perturbation with sup norm equal to the amplitude:
    a product of per-axis sinusoids with random integer frequency (1..3
    half-periods over the box) and random phase."""
    rng = np.random.default_rng(seed)
    freqs = rng.integers(1, 4, size=grid.dim)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=grid.dim)
    verts = grid.axis_vertices()
    out = np.full(grid.vertex_shape, amplitude)
    for ax in range(grid.dim):
        wave = np.sin(freqs[ax] * np.pi * verts / grid.T + phases[ax])
        shape = [1] * grid.dim
        shape[ax] = wave.size
        out = out * wave.reshape(shape)
    return out


def _estimator_field(
    config: ExperimentConfig, truth: ScalarField, n: int, a: float, seed: int
) -> ScalarField:
    if config.mode is EstimatorMode.PERFECT:
        return truth
    if config.mode is EstimatorMode.PERTURBED:
        return ScalarField(
            truth.grid,
            truth.values + _perturbation(truth.grid, config.perturb_amplitude, seed),
        )
    base = sample(config.model, n, seed)
    scaled = base if a == 1.0 else scale_sample(base, a)
    return ecdf_eval_grid(scaled, truth.grid)


def run_record(
    config: ExperimentConfig, constants: TheoryConstants, n: int, a: float, rep: int
) -> ExperimentRecord:
    """Compute one experiment row. Pure given its arguments."""
    t_start = time.perf_counter()
    seed = config.base_seed + rep
    T_n = config.T0 * float(n) ** config.tau
    grid = GridSpec(config.model.dim, a * T_n, config.cells)
    truth = cdf_field(scale_model(config.model, a), grid)
    estimate = _estimator_field(config, truth, n, a, seed)

    supnorm = sup_distance(truth, estimate)
    mask_true = plug_in_levelset(truth, config.c)
    mask_est = plug_in_levelset(estimate, config.c)
    bound = hausdorff_bound(constants, supnorm, a)
    boundary_true = extract_boundary(mask_true)
    boundary_est = extract_boundary(mask_est)
    if boundary_true.is_empty or boundary_est.is_empty:
        # Flagged, not fatal: at small n the estimated set can fill or miss
        # the whole box. Such rows carry d_H = nan and never count as bound
        # violations.
        d_h = math.nan
        violation = False
    else:
        d_h = hausdorff(boundary_true, boundary_est)
        violation = d_h > bound + 2.0 * grid.cell_diameter

    d_lambda = sym_diff_volume(mask_true, mask_est)
    p_n = float(config.weight_rule(a)(n))
    eps = eps_n(p_n, config.integral_speed(n), config.p)
    band = band_volume(truth, config.c, eps)
    band_bound = a * band_volume_bound(constants, eps, config.model.dim, a * T_n)

    wall_ms = (time.perf_counter() - t_start) * 1e3
    return ExperimentRecord(
        n=n,
        a=a,
        T_n=T_n,
        h=grid.h,
        supnorm=supnorm,
        d_H=d_h,
        d_H_bound=bound,
        violation=violation,
        d_lambda=d_lambda,
        p_n=p_n,
        p_n_d_lambda=p_n * d_lambda,
        band_vol=band,
        band_vol_bound=band_bound,
        seed=seed,
        wall_ms=wall_ms,
    )


def _run_units(
    config: ExperimentConfig,
    units: list[tuple[int, float, int]],
    jobs: int = 1,
) -> list[ExperimentRecord]:
    constants = experiment_constants(config)
    if not constants.gate_ok:
        raise HypothesisGateError(
            f"gradient gate failed: m_grad = {constants.m_grad:.3g} over the tube"
        )
    if jobs <= 1:
        return [run_record(config, constants, *unit) for unit in units]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda u: run_record(config, constants, *u), units))


def experiment_constants(config: ExperimentConfig) -> TheoryConstants:
    return compute_constants(
        config.model,
        config.c,
        config.r,
        config.zeta,
        scan_cells=config.scan_cells,
        max_refinements=config.max_refinements,
    )


def run_hausdorff_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ExperimentRecord]:
    """Boundary-displacement experiment at scale 1: one record per (n,
    replication), ordered by (n, replication)."""
    units = [(n, 1.0, rep) for n in config.ns for rep in range(config.replications)]
    return _run_units(config, units, jobs)


def run_volume_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ExperimentRecord]:
    """Symmetric-difference volume experiment at scale 1; the rows of
    interest are d_lambda, p_n and their product."""
    units = [(n, 1.0, rep) for n in config.ns for rep in range(config.replications)]
    return _run_units(config, units, jobs)


def run_scaling_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ExperimentRecord]:
    """The full pipeline at every scale factor in the config (scale 1 is
    always included as the ratio baseline), ordered by (n, a, replication).
    Within a replication the same base sample is scaled to every a, so
    scale-commutation ratios are exact."""
    a_values = set(config.a_values) | {1.0}
    a_values = tuple(sorted(a_values))
    units = [
        (n, a, rep)
        for n in config.ns
        for a in a_values
        for rep in range(config.replications)
    ]
    return _run_units(config, units, jobs)


# ---------------------------------------------------------------------------
# Records I/O and diagnostics
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def write_records(records: list[ExperimentRecord], path):
    """CSV with the fixed column order of RECORD_COLUMNS; floats carry 17
    significant digits so they round-trip exactly."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS.split(","))
        for rec in records:
            writer.writerow(
                _fmt(getattr(rec, col)) for col in RECORD_COLUMNS.split(",")
            )


def load_records(path) -> list[ExperimentRecord]:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RECORD_COLUMNS.split(","):
            raise ConfigurationError(f"{path}: unexpected records header {header}")
        out = []
        for row in reader:
            vals = dict(zip(header, row))
            out.append(
                ExperimentRecord(
                    n=int(vals["n"]),
                    a=float(vals["a"]),
                    T_n=float(vals["T_n"]),
                    h=float(vals["h"]),
                    supnorm=float(vals["supnorm"]),
                    d_H=float(vals["d_H"]),
                    d_H_bound=float(vals["d_H_bound"]),
                    violation=vals["violation"] == "1",
                    d_lambda=float(vals["d_lambda"]),
                    p_n=float(vals["p_n"]),
                    p_n_d_lambda=float(vals["p_n_d_lambda"]),
                    band_vol=float(vals["band_vol"]),
                    band_vol_bound=float(vals["band_vol_bound"]),
                    seed=int(vals["seed"]),
                    wall_ms=float(vals["wall_ms"]),
                )
            )
    return out


def fit_loglog_slope(xs, ys) -> float:
    """Ordinary least-squares slope of log y on log x."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.size < 3:
        raise ParameterError("need at least 3 (x, y) pairs of equal length")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("log-log fit needs strictly positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
