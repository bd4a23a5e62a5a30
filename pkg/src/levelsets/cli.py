"""Command-line interface.

Subcommands::

    estimate       one-shot plug-in level set from a CSV sample
    bounds         print the tube constants for a configured model
    hausdorff-exp  boundary-displacement experiment over a config
    volume-exp     symmetric-difference volume experiment over a config
    scaling-exp    both criteria across data scale factors
    slope          log-log slope fit over a records file

Exit codes: 0 success, 2 configuration error, 3 hypothesis-gate failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .ecdf import ecdf_eval_grid, load_sample_csv
from .errors import ConfigurationError, HypothesisGateError, ParameterError
from .grids import GridSpec
from .harness import (
    ExperimentConfig,
    experiment_constants,
    fit_loglog_slope,
    load_config,
    load_records,
    run_hausdorff_experiment,
    run_scaling_experiment,
    run_volume_experiment,
    write_records,
)
from .levelset import extract_boundary, plug_in_levelset, write_boundary_csv, write_mask_rle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelsets",
        description="Plug-in level-set estimation and convergence experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="plug-in level set from a CSV sample")
    est.add_argument("--input", required=True, help="sample CSV: d columns, no header")
    est.add_argument("--level", type=float, required=True, help="level c in (0, 1)")
    est.add_argument("--T", type=float, required=True, help="box extent")
    est.add_argument("--cells", type=int, required=True, help="grid cells per axis")
    est.add_argument("--output", required=True, help="boundary points CSV to write")
    est.add_argument("--mask-output", help="optional RLE mask file to write")

    bounds = sub.add_parser("bounds", help="print tube constants for a config")
    bounds.add_argument("--config", required=True)

    for name, help_text in (
        ("hausdorff-exp", "boundary-displacement experiment"),
        ("volume-exp", "symmetric-difference volume experiment"),
        ("scaling-exp", "scale-factor experiment"),
    ):
        exp = sub.add_parser(name, help=help_text)
        exp.add_argument("--config", required=True)
        exp.add_argument("--output", required=True, help="output directory")
        exp.add_argument("--jobs", type=int, default=1)

    slope = sub.add_parser("slope", help="log-log slope over a records file")
    slope.add_argument("--records", required=True)
    slope.add_argument("--x", default="n", help="x column (default n)")
    slope.add_argument("--y", default="supnorm", help="y column (default supnorm)")
    slope.add_argument(
        "--no-median",
        action="store_true",
        help="fit on raw rows instead of per-x medians",
    )
    return parser


def _cmd_estimate(args) -> int:
    sample = load_sample_csv(args.input)
    grid = GridSpec(sample.dim, args.T, args.cells)
    field = ecdf_eval_grid(sample, grid)
    mask = plug_in_levelset(field, args.level)
    boundary = extract_boundary(mask)
    write_boundary_csv(boundary, args.output)
    if args.mask_output:
        write_mask_rle(mask, args.mask_output)
    print(
        f"n={sample.n} dim={sample.dim} T={grid.T} cells={grid.cells} "
        f"inside_cells={int(np.count_nonzero(mask.inside))} "
        f"boundary_points={boundary.count}"
    )
    return EXIT_OK


def _constants_lines(config: ExperimentConfig) -> list[str]:
    constants = experiment_constants(config)
    lines = [
        f"c = {constants.c!r}",
        f"r = {constants.r!r}",
        f"zeta = {constants.zeta!r}",
        f"m_grad = {constants.m_grad!r}",
        f"m_grad_refined = {constants.m_grad_refined!r}",
        f"M_H = {constants.M_H!r}",
        f"M_H_refined = {constants.M_H_refined!r}",
        f"A = {constants.A!r}",
        f"gamma = {constants.gamma!r}",
        f"gate_ok = {constants.gate_ok}",
    ]
    return lines


def _cmd_bounds(args) -> int:
    config = load_config(args.config)
    for line in _constants_lines(config):
        print(line)
    return EXIT_OK


_RUNNERS = {
    "hausdorff-exp": run_hausdorff_experiment,
    "volume-exp": run_volume_experiment,
    "scaling-exp": run_scaling_experiment,
}


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    records = _RUNNERS[args.command](config, jobs=args.jobs)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_records(records, outdir / "records.csv")
    (outdir / "constants.txt").write_text("\n".join(_constants_lines(config)) + "\n")
    print(f"wrote {len(records)} records to {outdir / 'records.csv'}")
    return EXIT_OK


def _cmd_slope(args) -> int:
    from .harness import RECORD_COLUMNS

    columns = RECORD_COLUMNS.split(",")
    for col in (args.x, args.y):
        if col not in columns:
            raise ParameterError(f"unknown records column {col!r}; have {columns}")
    records = load_records(args.records)
    xs = np.array([getattr(rec, args.x) for rec in records], dtype=np.float64)
    ys = np.array([getattr(rec, args.y) for rec in records], dtype=np.float64)
    if not args.no_median:
        levels = np.unique(xs)
        ys = np.array([np.median(ys[xs == lvl]) for lvl in levels])
        xs = levels
    print(f"{fit_loglog_slope(xs, ys):.6g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "estimate": _cmd_estimate,
        "bounds": _cmd_bounds,
        "hausdorff-exp": _cmd_experiment,
        "volume-exp": _cmd_experiment,
        "scaling-exp": _cmd_experiment,
        "slope": _cmd_slope,
    }
    try:
        return handlers[args.command](args)
    except HypothesisGateError as exc:
        print(f"hypothesis gate: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (ConfigurationError, ParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
