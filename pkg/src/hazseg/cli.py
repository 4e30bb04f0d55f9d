"""Command-line surface: fit, path, bootstrap, simulate and km subcommands.

All randomness flows from --seed (fixed default, so runs are reproducible by
default); given identical inputs and flags, every command writes
byte-identical output files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import CutGrid, make_cut_grid, read_survival_file
from .data import sufficient_stats as compute_stats
from .inference import bootstrap_bands, extract_segments, kaplan_meier
from .selection import (
    attach_bic,
    bic,
    cross_validate,
    model_dimension,
    penalty_grid,
    regularization_path,
    select_penalty,
)
from .simulate import (
    CUT_COUNT_BUCKETS,
    monte_carlo_experiment,
    scenario_pch,
    scenario_weibull,
    simulate_dataset,
)
from .solver import FitOptions, ridge_fit
from .tableio import write_json, write_table

DEFAULT_SEED = 12345


def _parse_cuts(expr: str) -> CutGrid:
    if ":" in expr:
        parts = expr.split(":")
        if len(parts) != 3:
            raise ValueError(f"cut range must be start:end:step, got {expr!r}")
        start, end, step = (float(p) for p in parts)
        return make_cut_grid(start=start, end=end, step=step)
    return make_cut_grid([float(p) for p in expr.split(",") if p.strip()])


def _parse_time_grid(expr: str) -> np.ndarray:
    parts = expr.split(":")
    if len(parts) != 3:
        raise ValueError(f"time grid must be start:end:step, got {expr!r}")
    start, end, step = (float(p) for p in parts)
    if step <= 0.0 or end <= start:
        raise ValueError("time grid needs end > start and step > 0")
    count = int(np.floor((end - start) / step * (1.0 + 1e-12)))
    return start + step * np.arange(count + 1)


def _add_common(p: argparse.ArgumentParser, cuts: bool = True):
    p.add_argument("--input", required=True, help="delimited survival data file")
    p.add_argument("--time-col", default="time")
    p.add_argument("--status-col", default="status")
    if cuts:
        p.add_argument("--cuts", required=True,
                       help="cut grid: comma list '20,40,70' or range 'start:end:step'")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _add_penalty(p: argparse.ArgumentParser):
    p.add_argument("--pen-min", type=float, default=0.1)
    p.add_argument("--pen-max", type=float, default=1000.0)
    p.add_argument("--pen-count", type=int, default=100)
    p.add_argument("--criterion", choices=("bic", "cv"), default="bic")
    p.add_argument("--folds", type=int, default=10)


def _add_fit_options(p: argparse.ArgumentParser):
    p.add_argument("--newton-tol", type=float, default=FitOptions.newton_tol)
    p.add_argument("--newton-max-iter", type=int, default=FitOptions.newton_max_iter)
    p.add_argument("--outer-tol", type=float, default=FitOptions.outer_tol)
    p.add_argument("--outer-max-iter", type=int, default=FitOptions.outer_max_iter)
    p.add_argument("--delta", type=float, default=FitOptions.delta)


def _fit_options(args) -> FitOptions:
    return FitOptions(
        newton_tol=args.newton_tol,
        newton_max_iter=args.newton_max_iter,
        outer_tol=args.outer_tol,
        outer_max_iter=args.outer_max_iter,
        delta=args.delta,
    )


def _resolved(args, keys) -> dict:
    return {k.replace("_", "-"): getattr(args, k) for k in keys if getattr(args, k) is not None}


def _meta(args, command: str, keys) -> dict:
    meta = {"version": __version__, "command": command}
    meta.update(_resolved(args, keys))
    return meta


def _load(args):
    data = read_survival_file(args.input, args.time_col, args.status_col)
    grid = _parse_cuts(args.cuts)
    return data, grid


def _time_grid(args, data) -> np.ndarray:
    if getattr(args, "time_grid", None):
        return _parse_time_grid(args.time_grid)
    return np.linspace(0.0, data.max_time, 201)


def _select_on_full_data(data, grid, stats, pens, args, opts):
    path = regularization_path(stats, pens, opts)
    if args.criterion == "cv":
        path.cv = cross_validate(data, grid, pens, k=args.folds, seed=args.seed, opts=opts)
    attach_bic(path, data.n)
    pen, fit, index = select_penalty(path, args.criterion)
    return path, pen, fit, index


_FIT_KEYS = ("input", "time_col", "status_col", "cuts", "pen_min", "pen_max",
             "pen_count", "criterion", "folds", "seed")


def cmd_fit(args) -> int:
    data, grid = _load(args)
    stats = compute_stats(data, grid)
    opts = _fit_options(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, "fit", _FIT_KEYS + ("ridge", "pen", "no_refit"))
    tgrid = _time_grid(args, data)
    if args.ridge:
        if args.pen is None:
            raise ValueError("--ridge needs an explicit --pen")
        fit = ridge_fit(stats, args.pen, opts)
        record = {
            "estimator": "ridge",
            "penalty": args.pen,
            "loglik": fit.loglik,
            "converged": fit.converged,
            "log_rates": [float(v) for v in fit.a],
            "cuts": [float(c) for c in grid.cuts],
        }
        hazard = np.exp(fit.a)[grid.bin_index(tgrid)]
    else:
        _, pen, fit, _ = _select_on_full_data(data, grid, stats, pens_from(args), args, opts)
        seg = extract_segments(fit, grid, stats, refit=not args.no_refit)
        record = {
            "estimator": "adaptive-ridge",
            "penalty": pen,
            "criterion": args.criterion,
            "d": model_dimension(fit),
            "loglik": fit.loglik,
            "bic": bic(fit, data.n),
            "converged": fit.converged,
            "breakpoints": [float(b) for b in seg.breakpoints],
            "rates": [float(r) for r in seg.rates],
        }
        hazard = seg.hazard(tgrid)
    write_json(out / "segments.json", record, meta)
    write_table(out / "hazard.csv",
                {"t": [float(t) for t in tgrid], "hazard": [float(h) for h in hazard]},
                meta)
    return 0


def pens_from(args) -> np.ndarray:
    return penalty_grid(args.pen_min, args.pen_max, args.pen_count)


def cmd_path(args) -> int:
    data, grid = _load(args)
    stats = compute_stats(data, grid)
    opts = _fit_options(args)
    pens = pens_from(args)
    path, pen, _, _ = _select_on_full_data(data, grid, stats, pens, args, opts)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, "path", _FIT_KEYS)
    meta["selected-penalty"] = pen
    columns = {
        "penalty": [float(p) for p in path.penalties],
        "loglik": [f.loglik if f else float("nan") for f in path.fits],
        "d": [model_dimension(f) if f else -1 for f in path.fits],
        "bic": [float(v) for v in path.bic],
    }
    if path.cv is not None:
        columns["cv"] = [float(v) for v in path.cv]
    write_table(out / "path.csv", columns, meta)
    return 0


def cmd_bootstrap(args) -> int:
    if args.boot < 10:
        raise ValueError("--boot below 10 gives meaningless bands; use at least 10")
    data, grid = _load(args)
    opts = _fit_options(args)
    bands = bootstrap_bands(
        data, grid, pens_from(args),
        criterion=args.criterion, n_boot=args.boot,
        time_grid=_time_grid(args, data), seed=args.seed, opts=opts,
        refit=not args.no_refit, cv_folds=args.folds, level=args.level,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, "bootstrap", _FIT_KEYS + ("boot", "level", "no_refit"))
    write_table(
        out / "bands.csv",
        {
            "t": [float(v) for v in bands.times],
            "median": [float(v) for v in bands.median],
            "lower": [float(v) for v in bands.lower],
            "upper": [float(v) for v in bands.upper],
        },
        meta,
    )
    return 0


def cmd_km(args) -> int:
    data = read_survival_file(args.input, args.time_col, args.status_col)
    curve = kaplan_meier(data, level=args.level)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, "km", ("input", "time_col", "status_col", "level", "seed"))
    write_table(
        out / "km.csv",
        {
            "t": [0.0] + [float(v) for v in curve.times],
            "survival": [1.0] + [float(v) for v in curve.survival],
            "lower": [1.0] + [float(v) for v in curve.lower],
            "upper": [1.0] + [float(v) for v in curve.upper],
        },
        meta,
    )
    return 0


def cmd_simulate(args) -> int:
    model = scenario_pch() if args.scenario == "pch" else scenario_weibull()
    grid = _parse_cuts(args.cuts)
    pens = pens_from(args)
    opts = _fit_options(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(args, "simulate",
                 ("scenario", "n", "reps", "criterion", "cuts", "pen_min", "pen_max",
                  "pen_count", "folds", "seed", "ridge_pen"))
    if args.sample_out or args.truth_out:
        if args.sample_out:
            rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(2**32 - 1,)))
            data = simulate_dataset(model, args.n, rng)
            write_table(args.sample_out,
                        {"time": [float(t) for t in data.time],
                         "status": [int(s) for s in data.status]},
                        meta)
        if args.truth_out:
            horizon = 80.0 if args.scenario == "pch" else 60.0
            tgrid = np.linspace(0.0, horizon, 401)
            write_table(args.truth_out,
                        {"t": [float(t) for t in tgrid],
                         "hazard": [float(h) for h in np.asarray(model.hazard.hazard(tgrid))]},
                        meta)
    summary = monte_carlo_experiment(
        model, args.n, args.reps, args.criterion, grid, pens,
        seed=args.seed, opts=opts, ridge_pen=args.ridge_pen, cv_folds=args.folds,
        refit=not args.no_refit,
    )
    columns = {
        "cuts_found": list(CUT_COUNT_BUCKETS),
        "proportion": [summary.cut_count_proportions[b] for b in CUT_COUNT_BUCKETS],
    }
    write_table(out / "simulate_report.csv", columns, meta)
    record = {
        "n": summary.n,
        "reps": summary.reps,
        "criterion": summary.criterion,
        "cut_count_proportions": summary.cut_count_proportions,
        "mean_tv": summary.mean_tv,
        "mean_tv_ridge": summary.mean_tv_ridge,
        "failures": summary.failures,
    }
    write_json(out / "simulate_summary.json", record, meta)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazseg",
        description="Piecewise-constant hazard estimation with automatic cut selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit, select a penalty, extract segments")
    _add_common(p_fit)
    _add_penalty(p_fit)
    _add_fit_options(p_fit)
    p_fit.add_argument("--ridge", action="store_true", help="fixed-weight ridge variant")
    p_fit.add_argument("--pen", type=float, default=None, help="penalty for --ridge")
    p_fit.add_argument("--no-refit", action="store_true")
    p_fit.add_argument("--time-grid", default=None, help="start:end:step for curve sampling")
    p_fit.set_defaults(func=cmd_fit)

    p_path = sub.add_parser("path", help="export the regularization path table")
    _add_common(p_path)
    _add_penalty(p_path)
    _add_fit_options(p_path)
    p_path.set_defaults(func=cmd_path)

    p_boot = sub.add_parser("bootstrap", help="pointwise survival bands by resampling")
    _add_common(p_boot)
    _add_penalty(p_boot)
    _add_fit_options(p_boot)
    p_boot.add_argument("--boot", type=int, default=100)
    p_boot.add_argument("--level", type=float, default=0.95)
    p_boot.add_argument("--no-refit", action="store_true")
    p_boot.add_argument("--time-grid", default=None)
    p_boot.set_defaults(func=cmd_bootstrap)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo benchmark on a known scenario")
    p_sim.add_argument("--scenario", choices=("pch", "weibull"), required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--reps", type=int, required=True)
    p_sim.add_argument("--cuts", default="1:100:1")
    p_sim.add_argument("--ridge-pen", type=float, default=None)
    p_sim.add_argument("--no-refit", action="store_true")
    p_sim.add_argument("--sample-out", default=None,
                       help="also write one simulated dataset to this file")
    p_sim.add_argument("--truth-out", default=None,
                       help="also write the true hazard curve to this file")
    p_sim.add_argument("--out-dir", default=".")
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_penalty(p_sim)
    _add_fit_options(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_km = sub.add_parser("km", help="Kaplan-Meier curve with pointwise interval")
    _add_common(p_km, cuts=False)
    p_km.add_argument("--level", type=float, default=0.95)
    p_km.set_defaults(func=cmd_km)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"hazseg {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
