"""Command-line workflows: fit, predict, classify, benchmark, cv,
hyper-grid.

Each command is a pure function of (config, input files, seed): model
artifacts and metric columns are reproduced byte-for-byte on rerun (the
benchmark report's wall-clock column is the one documented exception).
Exit codes: 0 success, 1 input/config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .benchmarks import auc, rmse
from .config import RunConfig, load_config
from .errors import ConfigError
from .evaluate import cross_validate, default_grid, grid_search, run_benchmark
from .model import Dataset, Hyperparams, predict
from .probit import predict_prob, probability_grid, run_probit_chain
from .sampler import load_chain, run_chain, save_chain

__all__ = ["main", "cmd_fit", "cmd_predict", "cmd_classify",
           "cmd_benchmark", "cmd_cv", "cmd_hyper_grid"]


def _outdir(config: RunConfig) -> Path:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(value, name: str):
    if value is None:
        raise ConfigError(f"{name} is required for this command")
    return value


def _load_dataset(config: RunConfig) -> Dataset:
    path = _require(config.data, "data")
    response = _require(config.response, "response")
    return Dataset.from_csv(path, response)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_fit(config: RunConfig) -> Path:
    """Fit the regression model; writes chain.jsonl and fit_report.csv."""
    data = _load_dataset(config)
    chain = run_chain(data, config.hyper)
    out = _outdir(config)
    save_chain(chain, out / "chain.jsonl")
    mean, _, _ = predict(chain, data.X)
    report = [
        ("n_obs", data.n_obs),
        ("n_features", data.n_features),
        ("posterior_mean_n_atoms",
         _fmt(float(np.mean([s.n_atoms for s in chain.samples])))),
        ("posterior_mean_sigma2",
         _fmt(float(np.mean([s.sigma2 for s in chain.samples])))),
        ("train_rmse", _fmt(rmse(data.y, mean))),
        ("seed", config.hyper.seed),
    ]
    _write_csv(out / "fit_report.csv", [k for k, _ in report],
               [[v for _, v in report]])
    print(f"fit: {len(chain.samples)} samples retained -> {out}")
    return out / "chain.jsonl"


def cmd_predict(config: RunConfig) -> Path:
    """Predict from a saved chain; writes predictions.csv."""
    chain_path = _require(config.chain, "chain")
    data_path = _require(config.data, "data")
    chain = load_chain(chain_path)
    # Prediction input: headered numeric CSV of predictors only, or one
    # that still carries the response column (ignored when named).
    if config.response is not None:
        data = Dataset.from_csv(data_path, config.response)
        X = data.X
    else:
        X = _load_matrix(data_path, chain.meta.get("n_features"))
    out = _outdir(config)
    if chain.link == "probit":
        probs = predict_prob(chain, X)
        _write_csv(out / "predictions.csv", ["prob"],
                   [[_fmt(v)] for v in probs])
    else:
        mean, lower, upper = predict(chain, X)
        _write_csv(out / "predictions.csv", ["mean", "lower", "upper"],
                   [[_fmt(m), _fmt(lo), _fmt(hi)]
                    for m, lo, hi in zip(mean, lower, upper)])
    print(f"predict: {X.shape[0]} rows -> {out / 'predictions.csv'}")
    return out / "predictions.csv"


def _load_matrix(path, expect_cols=None) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"{path}: no data rows")
    if expect_cols is not None and X.shape[1] != expect_cols:
        raise ValueError(f"{path}: expected {expect_cols} predictor columns, "
                         f"got {X.shape[1]} (header: {header})")
    return X


def cmd_classify(config: RunConfig) -> Path:
    """Fit the probit classifier; writes chain.jsonl and classify_report.csv."""
    data = _load_dataset(config)
    chain = run_probit_chain(data, config.hyper)
    out = _outdir(config)
    save_chain(chain, out / "chain.jsonl")
    probs = predict_prob(chain, data.X)
    report = [
        ("n_obs", data.n_obs),
        ("n_features", data.n_features),
        ("posterior_mean_n_atoms",
         _fmt(float(np.mean([s.n_atoms for s in chain.samples])))),
        ("train_auc", _fmt(auc(data.y, probs))
         if len(np.unique(data.y)) == 2 else ""),
        ("seed", config.hyper.seed),
    ]
    _write_csv(out / "classify_report.csv", [k for k, _ in report],
               [[v for _, v in report]])
    if config.grid_export is not None:
        if data.n_features != 2:
            raise ConfigError("grid export needs exactly two predictors")
        bounds1 = (data.col_min[0], data.col_max[0])
        bounds2 = (data.col_min[1], data.col_max[1])
        grid = probability_grid(chain, bounds1, bounds2,
                                config.grid_resolution)
        _write_csv(Path(config.grid_export), ["x1", "x2", "prob"],
                   [[_fmt(a), _fmt(b), _fmt(c)] for a, b, c in grid])
    print(f"classify: {len(chain.samples)} samples retained -> {out}")
    return out / "chain.jsonl"


def cmd_benchmark(config: RunConfig) -> Path:
    """Run the synthetic benchmark sweep; writes benchmark.csv."""
    if not config.benchmark_specs:
        raise ConfigError("benchmark requires at least one spec")
    rows = run_benchmark(config.benchmark_specs, config.hyper,
                         config.benchmark_replicates, config.workers)
    out = _outdir(config)
    path = out / "benchmark.csv"
    _write_csv(path, ["function", "rsnr", "replicate", "rmse", "runtime_s"],
               [[fid, _fmt(rsnr), rep, _fmt(score), _fmt(runtime)]
                for fid, rsnr, rep, score, runtime in rows])
    print(f"benchmark: {len(rows)} rows -> {path}")
    return path


def cmd_cv(config: RunConfig) -> Path:
    """Repeated k-fold cross-validation; writes cv_report.csv."""
    data = _load_dataset(config)
    task = "classify" if config.task == "classify" else "fit"
    per_repeat, fold_rows = cross_validate(
        data, config.hyper, config.cv_folds, config.cv_repeats,
        task=task, workers=config.workers)
    metric = "auc" if task == "classify" else "rmse"
    out = _outdir(config)
    path = out / "cv_report.csv"
    rows = [[f"repeat{r}", f, _fmt(score)] for r, f, score in fold_rows]
    valid = [s for s in per_repeat if not math.isnan(s)]
    mean = float(np.mean(valid)) if valid else math.nan
    sd = float(np.std(valid, ddof=1)) if len(valid) > 1 else math.nan
    rows.append(["mean", "", _fmt(mean)])
    rows.append(["sd", "", _fmt(sd)])
    _write_csv(path, ["repeat", "fold", metric], rows)
    print(f"cv: {metric} mean={mean:.6g} sd={sd:.6g} -> {path}")
    return path


def cmd_hyper_grid(config: RunConfig) -> Hyperparams:
    """Grid-search S/order/expansion by CV; writes grid_report.csv."""
    data = _load_dataset(config)
    base = config.hyper
    if (config.grid_degrees is None and config.grid_max_interaction is None
            and config.grid_expansion is None):
        grid = default_grid(base)
    else:
        degree_sets = config.grid_degrees or [base.degrees]
        orders = config.grid_max_interaction or [base.max_interaction]
        expansions = config.grid_expansion or [base.expansion]
        grid = [replace(base, degrees=d, max_interaction=k, expansion=e)
                for d in degree_sets for k in orders for e in expansions]
    task = "classify" if config.task == "classify" else "fit"
    best, scores = grid_search(data, grid, config.cv_folds,
                               config.grid_repeats, task=task,
                               workers=config.workers)
    out = _outdir(config)
    _write_csv(out / "grid_report.csv",
               ["degrees", "max_interaction", "expansion", "cv_score"],
               [["|".join(map(str, h.degrees)), h.max_interaction,
                 _fmt(h.expansion), _fmt(s)]
                for h, s in zip(grid, scores)])
    print(f"hyper-grid: best degrees={best.degrees} "
          f"max_interaction={best.max_interaction} expansion={best.expansion}")
    return best


_COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "classify": cmd_classify,
             "benchmark": cmd_benchmark, "cv": cmd_cv,
             "hyper-grid": cmd_hyper_grid}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayespline",
        description="Adaptive B-spline regression and classification")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="YAML configuration file")
        cmd.add_argument("--data", help="input CSV path")
        cmd.add_argument("--response", help="response column name")
        cmd.add_argument("--chain", help="chain file (predict)")
        cmd.add_argument("--output", help="output directory")
        cmd.add_argument("--seed", type=int, help="RNG seed override")
        cmd.add_argument("--iters", type=int, help="n_iter override")
        cmd.add_argument("--burn-in", type=int, help="burn_in override")
        cmd.add_argument("--thin", type=int, help="thin override")
        cmd.add_argument("--workers", type=int, help="parallel tasks")
        cmd.add_argument("--folds", type=int, help="CV folds override")
        cmd.add_argument("--repeats", type=int, help="CV repeats override")
        cmd.add_argument("--replicates", type=int,
                         help="benchmark replicates override")
        cmd.add_argument("--grid-export", help="probability grid CSV path")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {"task": args.command}
    hyper: dict = {}
    for flag, key in (("seed", "seed"), ("iters", "n_iter"),
                      ("burn_in", "burn_in"), ("thin", "thin")):
        value = getattr(args, flag)
        if value is not None:
            hyper[key] = value
    if hyper:
        overrides["hyper"] = hyper
    for flag, key in (("data", "data"), ("response", "response"),
                      ("chain", "chain"), ("output", "output"),
                      ("workers", "workers"), ("folds", "cv_folds"),
                      ("repeats", "cv_repeats"),
                      ("replicates", "benchmark_replicates"),
                      ("grid_export", "grid_export")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    return overrides


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides_from_args(args))
        _COMMANDS[args.command](config)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
