"""Cross-validation, benchmark sweeps and hyperparameter grid search.

All sweeps derive per-task seeds from the base seed, so results are
reproducible and independent of worker count; failed fits score NaN and
are skipped rather than aborting a sweep.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import replace
from time import perf_counter

import numpy as np

from .benchmarks import SyntheticSpec, auc, generate_dataset, rmse
from .errors import ConfigError
from .model import Dataset, Hyperparams, predict
from .probit import predict_prob, run_probit_chain
from .sampler import run_chain

__all__ = [
    "kfold_indices",
    "stratified_kfold_indices",
    "cross_validate",
    "run_benchmark",
    "grid_search",
    "default_grid",
]


def kfold_indices(n: int, folds: int, rng: np.random.Generator):
    """Random partition of ``range(n)`` into ``folds`` test-index blocks."""
    if folds < 2:
        raise ConfigError("folds must be >= 2")
    if folds > n:
        raise ConfigError(f"folds ({folds}) cannot exceed n ({n})")
    return np.array_split(rng.permutation(n), folds)


def stratified_kfold_indices(labels, folds: int, rng: np.random.Generator):
    """Class-stratified partition; each fold mirrors the label balance."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if folds < 2:
        raise ConfigError("folds must be >= 2")
    if folds > n:
        raise ConfigError(f"folds ({folds}) cannot exceed n ({n})")
    assignment = np.empty(n, dtype=np.int64)
    for value in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == value))
        assignment[idx] = np.arange(idx.shape[0]) % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def _fit_score(train: Dataset, X_test, y_test, hyper: Hyperparams,
               task: str) -> float:
    if task == "classify":
        chain = run_probit_chain(train, hyper)
        return auc(y_test, predict_prob(chain, X_test))
    chain = run_chain(train, hyper)
    mean, _, _ = predict(chain, X_test)
    return rmse(y_test, mean)


def _cv_job(data: Dataset, hyper: Hyperparams, task: str,
            test_idx: np.ndarray) -> float:
    mask = np.ones(data.n_obs, dtype=bool)
    mask[test_idx] = False
    train = Dataset(data.X[mask], data.y[mask])
    try:
        return _fit_score(train, data.X[test_idx], data.y[test_idx],
                          hyper, task)
    except Exception:
        return math.nan


def _run_jobs(jobs, workers: int) -> dict:
    """Run ``(key, func, args)`` jobs, possibly in parallel; returns by key."""
    if workers <= 1:
        return {key: func(*args) for key, func, args in jobs}
    out = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(func, *args): key for key, func, args in jobs}
        for fut in as_completed(futures):
            out[futures[fut]] = fut.result()
    return out


def cross_validate(data: Dataset, hyper: Hyperparams, folds: int,
                   repeats: int, task: str = "fit", workers: int = 1):
    """Repeated k-fold cross-validation.

    Fold assignments for repeat ``r`` are seeded by ``hyper.seed + r``
    (stratified by class for the classify task); fits get distinct derived
    seeds. Returns ``(per_repeat_scores, fold_rows)`` where each fold row
    is ``(repeat, fold, score)`` and a repeat's score is the mean over its
    folds (NaN folds skipped).
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    jobs = []
    for r in range(repeats):
        rng = np.random.default_rng(hyper.seed + r)
        if task == "classify":
            split = stratified_kfold_indices(data.y, folds, rng)
        else:
            split = kfold_indices(data.n_obs, folds, rng)
        for f, test_idx in enumerate(split):
            fit_hyper = replace(hyper, seed=hyper.seed + 100_003 * (r + 1) + f)
            jobs.append(((r, f), _cv_job, (data, fit_hyper, task, test_idx)))
    results = _run_jobs(jobs, workers)
    fold_rows = [(r, f, results[(r, f)]) for r, f in sorted(results)]
    per_repeat = []
    for r in range(repeats):
        scores = [s for rr, _, s in fold_rows if rr == r and not math.isnan(s)]
        per_repeat.append(float(np.mean(scores)) if scores else math.nan)
    return per_repeat, fold_rows


def _benchmark_job(spec: SyntheticSpec, hyper: Hyperparams,
                   replicate: int) -> tuple[float, float]:
    data_spec = replace(spec, seed=spec.seed + replicate)
    fit_hyper = replace(hyper, seed=hyper.seed + replicate)
    start = perf_counter()
    try:
        train, test = generate_dataset(data_spec)
        chain = run_chain(train, fit_hyper)
        mean, _, _ = predict(chain, test.X)
        score = rmse(test.y, mean)
    except Exception:
        score = math.nan
    return score, perf_counter() - start


def run_benchmark(specs, hyper: Hyperparams, replicates: int,
                  workers: int = 1):
    """Fit every spec ``replicates`` times; one row per replicate.

    Returns rows ``(function_id, rsnr, replicate, rmse, runtime_s)`` in
    deterministic order; replicate ``i`` uses data seed ``spec.seed + i``
    and fit seed ``hyper.seed + i``.
    """
    jobs = []
    for s, spec in enumerate(specs):
        for rep in range(replicates):
            jobs.append(((s, rep), _benchmark_job, (spec, hyper, rep)))
    results = _run_jobs(jobs, workers)
    rows = []
    for s, spec in enumerate(specs):
        for rep in range(replicates):
            score, runtime = results[(s, rep)]
            rows.append((spec.function_id, spec.rsnr, rep, score, runtime))
    return rows


def default_grid(base: Hyperparams) -> list[Hyperparams]:
    """The reference search grid: 12 degree sets x 3 orders x 4 expansions."""
    degree_sets = [(0,), (1,), (2,), (3,), (0, 1), (0, 2), (0, 3), (1, 2),
                   (1, 3), (2, 3), (0, 1, 2), (0, 1, 2, 3)]
    orders = [1, 2, 3]
    expansions = [0.1, 1.0, 2.0, 3.0]
    return [replace(base, degrees=d, max_interaction=k, expansion=e)
            for d in degree_sets for k in orders for e in expansions]


def grid_search(data: Dataset, grid, folds: int, repeats: int,
                task: str = "fit", workers: int = 1):
    """Pick the grid point with the lowest mean CV score.

    Ties keep the earliest grid point. A single-point grid is returned
    immediately without any fitting. Returns ``(best, scores)`` with one
    mean CV score per grid point.
    """
    grid = list(grid)
    if not grid:
        raise ConfigError("hyperparameter grid is empty")
    if len(grid) == 1:
        return grid[0], [math.nan]
    jobs = []
    for g, hyper in enumerate(grid):
        for r in range(repeats):
            rng = np.random.default_rng(hyper.seed + r)
            if task == "classify":
                split = stratified_kfold_indices(data.y, folds, rng)
            else:
                split = kfold_indices(data.n_obs, folds, rng)
            for f, test_idx in enumerate(split):
                fit_hyper = replace(hyper,
                                    seed=hyper.seed + 100_003 * (r + 1) + f)
                jobs.append(((g, r, f), _cv_job,
                             (data, fit_hyper, task, test_idx)))
    results = _run_jobs(jobs, workers)
    scores = []
    for g in range(len(grid)):
        vals = [v for (gg, _, _), v in results.items()
                if gg == g and not math.isnan(v)]
        scores.append(float(np.mean(vals)) if vals else math.inf)
    best_idx = 0
    for g in range(1, len(grid)):
        if scores[g] < scores[best_idx]:
            best_idx = g
    return grid[best_idx], scores
