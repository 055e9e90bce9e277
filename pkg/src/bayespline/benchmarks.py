"""Synthetic regression benchmarks, noise calibration and metrics.

Six standard test functions are provided: three bivariate surfaces on the
unit square (a smooth radial bump, a complex interaction surface, and a
piecewise surface with a jump along a line) and the three classic
multivariate benchmark functions. Noise levels are set through the root
signal-to-noise ratio, defined as sd(signal)/sigma with the sample
standard deviation taken over the training-design signal values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .model import Dataset

__all__ = [
    "SyntheticSpec",
    "FUNCTION_IDS",
    "eval_test_function",
    "test_function_values",
    "rsnr_sigma",
    "generate_dataset",
    "make_two_moons",
    "rmse",
    "auc",
]

FUNCTION_IDS = ("radial", "complex", "nonsmooth",
                "friedman1", "friedman2", "friedman3")

_SURFACE_IDS = ("radial", "complex", "nonsmooth")


def _radial(X):
    r2 = (X[:, 0] - 0.5) ** 2 + (X[:, 1] - 0.5) ** 2
    return 24.234 * (r2 * (0.75 - r2))


def _complex(X):
    x1, x2 = X[:, 0], X[:, 1]
    return 1.9 * (1.35 + np.exp(x1) * np.sin(13.0 * (x1 - 0.6) ** 2)
                  * np.exp(-x2) * np.sin(7.0 * x2))


def _nonsmooth(X):
    x1, x2 = X[:, 0], X[:, 1]
    upper = x2 >= -0.6 * x1 + 0.75
    smooth = 0.2 + x1 ** 2 + 0.1 * x2
    ridged = 0.7 + 0.01 * np.abs(4.0 * x1 + 10.0 * x2 - 9.0) ** 1.5
    return np.where(upper, smooth, ridged)


def _friedman1(X):
    return (10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
            + 20.0 * (X[:, 2] - 0.5) ** 2 + 10.0 * X[:, 3] + 5.0 * X[:, 4])


def _friedman2(X):
    inner = X[:, 1] * X[:, 2] - 1.0 / (X[:, 1] * X[:, 3])
    return np.sqrt(X[:, 0] ** 2 + inner ** 2)


def _friedman3(X):
    inner = X[:, 1] * X[:, 2] - 1.0 / (X[:, 1] * X[:, 3])
    return np.arctan(inner / X[:, 0])


_FUNCS = {"radial": _radial, "complex": _complex, "nonsmooth": _nonsmooth,
          "friedman1": _friedman1, "friedman2": _friedman2,
          "friedman3": _friedman3}

_FRIEDMAN23_LOWER = np.array([0.0, 40.0 * np.pi, 0.0, 1.0])
_FRIEDMAN23_UPPER = np.array([100.0, 560.0 * np.pi, 1.0, 11.0])


def _min_features(function_id: str) -> int:
    return {"radial": 2, "complex": 2, "nonsmooth": 2,
            "friedman1": 5, "friedman2": 4, "friedman3": 4}[function_id]


def _check_domain(function_id: str, X: np.ndarray) -> None:
    if function_id in _SURFACE_IDS or function_id == "friedman1":
        used = X[:, :2] if function_id in _SURFACE_IDS else X
        if np.any(used < 0.0) or np.any(used > 1.0):
            raise ValueError(f"{function_id} expects inputs in [0, 1]")
    else:
        used = X[:, :4]
        if np.any(used < _FRIEDMAN23_LOWER) or np.any(used > _FRIEDMAN23_UPPER):
            raise ValueError(f"{function_id} input outside its stated ranges")


def test_function_values(function_id: str, X) -> np.ndarray:
    """Exact values of the named test function on the rows of ``X``."""
    if function_id not in FUNCTION_IDS:
        raise ValueError(f"unknown test function {function_id!r}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] < _min_features(function_id):
        raise ValueError(f"{function_id} needs at least "
                         f"{_min_features(function_id)} coordinates")
    _check_domain(function_id, X)
    return _FUNCS[function_id](X)


def eval_test_function(function_id: str, x) -> float:
    """Scalar version of :func:`test_function_values` for one point."""
    return float(test_function_values(function_id, np.atleast_2d(x))[0])


def rsnr_sigma(f_values, rsnr: float) -> float:
    """Noise standard deviation giving the requested signal-to-noise ratio.

    Uses the sample (n-1) standard deviation of the signal values.
    """
    if rsnr <= 0:
        raise ValueError("rsnr must be positive")
    f_values = np.asarray(f_values, dtype=np.float64)
    sd = float(np.std(f_values, ddof=1))
    if sd == 0:
        raise ValueError("signal is constant; RSNR is undefined")
    return sd / rsnr


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one train/test pair of a synthetic benchmark."""

    function_id: str
    n_train: int = 250
    n_test: int = 1000
    rsnr: float = 5.0
    design: str = "uniform"
    seed: int = 0
    n_features: int | None = None

    def __post_init__(self):
        if self.function_id not in FUNCTION_IDS:
            raise ValueError(f"unknown test function {self.function_id!r}")
        if self.rsnr <= 0:
            raise ValueError("rsnr must be positive")
        if self.design not in ("grid", "uniform"):
            raise ValueError("design must be 'grid' or 'uniform'")
        if self.design == "grid":
            if self.function_id not in _SURFACE_IDS:
                raise ValueError("grid design is only for the 2-D surfaces")
            side = math.isqrt(self.n_train)
            if side * side != self.n_train:
                raise ValueError("grid design needs a square n_train")
        if self.n_train < 2 or self.n_test < 1:
            raise ValueError("need n_train >= 2 and n_test >= 1")
        p = self.resolved_features
        if p < _min_features(self.function_id):
            raise ValueError(f"{self.function_id} needs at least "
                             f"{_min_features(self.function_id)} features")

    @property
    def resolved_features(self) -> int:
        if self.n_features is not None:
            return self.n_features
        return {"radial": 2, "complex": 2, "nonsmooth": 2,
                "friedman1": 10, "friedman2": 4, "friedman3": 4}[self.function_id]


def _draw_inputs(spec: SyntheticSpec, n: int, grid: bool,
                 rng: np.random.Generator) -> np.ndarray:
    p = spec.resolved_features
    if grid:
        side = math.isqrt(n)
        g = np.linspace(0.0, 1.0, side)
        xx1, xx2 = np.meshgrid(g, g)
        return np.column_stack([xx1.ravel(), xx2.ravel()])
    if spec.function_id in _SURFACE_IDS or spec.function_id == "friedman1":
        return rng.uniform(0.0, 1.0, size=(n, p))
    X = rng.uniform(0.0, 1.0, size=(n, p))
    X[:, :4] = _FRIEDMAN23_LOWER + X[:, :4] * (_FRIEDMAN23_UPPER
                                               - _FRIEDMAN23_LOWER)
    return X


def generate_dataset(spec: SyntheticSpec) -> tuple[Dataset, Dataset]:
    """Build one (train, test) pair; deterministic given ``spec.seed``.

    The training response carries Gaussian noise calibrated by
    :func:`rsnr_sigma` on the training signal; the test response is the
    noiseless function value, ready for RMSE against predictions.
    """
    rng = np.random.default_rng(spec.seed)
    X_train = _draw_inputs(spec, spec.n_train, spec.design == "grid", rng)
    X_test = _draw_inputs(spec, spec.n_test, False, rng)
    f_train = test_function_values(spec.function_id, X_train)
    f_test = test_function_values(spec.function_id, X_test)
    sigma = rsnr_sigma(f_train, spec.rsnr)
    y_train = f_train + rng.normal(0.0, sigma, size=spec.n_train)
    return Dataset(X_train, y_train), Dataset(X_test, f_test)


def make_two_moons(n: int = 300, noise_sd: float = 0.2,
                   seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Two interleaving half-circles with Gaussian jitter; labels 0/1."""
    rng = np.random.default_rng(seed)
    n_upper = n // 2
    n_lower = n - n_upper
    t_upper = rng.uniform(0.0, np.pi, n_upper)
    t_lower = rng.uniform(0.0, np.pi, n_lower)
    X = np.empty((n, 2))
    X[:n_upper, 0] = np.cos(t_upper)
    X[:n_upper, 1] = np.sin(t_upper)
    X[n_upper:, 0] = 1.0 - np.cos(t_lower)
    X[n_upper:, 1] = 0.5 - np.sin(t_lower)
    X += rng.normal(0.0, noise_sd, size=X.shape)
    y = np.concatenate([np.zeros(n_upper), np.ones(n_lower)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


def rmse(truth, estimate) -> float:
    """Root-mean-square difference between two equal-length vectors."""
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape or truth.ndim != 1 or truth.size < 1:
        raise ValueError("truth and estimate must be equal-length vectors")
    return float(np.sqrt(np.mean((truth - estimate) ** 2)))


def auc(labels, scores) -> float:
    """Area under the ROC curve, Mann-Whitney form with ties counted half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape or labels.ndim != 1:
        raise ValueError("labels and scores must be equal-length vectors")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present")
    ranks = rankdata(scores)
    u = float(ranks[pos].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)
