"""Model state, priors, Gaussian likelihood and posterior prediction.

The regression model is an intercept plus a random number of coefficient-
weighted tensor-product B-spline atoms, with Gaussian noise. The number of
atoms is Poisson with a Gamma-distributed mean, coefficients are Gaussian,
the noise variance is inverse-Gamma, and atom structures follow the
anchored scheme in :mod:`bayespline.proposals`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import gammaln

from .atoms import BasisAtom, design_column, eval_atom
from .errors import ConfigError, EmptyChainError
from .proposals import atom_structural_log_density

if TYPE_CHECKING:  # pragma: no cover
    from .sampler import Chain

__all__ = [
    "Dataset",
    "Hyperparams",
    "ModelState",
    "mean_function",
    "fitted_values",
    "log_likelihood",
    "log_prior",
    "log_posterior",
    "fit_defaults",
    "predict",
]

_ALLOWED_DEGREES = (0, 1, 2, 3)


class Dataset:
    """Design matrix and response with per-predictor expanded bounds.

    Parameters
    ----------
    X : array_like, shape (n, p)
        Predictor matrix; all values finite.
    y : array_like, shape (n,)
        Response vector; all values finite.
    expansion : float
        Multiplier stretching each predictor's range beyond its observed
        minimum and maximum; knot proposals live on the stretched range.
    feature_names : sequence of str, optional
        Column names (defaults to ``x0..x{p-1}``).
    """

    def __init__(self, X, y, expansion: float = 0.0, feature_names=None):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be a vector with one entry per row of X")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need at least one row and one predictor")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("X and y must be finite (no missing values)")
        if expansion < 0:
            raise ConfigError(f"expansion must be non-negative, got {expansion}")
        self.X = X
        self.y = y
        self.expansion = float(expansion)
        if feature_names is None:
            feature_names = [f"x{j}" for j in range(X.shape[1])]
        if len(feature_names) != X.shape[1]:
            raise ValueError("feature_names must have one entry per column")
        self.feature_names = list(feature_names)
        self.col_min = X.min(axis=0)
        self.col_max = X.max(axis=0)
        width = self.col_max - self.col_min
        self.lower_bounds = self.col_min - expansion * width
        self.upper_bounds = self.col_max + expansion * width
        self._sorted_columns: dict[int, np.ndarray] = {}

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.X[:, j]

    def sorted_column(self, j: int) -> np.ndarray:
        col = self._sorted_columns.get(j)
        if col is None:
            col = np.sort(self.X[:, j])
            self._sorted_columns[j] = col
        return col

    def with_expansion(self, expansion: float) -> "Dataset":
        if expansion == self.expansion:
            return self
        return Dataset(self.X, self.y, expansion, self.feature_names)

    def with_response(self, y) -> "Dataset":
        return Dataset(self.X, y, self.expansion, self.feature_names)

    @classmethod
    def from_csv(cls, path, response: str, expansion: float = 0.0) -> "Dataset":
        """Load a headered numeric CSV; ``response`` names the y column."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            if response not in header:
                raise ConfigError(
                    f"{path}: response column {response!r} not found "
                    f"(columns: {header})"
                )
            y_idx = header.index(response)
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ValueError(f"{path}:{lineno}: expected "
                                     f"{len(header)} fields, got {len(row)}")
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric or missing value"
                    ) from None
        if not rows:
            raise ValueError(f"{path}: no data rows")
        mat = np.asarray(rows, dtype=np.float64)
        if not np.all(np.isfinite(mat)):
            raise ValueError(f"{path}: missing or non-finite values")
        x_idx = [j for j in range(len(header)) if j != y_idx]
        names = [header[j] for j in x_idx]
        return cls(mat[:, x_idx], mat[:, y_idx], expansion, names)


@dataclass(frozen=True)
class Hyperparams:
    """Prior settings, move probabilities and chain schedule.

    The defaults reproduce the reference configuration: Gamma(5, 1) prior
    on the expected atom count, inverse-Gamma(0.005, 0.00005) on the noise
    variance (``noise_df = noise_scale = 0.01``), equal move probabilities,
    and a 100k/50k/50 schedule.
    """

    degrees: tuple[int, ...] = (0, 1, 2, 3)
    max_interaction: int = 3
    expansion: float = 1.0
    mass_shape: float = 5.0
    mass_rate: float = 1.0
    noise_df: float = 0.01
    noise_scale: float = 0.01
    coef_scale: float | str = "var"
    move_probs: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    n_iter: int = 100_000
    burn_in: int = 50_000
    thin: int = 50
    seed: int = 0
    prec_shape: float = 1.0
    prec_rate: float = 1.0

    def __post_init__(self):
        degrees = tuple(sorted({int(c) for c in self.degrees}))
        if not degrees:
            raise ConfigError("degrees must be nonempty")
        if any(c not in _ALLOWED_DEGREES for c in degrees):
            raise ConfigError(f"degrees must be a subset of {_ALLOWED_DEGREES}")
        object.__setattr__(self, "degrees", degrees)
        if self.max_interaction < 1:
            raise ConfigError("max_interaction must be >= 1")
        if self.expansion < 0:
            raise ConfigError("expansion must be non-negative")
        for name in ("mass_shape", "mass_rate", "noise_df", "noise_scale",
                     "prec_shape", "prec_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        probs = tuple(float(q) for q in self.move_probs)
        if len(probs) != 3 or any(q < 0 for q in probs):
            raise ConfigError("move_probs must be three non-negative numbers")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(f"move_probs must sum to 1, got {sum(probs)}")
        object.__setattr__(self, "move_probs", probs)
        if isinstance(self.coef_scale, str):
            if self.coef_scale not in ("var", "half-range"):
                raise ConfigError(
                    "coef_scale must be a positive number, 'var' or 'half-range'"
                )
        elif self.coef_scale <= 0:
            raise ConfigError("coef_scale must be positive")
        if self.n_iter < 1:
            raise ConfigError("n_iter must be >= 1")
        if not 0 <= self.burn_in < self.n_iter:
            raise ConfigError("need 0 <= burn_in < n_iter")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


@dataclass(frozen=True)
class ModelState:
    """One point of the trans-dimensional parameter space."""

    intercept: float
    atoms: tuple[BasisAtom, ...]
    sigma2: float
    levy_mass: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.levy_mass <= 0:
            raise ValueError("levy_mass must be positive")
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)


def mean_function(state: ModelState, x) -> float:
    """Intercept plus the coefficient-weighted sum of atoms at ``x``."""
    out = state.intercept
    for atom in state.atoms:
        out += atom.coefficient * eval_atom(atom, x)
    return float(out)


def fitted_values(state: ModelState, X) -> np.ndarray:
    """Vectorized :func:`mean_function` over the rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    out = np.full(X.shape[0], state.intercept)
    for atom in state.atoms:
        out += atom.coefficient * design_column(atom, X)
    return out


def log_likelihood(state: ModelState, data: Dataset) -> float:
    """Gaussian log likelihood of the data under ``state``."""
    resid = data.y - fitted_values(state, data.X)
    n = data.n_obs
    return float(-0.5 * n * math.log(2.0 * math.pi * state.sigma2)
                 - 0.5 * float(resid @ resid) / state.sigma2)


def _log_invgamma(x: float, shape: float, scale: float) -> float:
    if x <= 0:
        return -math.inf
    return (shape * math.log(scale) - float(gammaln(shape))
            - (shape + 1.0) * math.log(x) - scale / x)


def _log_gamma(x: float, shape: float, rate: float) -> float:
    if x <= 0:
        return -math.inf
    return (shape * math.log(rate) - float(gammaln(shape))
            + (shape - 1.0) * math.log(x) - rate * x)


def _log_normal(x: float, sd: float) -> float:
    return -0.5 * math.log(2.0 * math.pi * sd * sd) - 0.5 * (x / sd) ** 2


def log_prior(state: ModelState, hyper: Hyperparams, data: Dataset,
              coef_scale: float | None = None) -> float:
    """Joint log prior of every random component of ``state``.

    The atom-count term is Poisson(levy_mass), the mass and noise-variance
    terms are Gamma and inverse-Gamma, coefficients are Gaussian with scale
    ``coef_scale`` (resolved from ``hyper`` when not given), and each
    atom's structural block uses the anchored-scheme factorization from
    :mod:`bayespline.proposals`.
    """
    if coef_scale is None:
        _, coef_scale = fit_defaults(data, hyper)
    j = state.n_atoms
    m = state.levy_mass
    out = _log_invgamma(state.sigma2, hyper.noise_df / 2.0,
                        hyper.noise_df * hyper.noise_scale / 2.0)
    out += _log_gamma(m, hyper.mass_shape, hyper.mass_rate)
    out += -m + j * math.log(m) - float(gammaln(j + 1))
    for atom in state.atoms:
        out += atom_structural_log_density(atom, data, hyper)
        out += _log_normal(atom.coefficient, coef_scale)
    return float(out)


def log_posterior(state: ModelState, hyper: Hyperparams, data: Dataset,
                  coef_scale: float | None = None) -> float:
    return log_likelihood(state, data) + log_prior(state, hyper, data,
                                                   coef_scale)


def fit_defaults(data: Dataset, hyper: Hyperparams) -> tuple[float, float]:
    """Resolve the fixed intercept and the coefficient prior scale.

    The intercept is the response mean. The scale follows the configured
    rule: the sample variance of y, half its range, or a fixed number.
    """
    if data.n_obs < 2:
        raise ValueError("need at least two observations")
    beta0 = float(np.mean(data.y))
    rule = hyper.coef_scale
    if isinstance(rule, str):
        if rule == "var":
            scale = float(np.var(data.y, ddof=1))
        else:
            scale = 0.5 * float(data.y.max() - data.y.min())
        if scale <= 0:
            raise ConfigError(
                f"coef_scale rule {rule!r} degenerates on a constant response"
            )
    else:
        scale = float(rule)
    return beta0, scale


def predict(chain: "Chain", X, quantiles: tuple[float, float] = (0.025, 0.975),
            include_noise: bool = False, rng: np.random.Generator | None = None):
    """Posterior mean of the regression function and pointwise quantiles.

    Returns ``(mean, lower, upper)`` over the retained samples. With
    ``include_noise`` the quantiles (not the mean) are widened by Gaussian
    noise drawn per sample from that sample's variance.
    """
    if not chain.samples:
        raise EmptyChainError("chain has no retained samples")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    draws = np.empty((len(chain.samples), X.shape[0]))
    for s, state in enumerate(chain.samples):
        draws[s] = fitted_values(state, X)
    mean = draws.mean(axis=0)
    if include_noise:
        if rng is None:
            rng = np.random.default_rng(0)
        sig = np.sqrt([state.sigma2 for state in chain.samples])
        draws = draws + rng.standard_normal(draws.shape) * sig[:, None]
    lower = np.quantile(draws, quantiles[0], axis=0)
    upper = np.quantile(draws, quantiles[1], axis=0)
    return mean, lower, upper
