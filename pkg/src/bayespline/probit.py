"""Binary classification through a probit link with latent Gaussian
utilities.

Each observation gets a latent utility whose sign matches its label;
conditional on the utilities the regression sampler applies unchanged with
unit noise variance, and the coefficient scale is driven by a Gamma-
distributed precision instead of the fixed regression scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri, ndtri_exp

from .errors import EmptyChainError
from .model import Dataset, Hyperparams, ModelState, fitted_values
from .sampler import Chain, ChainDiagnostics, SamplerState, _MOVE_KINDS, \
    run_iteration

__all__ = [
    "PrecisionParam",
    "sample_latent",
    "gibbs_precision",
    "run_probit_chain",
    "predict_prob",
    "probability_grid",
]

_TINY = 1e-300


@dataclass
class PrecisionParam:
    """Coefficient precision with its Gamma prior parameters."""

    tau: float
    shape: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.tau <= 0 or self.shape <= 0 or self.rate <= 0:
            raise ValueError("tau, shape and rate must be positive")

    @property
    def coef_scale(self) -> float:
        return self.tau ** -0.5


def sample_latent(z, y: np.ndarray, f_values: np.ndarray,
                  rng: np.random.Generator) -> np.ndarray:
    """Draw latent utilities from their truncated-normal conditionals.

    For label 1 the draw is N(f, 1) truncated to (0, inf); for label 0 to
    (-inf, 0). Inverse-CDF sampling in log space keeps the deep tails
    (|f| large) accurate. The returned vector is strictly sign-consistent
    with ``y``; the ``z`` argument is accepted for signature symmetry but
    the conditional does not depend on it.
    """
    f_values = np.asarray(f_values, dtype=np.float64)
    y = np.asarray(y)
    u = np.clip(rng.random(f_values.shape[0]), _TINY, None)
    log_u = np.log(u)
    pos = y == 1
    out = np.empty_like(f_values)
    # Positive labels: standardized draw on [-f, inf) via the survival map.
    out[pos] = f_values[pos] - ndtri_exp(log_u[pos] + log_ndtr(f_values[pos]))
    # Negative labels: standardized draw on (-inf, -f] via the CDF map.
    out[~pos] = f_values[~pos] + ndtri_exp(log_u[~pos]
                                           + log_ndtr(-f_values[~pos]))
    # Floating-point rounding can land exactly on the boundary; nudge off.
    on_boundary = out == 0.0
    if np.any(on_boundary):
        eps = np.nextafter(0.0, 1.0)
        out[on_boundary] = np.where(pos[on_boundary], eps, -eps)
    return out


def gibbs_precision(betas: np.ndarray, shape: float, rate: float,
                    rng: np.random.Generator) -> float:
    """Gamma full-conditional draw of the coefficient precision."""
    betas = np.asarray(betas, dtype=np.float64)
    post_shape = shape + 0.5 * betas.shape[0]
    post_rate = rate + 0.5 * float(betas @ betas)
    return float(rng.gamma(post_shape, 1.0 / post_rate))


def _probit_intercept(y: np.ndarray) -> float:
    # The response mean lives on the probability scale; clamp before
    # mapping to the latent scale so separation cannot produce +-inf.
    return float(ndtri(np.clip(np.mean(y), 1e-3, 1.0 - 1e-3)))


def run_probit_chain(data: Dataset, hyper: Hyperparams,
                     precision: PrecisionParam | None = None,
                     latent_monitor=None,
                     fixed_latent: np.ndarray | None = None,
                     fixed_precision: float | None = None) -> Chain:
    """Sample the classifier posterior for 0/1 labels in ``data.y``.

    Per iteration: refresh the latent utilities, run one regression sweep
    against them with unit noise variance, then update the coefficient
    precision. ``fixed_latent`` and ``fixed_precision`` freeze those two
    steps, reducing the algorithm to the regression sampler (used by the
    shared-core equivalence test).
    """
    y = data.y
    labels = np.unique(y)
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ValueError(f"labels must be exactly 0/1, got {labels}")
    if precision is None:
        precision = PrecisionParam(hyper.prec_shape / hyper.prec_rate,
                                   hyper.prec_shape, hyper.prec_rate)
    if fixed_precision is not None:
        precision.tau = float(fixed_precision)

    data = data.with_expansion(hyper.expansion)
    rng = np.random.default_rng(hyper.seed)
    intercept = _probit_intercept(y)
    state = SamplerState(data, hyper, intercept=intercept,
                         coef_scale=precision.coef_scale, fixed_sigma2=1.0)
    if fixed_latent is not None:
        z = np.asarray(fixed_latent, dtype=np.float64)
        state.set_response(z)

    proposed = {k: 0 for k in _MOVE_KINDS}
    accepted = {k: 0 for k in _MOVE_KINDS}
    n_trace = np.empty(hyper.n_iter, dtype=np.int64)
    s2_trace = np.ones(hyper.n_iter)
    m_trace = np.empty(hyper.n_iter)
    samples: list[ModelState] = []
    for it in range(1, hyper.n_iter + 1):
        if fixed_latent is None:
            z = sample_latent(state.response, y, state.fitted(), rng)
            state.set_response(z)
            if latent_monitor is not None:
                latent_monitor(z)
        outcome = run_iteration(state, rng)
        if fixed_precision is None:
            precision.tau = gibbs_precision(state.betas, precision.shape,
                                            precision.rate, rng)
            state.coef_scale = precision.coef_scale
        proposed[outcome.move_kind] += 1
        accepted[outcome.move_kind] += outcome.accepted
        n_trace[it - 1] = state.n_atoms
        m_trace[it - 1] = state.levy_mass
        if it > hyper.burn_in and (it - hyper.burn_in) % hyper.thin == 0:
            samples.append(state.snapshot())
    diag = ChainDiagnostics(proposed, accepted, n_trace, s2_trace, m_trace)
    meta = {"seed": hyper.seed, "n_iter": hyper.n_iter,
            "burn_in": hyper.burn_in, "thin": hyper.thin,
            "n_features": data.n_features}
    return Chain(samples, diag, "probit", meta)


def predict_prob(chain: Chain, X) -> np.ndarray:
    """Posterior mean of the class-1 probability at each row of ``X``."""
    if not chain.samples:
        raise EmptyChainError("chain has no retained samples")
    X = np.asarray(X, dtype=np.float64)
    probs = np.zeros(X.shape[0])
    for state in chain.samples:
        probs += ndtr(fitted_values(state, X))
    return probs / len(chain.samples)


def probability_grid(chain: Chain, x1_range: tuple[float, float],
                     x2_range: tuple[float, float], resolution: int = 50):
    """Predicted probabilities on a regular 2-D grid.

    Returns an ``(resolution**2, 3)`` array of ``(x1, x2, prob)`` triples
    for decision-boundary plotting of two-predictor classifiers.
    """
    g1 = np.linspace(*x1_range, resolution)
    g2 = np.linspace(*x2_range, resolution)
    xx1, xx2 = np.meshgrid(g1, g2)
    pts = np.column_stack([xx1.ravel(), xx2.ravel()])
    probs = predict_prob(chain, pts)
    return np.column_stack([pts, probs])
