"""Data-anchored proposal distributions for atoms and their knots.

Knot sequences are proposed around an anchor drawn uniformly from the
observed values of the chosen predictor, with the remaining knots drawn
uniformly on the expanded intervals to the left and right of the anchor.
The same distribution doubles as the model's prior on knot sequences, so
its log-density below is used both by the sampler's acceptance ratios and
by the full-state prior evaluator.

For even degrees the anchor is latent given the knots, so the density
marginalizes it by summation over all data points compatible with the
sequence; for odd degrees the middle knot equals the anchor and the
summation reduces to counting ties. The density assumes the tie events of
the scheme have probability zero (guaranteed for ``expansion > 0``).
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from .atoms import BasisAtom
from .bspline import KnotSequence
from .errors import ConfigError, ProposalError

if TYPE_CHECKING:  # pragma: no cover
    from .model import Dataset, Hyperparams

__all__ = [
    "expanded_bounds",
    "propose_knots",
    "knot_log_density",
    "propose_structure",
    "propose_atom",
    "atom_structural_log_density",
]

_MAX_DRAW_ATTEMPTS = 100


def expanded_bounds(column, expansion: float) -> tuple[float, float]:
    """Data range of ``column`` stretched by ``expansion`` times its width."""
    if expansion < 0:
        raise ConfigError(f"expansion must be non-negative, got {expansion}")
    column = np.asarray(column, dtype=np.float64)
    lo = float(column.min())
    hi = float(column.max())
    width = hi - lo
    return lo - expansion * width, hi + expansion * width


def _draw_knots(degree: int, column: np.ndarray, b1: float, b2: float,
                rng: np.random.Generator) -> KnotSequence:
    n = column.shape[0]
    for _ in range(_MAX_DRAW_ATTEMPTS):
        anchor = float(column[rng.integers(n)])
        if degree == 0:
            knots = (rng.uniform(b1, anchor), rng.uniform(anchor, b2))
        elif degree == 1:
            knots = (rng.uniform(b1, anchor), anchor, rng.uniform(anchor, b2))
        elif degree == 2:
            left = np.sort(rng.uniform(b1, anchor, 2))
            right = np.sort(rng.uniform(anchor, b2, 2))
            knots = (left[0], left[1], right[0], right[1])
        elif degree == 3:
            left = np.sort(rng.uniform(b1, anchor, 2))
            right = np.sort(rng.uniform(anchor, b2, 2))
            knots = (left[0], left[1], anchor, right[0], right[1])
        else:
            raise ConfigError(f"unsupported degree {degree}; allowed: 0..3")
        if all(a < b for a, b in zip(knots, knots[1:])):
            return KnotSequence(degree, knots)
    raise ProposalError(
        f"no strictly ascending degree-{degree} knot sequence after "
        f"{_MAX_DRAW_ATTEMPTS} attempts (constant or near-constant predictor)"
    )


def propose_knots(degree: int, column, expansion: float,
                  rng: np.random.Generator) -> KnotSequence:
    """Draw one knot sequence from the anchored scheme for ``degree``."""
    column = np.asarray(column, dtype=np.float64)
    if column.size == 0:
        raise ValueError("column must be nonempty")
    b1, b2 = expanded_bounds(column, expansion)
    return _draw_knots(degree, column, b1, b2, rng)


def _log_or_ninf(value: float) -> float:
    return math.log(value) if value > 0 else -math.inf


def _knot_log_density(degree: int, knots: tuple[float, ...],
                      sorted_column: np.ndarray, b1: float, b2: float) -> float:
    n = sorted_column.shape[0]
    if knots[0] < b1 or knots[-1] > b2:
        return -math.inf
    if any(a >= b for a, b in zip(knots, knots[1:])):
        return -math.inf

    if degree in (1, 3):
        # Middle knot is the anchor itself; its proposal mass is the
        # empirical frequency of that exact value.
        mid = knots[degree // 2 + 1]
        ties = int(np.searchsorted(sorted_column, mid, "right")
                   - np.searchsorted(sorted_column, mid, "left"))
        if ties == 0:
            return -math.inf
        left_w = mid - b1
        right_w = b2 - mid
        if left_w <= 0 or right_w <= 0:
            return -math.inf
        out = math.log(ties / n)
        if degree == 1:
            out -= math.log(left_w) + math.log(right_w)
        else:
            # Two sorted uniforms per side: density 2 / width^2 each.
            out += math.log(2.0) - 2.0 * math.log(left_w)
            out += math.log(2.0) - 2.0 * math.log(right_w)
        return out

    # Even degrees: sum over anchors lying between the left and right
    # knot groups.
    if degree == 0:
        lo_knot, hi_knot = knots[0], knots[1]
    elif degree == 2:
        lo_knot, hi_knot = knots[1], knots[2]
    else:
        raise ConfigError(f"unsupported degree {degree}; allowed: 0..3")
    lo = np.searchsorted(sorted_column, lo_knot, "left")
    hi = np.searchsorted(sorted_column, hi_knot, "right")
    anchors = sorted_column[lo:hi]
    left_w = anchors - b1
    right_w = b2 - anchors
    ok = (left_w > 0) & (right_w > 0)
    if not np.any(ok):
        return -math.inf
    if degree == 0:
        terms = 1.0 / (left_w[ok] * right_w[ok])
    else:
        terms = 4.0 / (left_w[ok] ** 2 * right_w[ok] ** 2)
    return _log_or_ninf(float(terms.sum()) / n)


def knot_log_density(kseq: KnotSequence, column, expansion: float) -> float:
    """Log density of ``kseq`` under the anchored scheme for its degree."""
    column = np.asarray(column, dtype=np.float64)
    b1, b2 = expanded_bounds(column, expansion)
    return _knot_log_density(kseq.degree, kseq.knots, np.sort(column), b1, b2)


def propose_structure(data: "Dataset", hyper: "Hyperparams",
                      rng: np.random.Generator):
    """Draw an atom's structural block: ``(variables, degrees, knots)``.

    The interaction order is uniform on ``{1..max_interaction}`` resampled
    to at most the number of predictors, the variable subset is uniform
    over combinations, and each factor degree is uniform on the allowed
    degree set.
    """
    p = data.n_features
    k = int(rng.integers(1, min(hyper.max_interaction, p) + 1))
    variables = np.sort(rng.choice(p, size=k, replace=False))
    degrees = rng.choice(np.asarray(hyper.degrees, dtype=np.int64), size=k)
    knots = tuple(
        _draw_knots(int(c), data.column(int(v)),
                    data.lower_bounds[v], data.upper_bounds[v], rng)
        for v, c in zip(variables, degrees)
    )
    return (tuple(int(v) for v in variables),
            tuple(int(c) for c in degrees), knots)


def propose_atom(data: "Dataset", hyper: "Hyperparams",
                 rng: np.random.Generator, coef_scale: float) -> BasisAtom:
    """Draw a new atom: structure from its prior, coefficient from
    ``N(0, coef_scale**2)``."""
    variables, degrees, knots = propose_structure(data, hyper, rng)
    beta = float(rng.normal(0.0, coef_scale))
    return BasisAtom(variables, degrees, knots, beta)


def atom_structural_log_density(atom: BasisAtom, data: "Dataset",
                                hyper: "Hyperparams") -> float:
    """Log density of the atom's (order, variables, degrees, knots) block.

    This is both the structural proposal density and the structural prior.
    The interaction-order mass is kept at ``1/max_interaction`` even when
    the predictor count truncates the support; the convention is shared by
    prior and proposal, so it cancels in every acceptance ratio.
    """
    p = data.n_features
    k = atom.interaction_order
    if k > hyper.max_interaction or max(atom.variables) >= p:
        return -math.inf
    if any(c not in hyper.degrees for c in atom.degrees):
        return -math.inf
    out = -math.log(hyper.max_interaction)
    out -= math.log(math.comb(p, k))
    out -= k * math.log(len(hyper.degrees))
    for v, ks in zip(atom.variables, atom.knots):
        out += _knot_log_density(ks.degree, ks.knots, data.sorted_column(v),
                                 data.lower_bounds[v], data.upper_bounds[v])
        if out == -math.inf:
            break
    return out
