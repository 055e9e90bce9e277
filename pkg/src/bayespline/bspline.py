"""Univariate B-spline basis functions of arbitrary degree.

A degree-``k`` basis function is defined by ``k + 2`` strictly ascending
knots. Evaluation uses the two-term recursion on sub-sequences of the knot
vector; the degree-0 base case is the indicator of the half-open interval
between its two knots, and every higher degree inherits that half-open
support convention on the right endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["KnotSequence", "eval_bspline", "bspline_support"]


@dataclass(frozen=True)
class KnotSequence:
    """Knots of a single univariate B-spline basis function.

    Parameters
    ----------
    degree : int
        Polynomial degree ``k >= 0``.
    knots : tuple of float
        ``k + 2`` strictly ascending knot locations.
    """

    degree: int
    knots: tuple[float, ...]
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        knots = tuple(float(t) for t in self.knots)
        if len(knots) != self.degree + 2:
            raise ValueError(
                f"degree {self.degree} needs {self.degree + 2} knots, "
                f"got {len(knots)}"
            )
        if not all(a < b for a, b in zip(knots, knots[1:])):
            raise ValueError(f"knots must be strictly ascending, got {knots}")
        object.__setattr__(self, "knots", knots)
        arr = np.asarray(knots, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "_arr", arr)

    @property
    def lo(self) -> float:
        return self.knots[0]

    @property
    def hi(self) -> float:
        return self.knots[-1]


def _recurse(knots: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Two-term recursion over sub-sequences; depth is the degree (<= 3 in
    # practice), so no de Boor table is warranted.
    if knots.shape[0] == 2:
        return ((knots[0] <= x) & (x < knots[1])).astype(np.float64)
    left = (x - knots[0]) / (knots[-2] - knots[0]) * _recurse(knots[:-1], x)
    right = (knots[-1] - x) / (knots[-1] - knots[1]) * _recurse(knots[1:], x)
    return left + right


def eval_bspline(kseq: KnotSequence, x):
    """Evaluate the basis function at ``x`` (scalar or array).

    Returns values in ``[0, 1]``; identically 0 outside the half-open
    support ``[knots[0], knots[-1])``.
    """
    arr = np.asarray(x, dtype=np.float64)
    out = _recurse(kseq._arr, arr)
    # The recursion already vanishes off-support; the explicit mask keeps
    # the right-endpoint convention exact for every degree.
    out = np.where((arr >= kseq.lo) & (arr < kseq.hi), out, 0.0)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def bspline_support(kseq: KnotSequence) -> tuple[float, float]:
    """Half-open interval ``[lo, hi)`` outside which the function is 0."""
    return (kseq.lo, kseq.hi)
