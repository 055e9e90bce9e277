"""Tensor-product basis atoms over subsets of predictors.

An atom is a product of univariate B-spline factors attached to distinct
predictor columns, together with a scalar coefficient. Atoms are stored in
canonical order (factors sorted by variable index) so two atoms with the
same factor set compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import KnotSequence, eval_bspline

__all__ = ["BasisAtom", "eval_atom", "design_column"]


@dataclass(frozen=True)
class BasisAtom:
    """One additive term of the model, excluding the intercept.

    Parameters
    ----------
    variables : tuple of int
        Distinct 0-based predictor indices, one per factor.
    degrees : tuple of int
        B-spline degree of each factor.
    knots : tuple of KnotSequence
        Knot sequence of each factor; ``knots[l].degree == degrees[l]``.
    coefficient : float
        Weight of the atom in the additive expansion.
    """

    variables: tuple[int, ...]
    degrees: tuple[int, ...]
    knots: tuple[KnotSequence, ...]
    coefficient: float

    def __post_init__(self):
        variables = tuple(int(v) for v in self.variables)
        degrees = tuple(int(c) for c in self.degrees)
        knots = tuple(self.knots)
        if not (len(variables) == len(degrees) == len(knots)):
            raise ValueError("variables, degrees and knots must have equal length")
        if len(variables) == 0:
            raise ValueError("an atom needs at least one factor")
        if len(set(variables)) != len(variables):
            raise ValueError(f"variables must be distinct, got {variables}")
        if any(v < 0 for v in variables):
            raise ValueError("variable indices are 0-based and non-negative")
        for c, ks in zip(degrees, knots):
            if ks.degree != c:
                raise ValueError(
                    f"factor degree {c} does not match its knot sequence "
                    f"(degree {ks.degree})"
                )
        # Canonical storage: factors sorted by variable index.
        order = sorted(range(len(variables)), key=lambda l: variables[l])
        object.__setattr__(self, "variables", tuple(variables[l] for l in order))
        object.__setattr__(self, "degrees", tuple(degrees[l] for l in order))
        object.__setattr__(self, "knots", tuple(knots[l] for l in order))
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def interaction_order(self) -> int:
        return len(self.variables)

    def with_coefficient(self, coefficient: float) -> "BasisAtom":
        return BasisAtom(self.variables, self.degrees, self.knots, coefficient)


def eval_atom(atom: BasisAtom, x) -> float:
    """Product of the atom's univariate factors at one point ``x``.

    The coefficient is not included. Any factor evaluated outside its
    support annihilates the product.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a 1-D point")
    if x.shape[0] <= max(atom.variables):
        raise ValueError(
            f"point has {x.shape[0]} coordinates but the atom uses "
            f"variable {max(atom.variables)}"
        )
    out = 1.0
    for v, ks in zip(atom.variables, atom.knots):
        out *= eval_bspline(ks, x[v])
        if out == 0.0:
            break
    return float(out)


def design_column(atom: BasisAtom, X) -> np.ndarray:
    """Evaluate the atom (without coefficient) on every row of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if X.shape[1] <= max(atom.variables):
        raise ValueError(
            f"X has {X.shape[1]} columns but the atom uses variable "
            f"{max(atom.variables)}"
        )
    col = np.ones(X.shape[0])
    for v, ks in zip(atom.variables, atom.knots):
        col *= eval_bspline(ks, X[:, v])
    return col
