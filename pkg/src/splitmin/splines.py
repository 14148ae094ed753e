"""1D B-spline spaces on uniform meshes.

A space is described by its polynomial degree p, the inter-element continuity
C^c (with -1 <= c <= p-1; c = -1 means fully discontinuous), the number of
uniform elements and the interval.  The knot vector is open/clamped: the end
knots are repeated p+1 times and every interior breakpoint is repeated p-c
times, which gives

    dim = n_elements * (p - c) + c + 1

basis functions.  Evaluation returns the p+1 functions that can be nonzero at
a point together with their first derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, ParameterError

__all__ = ["SplineSpace", "BasisEval", "make_space", "eval_basis", "eval_matrix"]


@dataclass(frozen=True)
class SplineSpace:
    degree: int
    continuity: int
    n_elements: int
    interval: tuple[float, float]
    knots: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        p, c = self.degree, self.continuity
        return self.n_elements * (p - c) + c + 1

    @property
    def breakpoints(self) -> np.ndarray:
        a, b = self.interval
        return np.linspace(a, b, self.n_elements + 1)


@dataclass(frozen=True)
class BasisEval:
    """Nonzero basis values at one point: functions first_index .. first_index+p."""

    first_index: int
    values: np.ndarray
    derivatives: np.ndarray


def make_space(degree: int, continuity: int, n_elements: int,
               interval: tuple[float, float]) -> SplineSpace:
    """Build a clamped uniform spline space of the given degree and continuity."""
    if degree < 0:
        raise ParameterError(f"degree must be >= 0, got {degree}")
    if not (-1 <= continuity <= degree - 1):
        raise ParameterError(
            f"continuity must satisfy -1 <= c <= degree-1, got c={continuity} for degree {degree}")
    if n_elements < 1:
        raise ParameterError(f"n_elements must be >= 1, got {n_elements}")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ParameterError(f"interval must satisfy a < b, got ({a}, {b})")

    p, c = degree, continuity
    interior = np.linspace(a, b, n_elements + 1)[1:-1]
    knots = np.concatenate([
        np.full(p + 1, a),
        np.repeat(interior, p - c),
        np.full(p + 1, b),
    ])
    return SplineSpace(p, c, n_elements, (a, b), knots)


def dim(space: SplineSpace) -> int:
    return space.dim


def _find_span(space: SplineSpace, x: float) -> int:
    """Last knot index i with knots[i] <= x, restricted to nonempty spans.

    The element convention is half-open, closed on the right end of the
    domain, so x = b maps into the last element.
    """
    a, b = space.interval
    if x < a or x > b:
        raise DomainError(f"x={x} outside [{a}, {b}]")
    i = int(np.searchsorted(space.knots, x, side="right")) - 1
    return min(max(i, space.degree), space.dim - 1)


def eval_basis(space: SplineSpace, x: float) -> BasisEval:
    """Values and first derivatives of the p+1 active basis functions at x.

    Values come from the Cox-de Boor recursion run in place over one knot
    span; derivatives combine the degree p-1 values with the standard
    degree-reduction formula.
    """
    span = _find_span(space, x)
    p = space.degree
    knots = space.knots

    values = np.ones(1)
    lower = values  # degree p-1 row, needed for derivatives
    for j in range(1, p + 1):
        lower = values
        nxt = np.empty(j + 1)
        saved = 0.0
        for r in range(j):
            # denominator spans the (nonempty) interval containing x, never zero
            denom = knots[span + r + 1] - knots[span + r + 1 - j]
            temp = lower[r] / denom
            nxt[r] = saved + (knots[span + r + 1] - x) * temp
            saved = (x - knots[span + r + 1 - j]) * temp
        nxt[j] = saved
        values = nxt

    derivatives = np.zeros(p + 1)
    if p > 0:
        for r in range(p + 1):
            ell = span - p + r
            acc = 0.0
            if r >= 1:
                d = knots[ell + p] - knots[ell]
                if d > 0.0:
                    acc += lower[r - 1] / d
            if r <= p - 1:
                d = knots[ell + p + 1] - knots[ell + 1]
                if d > 0.0:
                    acc -= lower[r] / d
            derivatives[r] = p * acc

    return BasisEval(span - p, values, derivatives)


def eval_matrix(space: SplineSpace, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense (len(xs), dim) matrices of basis values and first derivatives."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    vals = np.zeros((xs.size, space.dim))
    ders = np.zeros((xs.size, space.dim))
    for row, x in enumerate(xs):
        be = eval_basis(space, float(x))
        sl = slice(be.first_index, be.first_index + space.degree + 1)
        vals[row, sl] = be.values
        ders[row, sl] = be.derivatives
    return vals, ders
