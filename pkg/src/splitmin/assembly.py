"""1D matrix assembly by per-element Gauss-Legendre quadrature.

Entry conventions (k = test row, i = trial column):

    mass:       M[k,i] = int w(x)  trial_i(x)  test_k(x)  dx
    stiffness:  K[k,i] = int d(x)  trial_i'(x) test_k'(x) dx
    advection:  G[k,i] = int v(x)  trial_i'(x) test_k(x)  dx
    gram:       A      = mass(test,test,1) + stiffness(test,test,1)

The quadrature rule uses ceil((p_trial + p_test)/2) + 1 points per element,
exact for every constant-coefficient term.  Homogeneous Dirichlet conditions
are imposed by eliminating the first and last basis function of each space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedMatrix
from .exceptions import ParameterError
from .splines import SplineSpace, eval_matrix

__all__ = ["Coefficient1D", "LineRule", "line_rule", "mass", "stiffness",
           "advection", "gram", "apply_dirichlet"]


@dataclass(frozen=True)
class Coefficient1D:
    """A scalar coefficient of one variable, with a constant fast path."""

    fn: object
    constant: bool
    value: float = 0.0

    @classmethod
    def wrap(cls, c) -> "Coefficient1D":
        if isinstance(c, Coefficient1D):
            return c
        if callable(c):
            return cls(c, False)
        return cls(None, True, float(c))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.constant:
            return np.full_like(np.asarray(x, dtype=float), self.value)
        return np.asarray(self.fn(x), dtype=float)


@dataclass(frozen=True)
class LineRule:
    """Gauss points/weights on a 1D mesh plus dense basis values there."""

    points: np.ndarray       # (n_points,)
    weights: np.ndarray      # (n_points,)
    values: np.ndarray       # (n_points, dim)
    derivatives: np.ndarray  # (n_points, dim)


def gauss_points(breakpoints: np.ndarray, n_per_element: int):
    """Gauss-Legendre nodes and weights mapped onto each interval of a mesh."""
    ref_x, ref_w = np.polynomial.legendre.leggauss(n_per_element)
    lo = breakpoints[:-1]
    h = np.diff(breakpoints)
    pts = (lo[:, None] + 0.5 * h[:, None] * (ref_x[None, :] + 1.0)).ravel()
    wts = (0.5 * h[:, None] * ref_w[None, :]).ravel()
    return pts, wts


def line_rule(space: SplineSpace, n_per_element: int,
              breakpoints: np.ndarray | None = None) -> LineRule:
    bks = space.breakpoints if breakpoints is None else breakpoints
    pts, wts = gauss_points(bks, n_per_element)
    vals, ders = eval_matrix(space, pts)
    return LineRule(pts, wts, vals, ders)


def _nq(p_trial: int, p_test: int) -> int:
    return (p_trial + p_test + 1) // 2 + 1  # ceil((p+q)/2) + 1


def _common_mesh(trial: SplineSpace, test: SplineSpace) -> np.ndarray:
    if trial.interval != test.interval:
        raise ParameterError(
            f"mismatched intervals {trial.interval} vs {test.interval}")
    if trial.n_elements == test.n_elements:
        return trial.breakpoints
    return np.union1d(trial.breakpoints, test.breakpoints)


def _assemble(trial: SplineSpace, test: SplineSpace, coefficient,
              trial_deriv: bool, test_deriv: bool) -> BandedMatrix:
    coefficient = Coefficient1D.wrap(1.0 if coefficient is None else coefficient)
    bks = _common_mesh(trial, test)
    pts, wts = gauss_points(bks, _nq(trial.degree, test.degree))
    t_vals, t_ders = eval_matrix(trial, pts)
    s_vals, s_ders = eval_matrix(test, pts)
    t = t_ders if trial_deriv else t_vals
    s = s_ders if test_deriv else s_vals
    dense = s.T @ ((wts * coefficient(pts))[:, None] * t)
    return BandedMatrix.from_dense(dense)


def mass(trial: SplineSpace, test: SplineSpace, weight=None) -> BandedMatrix:
    return _assemble(trial, test, weight, False, False)


def stiffness(trial: SplineSpace, test: SplineSpace, diffusion=None) -> BandedMatrix:
    return _assemble(trial, test, diffusion, True, True)


def advection(trial: SplineSpace, test: SplineSpace, velocity=None) -> BandedMatrix:
    return _assemble(trial, test, velocity, True, False)


def gram(test: SplineSpace) -> BandedMatrix:
    """Test-space inner product matrix: L2 plus the split-direction gradient term."""
    return mass(test, test) + stiffness(test, test)


def apply_dirichlet(matrix: BandedMatrix, space_rows: SplineSpace,
                    space_cols: SplineSpace) -> BandedMatrix:
    """Eliminate the first and last basis function on both sides."""
    if matrix.shape != (space_rows.dim, space_cols.dim):
        raise ParameterError(
            f"matrix shape {matrix.shape} does not match spaces "
            f"({space_rows.dim}, {space_cols.dim})")
    return matrix.interior()
