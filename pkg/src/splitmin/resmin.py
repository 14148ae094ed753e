"""Per-direction residual-minimization substeps.

Each implicit substep treats one direction with the weak operator

    b(u, v) = (u, v) + dt_eff * ( (beta_d du/dx_d, v) + (eps_d du/dx_d, dv/dx_d) )

and stabilizes it by minimizing the residual in a test space enriched only in
the split direction.  The test-space inner product carries the derivative
term only in that direction, so the saddle system

    [[A, B], [B^T, 0]] (r, u) = (F, 0)

keeps the Kronecker structure  [[A_s, B_s],[B_s^T, 0]] (x) M_other  and is
solved by two banded sweeps.  With test = trial the same substep reduces to
the plain Galerkin ADI update (and r = 0); the unstabilized path solves the
square system directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import assembly
from .assembly import Coefficient1D, apply_dirichlet, line_rule
from .banded import BandedMatrix
from .exceptions import ParameterError
from .kron import BandedLU, KronSystem, OpCounter, SaddleFactor, kron_matvec, kron_solve
from .splines import SplineSpace

__all__ = ["SolutionState", "DirectionalOperator", "LoadAssembler",
           "build_directional", "substep", "residual_norms"]


@dataclass
class SolutionState:
    """Interior trial coefficients, optional residual representative, time."""

    u: np.ndarray
    r: np.ndarray | None = None
    time: float = 0.0


class LoadAssembler:
    """Caches quadrature data for load grids  L[k,l] = (f(.,.,t), phi_k psi_l)."""

    def __init__(self, space_x: SplineSpace, space_y: SplineSpace):
        rx = line_rule(space_x, space_x.degree + 1)
        ry = line_rule(space_y, space_y.degree + 1)
        self.px, self.py = rx.points, ry.points
        # weights folded into the basis matrices; boundary functions eliminated
        self.wx = (rx.weights[:, None] * rx.values)[:, 1:-1]
        self.wy = (ry.weights[:, None] * ry.values)[:, 1:-1]

    def load(self, f, t: float) -> np.ndarray:
        vals = np.asarray(f(self.px[:, None], self.py[None, :], t), dtype=float)
        vals = np.broadcast_to(vals, (self.px.size, self.py.size))
        return self.wx.T @ vals @ self.wy


class DirectionalOperator:
    """Assembled blocks and factors for one split direction.

    Block naming (all Dirichlet-eliminated):
      m_rect/k_rect/g_rect  trial->test blocks in the split direction,
      b_split = m_rect + dt_eff*(k_rect + g_rect),
      a_split = test Gram (m_test + k_test) in the split direction,
      m_other/k_other/g_other  square trial blocks in the orthogonal direction.
    rhs_ops holds the precombined matrices the schemes' right-hand sides use.
    """

    def __init__(self, direction, dt_eff, stabilized, trial_split, test_split,
                 trial_other, blocks, counter):
        self.direction = direction
        self.dt_eff = dt_eff
        self.stabilized = stabilized
        self.trial_split = trial_split
        self.test_split = test_split
        self.trial_other = trial_other
        self.counter = counter
        for name, mat in blocks.items():
            setattr(self, name, mat)
        self.b_split = self.m_rect + dt_eff * (self.k_rect + self.g_rect)
        self.a_split = self.m_test + self.k_test
        self.rhs_ops = {
            "rect_minus": self.m_rect - dt_eff * (self.k_rect + self.g_rect),
            "other_minus": self.m_other - dt_eff * (self.k_other + self.g_other),
        }
        split_factor = (SaddleFactor(self.a_split, self.b_split, counter)
                        if stabilized else BandedLU(self.b_split, counter))
        self.system = KronSystem(split_factor, BandedLU(self.m_other, counter),
                                 direction)
        if direction == "x":
            self.loads = LoadAssembler(test_split, trial_other)
        else:
            self.loads = LoadAssembler(trial_other, test_split)

    @property
    def n_split(self) -> int:
        return self.b_split.n_cols

    @property
    def m_split(self) -> int:
        return self.b_split.n_rows

    def load(self, f, t: float) -> np.ndarray:
        return self.loads.load(f, t)


def build_directional(direction: str, trial_x: SplineSpace, trial_y: SplineSpace,
                      test_split: SplineSpace, diffusion, velocity, dt_eff: float,
                      stabilized: bool = True,
                      counter: OpCounter | None = None) -> DirectionalOperator:
    """Assemble one direction's operator.

    diffusion and velocity are (x, y) pairs of 1D coefficients (constants or
    callables of the direction's own variable, already bound to a time).
    """
    if direction not in ("x", "y"):
        raise ParameterError(f"direction must be 'x' or 'y', got {direction!r}")
    trial_split, trial_other = (trial_x, trial_y) if direction == "x" else (trial_y, trial_x)
    if test_split.degree < trial_split.degree:
        raise ParameterError(
            f"test space degree {test_split.degree} is coarser than trial degree "
            f"{trial_split.degree} in the split direction")
    if not stabilized:
        test_split = trial_split

    axis = 0 if direction == "x" else 1
    eps_split = Coefficient1D.wrap(diffusion[axis])
    eps_other = Coefficient1D.wrap(diffusion[1 - axis])
    beta_split = Coefficient1D.wrap(velocity[axis])
    beta_other = Coefficient1D.wrap(velocity[1 - axis])

    def rect(kind, coef):
        return apply_dirichlet(kind(trial_split, test_split, coef), test_split, trial_split)

    def square(kind, coef):
        return apply_dirichlet(kind(trial_other, trial_other, coef), trial_other, trial_other)

    blocks = {
        "m_rect": rect(assembly.mass, None),
        "k_rect": rect(assembly.stiffness, eps_split),
        "g_rect": rect(assembly.advection, beta_split),
        "m_test": apply_dirichlet(assembly.mass(test_split, test_split), test_split, test_split),
        "k_test": apply_dirichlet(assembly.stiffness(test_split, test_split), test_split, test_split),
        "m_other": square(assembly.mass, None),
        "k_other": square(assembly.stiffness, eps_other),
        "g_other": square(assembly.advection, beta_other),
    }
    return DirectionalOperator(direction, dt_eff, stabilized, trial_split,
                               test_split, trial_other, blocks, counter)


def substep(op: DirectionalOperator, rhs_grid: np.ndarray) -> SolutionState:
    """Solve one substep for the given tested load grid; returns (u, r)."""
    rhs_grid = np.asarray(rhs_grid, dtype=float)
    if not op.stabilized:
        u = kron_solve(op.system, rhs_grid)
        return SolutionState(u=u, r=None)
    m = op.m_split
    if op.direction == "x":
        stacked = np.vstack([rhs_grid, np.zeros((op.n_split, rhs_grid.shape[1]))])
        out = kron_solve(op.system, stacked)
        return SolutionState(u=out[m:], r=out[:m])
    stacked = np.hstack([rhs_grid, np.zeros((rhs_grid.shape[0], op.n_split))])
    out = kron_solve(op.system, stacked)
    return SolutionState(u=out[:, m:], r=out[:, :m])


def residual_norms(op: DirectionalOperator, r: np.ndarray) -> tuple[float, float]:
    """L2 and split-H1 norms of the residual representative (test-space V-norm)."""
    r = np.asarray(r, dtype=float)
    if op.direction == "x":
        l2sq = np.sum(r * kron_matvec(op.m_test, op.m_other, r))
        h1sq = np.sum(r * kron_matvec(op.a_split, op.m_other, r))
    else:
        l2sq = np.sum(r * kron_matvec(op.m_other, op.m_test, r))
        h1sq = np.sum(r * kron_matvec(op.m_other, op.a_split, r))
    return float(np.sqrt(max(l2sq, 0.0))), float(np.sqrt(max(h1sq, 0.0)))
