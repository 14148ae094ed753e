"""General (non-Kronecker) 2D residual-minimization solver.

For winds that couple the directions, e.g. the rigid rotation (y, -x), the
per-direction splitting does not apply; this module assembles the full 2D
saddle system

    [[A, B], [B^T, 0]] [r; u] = [rhs; 0]

with A the test-space Gram of the full H1 inner product (L2 plus both
gradient terms) and B the rectangular one-step operator

    B = M + dt_eff * W,    W u = alpha (grad u, grad psi) + (beta . grad u, psi),

and factorizes it once with a sparse LU (reused across steps while beta is
time-independent).  Separable contributions (mass, constant diffusion, Gram)
are Kronecker products of 1D matrices; only the advection term needs a 2D
per-element quadrature loop.

All matrices are homogeneous-Dirichlet eliminated; 2D dof order is
row-major, index = ix * n_y + iy over interior 1D indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .assembly import _nq, line_rule, mass, stiffness
from .exceptions import ParameterError, SingularMatrixError
from .resmin import SolutionState
from .splines import SplineSpace, make_space

__all__ = ["Space2D", "SaddleSystem", "assemble_2d_operators",
           "assemble_2d_saddle", "assemble_2d_load", "sparse_lu",
           "sparse_lu_solve", "RotatingFlowStepper"]


@dataclass(frozen=True)
class Space2D:
    x: SplineSpace
    y: SplineSpace

    @property
    def dim(self) -> int:
        return self.x.dim * self.y.dim

    @property
    def interior_dim(self) -> int:
        return (self.x.dim - 2) * (self.y.dim - 2)

    @property
    def interior_shape(self) -> tuple[int, int]:
        return (self.x.dim - 2, self.y.dim - 2)


class _ElementTables(NamedTuple):
    points: np.ndarray       # (n_el, nq)
    weights: np.ndarray      # (n_el, nq)
    values: np.ndarray       # (n_el, nq, degree+1)
    derivatives: np.ndarray  # (n_el, nq, degree+1)
    firsts: np.ndarray       # (n_el,) first active basis index


def _element_tables(space: SplineSpace, nq: int) -> _ElementTables:
    rule = line_rule(space, nq)
    n_el, per = space.n_elements, space.degree + 1
    pts = rule.points.reshape(n_el, nq)
    wts = rule.weights.reshape(n_el, nq)
    vals = rule.values.reshape(n_el, nq, space.dim)
    ders = rule.derivatives.reshape(n_el, nq, space.dim)
    step = space.degree - space.continuity
    firsts = np.arange(n_el) * step
    values = np.empty((n_el, nq, per))
    derivs = np.empty((n_el, nq, per))
    for e in range(n_el):
        values[e] = vals[e, :, firsts[e]:firsts[e] + per]
        derivs[e] = ders[e, :, firsts[e]:firsts[e] + per]
    return _ElementTables(pts, wts, values, derivs, firsts)


def _check_meshes(trial: Space2D, test: Space2D) -> None:
    for t, v, label in ((trial.x, test.x, "x"), (trial.y, test.y, "y")):
        if t.n_elements != v.n_elements or t.interval != v.interval:
            raise ParameterError(
                f"trial and test meshes must coincide in {label} for the 2D "
                f"assembly ({t.n_elements} vs {v.n_elements} elements)")


def _interior_kron(ax, ay) -> sp.csr_matrix:
    """Kronecker product of two interior-eliminated 1D operators."""
    return sp.kron(sp.csr_matrix(ax), sp.csr_matrix(ay), format="csr")


def _assemble_advection_2d(trial: Space2D, test: Space2D,
                           beta_field: Callable) -> sp.csr_matrix:
    """Full (non-eliminated) advection matrix (beta . grad u, psi)."""
    nqx = max(_nq(trial.x.degree, test.x.degree), _nq(test.x.degree, test.x.degree))
    nqy = max(_nq(trial.y.degree, test.y.degree), _nq(test.y.degree, test.y.degree))
    bx_t = _element_tables(trial.x, nqx)
    by_t = _element_tables(trial.y, nqy)
    tx_t = _element_tables(test.x, nqx)
    ty_t = _element_tables(test.y, nqy)
    n_elx, n_ely = trial.x.n_elements, trial.y.n_elements
    pt, qt = trial.x.degree, test.x.degree
    pty, qty = trial.y.degree, test.y.degree

    data, rows, cols = [], [], []
    trial_ny, test_ny = trial.y.dim, test.y.dim
    for ex in range(n_elx):
        X = bx_t.points[ex][:, None]
        wx = bx_t.weights[ex]
        for ey in range(n_ely):
            Y = by_t.points[ey][None, :]
            wgrid = wx[:, None] * by_t.weights[ey][None, :]
            beta_x, beta_y = beta_field(X, Y)
            bxg = np.broadcast_to(np.asarray(beta_x, dtype=float), wgrid.shape)
            byg = np.broadcast_to(np.asarray(beta_y, dtype=float), wgrid.shape)
            blk = np.einsum("ab,ak,bl,ai,bj->klij", wgrid * bxg,
                            tx_t.values[ex], ty_t.values[ey],
                            bx_t.derivatives[ex], by_t.values[ey],
                            optimize=True)
            blk += np.einsum("ab,ak,bl,ai,bj->klij", wgrid * byg,
                             tx_t.values[ex], ty_t.values[ey],
                             bx_t.values[ex], by_t.derivatives[ey],
                             optimize=True)
            r0 = (tx_t.firsts[ex] + np.arange(qt + 1))[:, None] * test_ny \
                + (ty_t.firsts[ey] + np.arange(qty + 1))[None, :]
            c0 = (bx_t.firsts[ex] + np.arange(pt + 1))[:, None] * trial_ny \
                + (by_t.firsts[ey] + np.arange(pty + 1))[None, :]
            nr, nc = r0.size, c0.size
            data.append(blk.reshape(nr, nc).ravel())
            rows.append(np.repeat(r0.ravel(), nc))
            cols.append(np.tile(c0.ravel(), nr))
    mat = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(test.dim, trial.dim))
    return mat.tocsr()


def _interior_indices(space: Space2D) -> np.ndarray:
    nx, ny = space.x.dim, space.y.dim
    ix = np.arange(1, nx - 1)
    iy = np.arange(1, ny - 1)
    return (ix[:, None] * ny + iy[None, :]).ravel()


def assemble_2d_operators(trial: Space2D, test: Space2D, alpha: float,
                          beta_field: Optional[Callable]):
    """Return (gram, m_test, m_rect, w_rect), all interior-eliminated CSR.

    gram   test x test, (psi, phi) + (grad psi, grad phi)
    m_test test x test mass (the L2 part of gram)
    m_rect test x trial mass
    w_rect test x trial, alpha (grad u, grad psi) + (beta . grad u, psi)
    """
    _check_meshes(trial, test)

    def blocks(rows, cols):
        m = mass(cols, rows).interior().to_dense()
        k = stiffness(cols, rows).interior().to_dense()
        return m, k

    mx_tt, kx_tt = blocks(test.x, test.x)
    my_tt, ky_tt = blocks(test.y, test.y)
    m_test = _interior_kron(mx_tt, my_tt)
    gram = (m_test + _interior_kron(kx_tt, my_tt)
            + _interior_kron(mx_tt, ky_tt))

    mx_r, kx_r = blocks(test.x, trial.x)
    my_r, ky_r = blocks(test.y, trial.y)
    m_rect = _interior_kron(mx_r, my_r)
    w_rect = alpha * (_interior_kron(kx_r, my_r) + _interior_kron(mx_r, ky_r))
    if beta_field is not None:
        adv = _assemble_advection_2d(trial, test, beta_field)
        keep_rows = _interior_indices(test)
        keep_cols = _interior_indices(trial)
        w_rect = (w_rect + adv[keep_rows][:, keep_cols]).tocsr()
    return gram.tocsr(), m_test.tocsr(), m_rect.tocsr(), w_rect


class SaddleSystem(NamedTuple):
    matrix: sp.csc_matrix      # [[A, B], [B^T, 0]]
    gram: sp.csr_matrix
    m_test: sp.csr_matrix
    b: sp.csr_matrix
    m_rect: sp.csr_matrix
    w_rect: sp.csr_matrix
    test_shape: tuple[int, int]
    trial_shape: tuple[int, int]


def assemble_2d_saddle(trial: Space2D, test: Space2D, alpha: float,
                       beta_field: Optional[Callable],
                       dt_eff: float) -> SaddleSystem:
    gram, m_test, m_rect, w_rect = assemble_2d_operators(trial, test, alpha,
                                                         beta_field)
    b = (m_rect + dt_eff * w_rect).tocsr()
    saddle = sp.bmat([[gram, b], [b.T, None]], format="csc")
    return SaddleSystem(saddle, gram, m_test, b, m_rect, w_rect,
                        test.interior_shape, trial.interior_shape)


def assemble_2d_load(test: Space2D, f: Callable, t: float) -> np.ndarray:
    """Interior load grid (test_x - 2, test_y - 2): integral of f psi."""
    nqx = _nq(test.x.degree, test.x.degree) + 1
    nqy = _nq(test.y.degree, test.y.degree) + 1
    tx = _element_tables(test.x, nqx)
    ty = _element_tables(test.y, nqy)
    out = np.zeros((test.x.dim, test.y.dim))
    for ex in range(test.x.n_elements):
        X = tx.points[ex][:, None]
        for ey in range(test.y.n_elements):
            Y = ty.points[ey][None, :]
            wgrid = tx.weights[ex][:, None] * ty.weights[ey][None, :]
            fv = np.broadcast_to(np.asarray(f(X, Y, t), dtype=float),
                                 wgrid.shape)
            blk = np.einsum("ab,ak,bl->kl", wgrid * fv,
                            tx.values[ex], ty.values[ey], optimize=True)
            sx = slice(tx.firsts[ex], tx.firsts[ex] + test.x.degree + 1)
            sy = slice(ty.firsts[ey], ty.firsts[ey] + test.y.degree + 1)
            out[sx, sy] += blk
    return out[1:-1, 1:-1]


class _SparseFactor:
    def __init__(self, matrix):
        try:
            self._lu = splu(matrix.tocsc())
        except RuntimeError as exc:
            raise SingularMatrixError(f"sparse factorization failed: {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs)


def sparse_lu(matrix) -> _SparseFactor:
    return _SparseFactor(matrix)


def sparse_lu_solve(matrix, rhs: np.ndarray) -> np.ndarray:
    return sparse_lu(matrix).solve(rhs)


class RotatingFlowStepper:
    """Monolithic Crank-Nicolson stepping of the full 2D saddle system.

    dt_eff = tau / 2 enters the one-step operator; the right side uses the
    mirrored operator M - dt_eff W.  The factorization is computed once and
    reused, which is valid while the wind is time-independent.
    """

    def __init__(self, problem, mesh: tuple[int, int], trial: tuple[int, int],
                 test: tuple[int, int], tau: float):
        if problem.velocity_field is None:
            raise ParameterError(
                f"problem {problem.name!r} does not define a 2D wind field")
        if problem.velocity_time_dependent:
            raise ParameterError("factor reuse requires a steady wind")
        (x0, x1), (y0, y1) = problem.domain
        p, c = trial
        q, cq = test
        self.trial = Space2D(make_space(p, c, mesh[0], (x0, x1)),
                             make_space(p, c, mesh[1], (y0, y1)))
        self.test = Space2D(make_space(q, cq, mesh[0], (x0, x1)),
                            make_space(q, cq, mesh[1], (y0, y1)))
        self.problem = problem
        self.tau = tau
        system = assemble_2d_saddle(self.trial, self.test, problem.alpha,
                                    problem.velocity_field, 0.5 * tau)
        self.system = system
        self.b_rhs = (system.m_rect - 0.5 * tau * system.w_rect).tocsr()
        self.factor = sparse_lu(system.matrix)
        self._m_test = system.test_shape[0] * system.test_shape[1]
        self.last_residual_norms = (0.0, 0.0)

    @property
    def trial_x(self) -> SplineSpace:
        return self.trial.x

    @property
    def trial_y(self) -> SplineSpace:
        return self.trial.y

    def initial_state(self) -> SolutionState:
        from .stepping import project_initial
        state = project_initial(self.problem.initial, self.trial.x, self.trial.y)
        state.time = self.problem.time_interval[0]
        return state

    def step(self, state: SolutionState) -> SolutionState:
        rhs_top = self.b_rhs @ state.u.ravel()
        if self.problem.forcing is not None:
            load = (assemble_2d_load(self.test, self.problem.forcing, state.time)
                    + assemble_2d_load(self.test, self.problem.forcing,
                                       state.time + self.tau))
            rhs_top = rhs_top + 0.5 * self.tau * load.ravel()
        rhs = np.concatenate([rhs_top, np.zeros(self.trial.interior_dim)])
        sol = self.factor.solve(rhs)
        rvec = sol[:self._m_test]
        r = rvec.reshape(self.system.test_shape)
        u = sol[self._m_test:].reshape(self.system.trial_shape)
        self.last_residual_norms = (
            float(np.sqrt(max(rvec @ (self.system.m_test @ rvec), 0.0))),
            float(np.sqrt(max(rvec @ (self.system.gram @ rvec), 0.0))))
        return SolutionState(u=u, r=r, time=state.time + self.tau)
