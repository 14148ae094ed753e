"""Directional substeps: block assembly, saddle solve, residual norms.

The oracle is a dense assembled 2D block solve of the same saddle system.
"""

import numpy as np
import pytest

from splitmin.exceptions import ParameterError
from splitmin.kron import OpCounter
from splitmin.resmin import (LoadAssembler, build_directional, residual_norms,
                             substep)
from splitmin.splines import eval_matrix, make_space


def _spaces(n_el=4, trial_pc=(2, 1), test_pc=(3, 0)):
    tx = make_space(*trial_pc, n_el, (0.0, 1.0))
    ty = make_space(*trial_pc, n_el, (0.0, 1.0))
    ts = make_space(*test_pc, n_el, (0.0, 1.0))
    return tx, ty, ts


def _build(direction, dt_eff=0.02, stabilized=True, n_el=4,
           trial_pc=(2, 1), test_pc=(3, 0)):
    tx, ty, ts = _spaces(n_el, trial_pc, test_pc)
    diffusion = (lambda x: 0.1 + 0.0 * x, lambda y: 0.2 + 0.1 * y)
    velocity = (lambda x: 1.0 + 0.5 * x, lambda y: 0.0 * y - 0.3)
    return build_directional(direction, tx, ty, ts, diffusion, velocity,
                             dt_eff, stabilized, OpCounter())


def test_one_step_block_combines_mass_stiffness_advection():
    op = _build("x", dt_eff=0.05)
    ref = (op.m_rect.to_dense()
           + 0.05 * (op.k_rect.to_dense() + op.g_rect.to_dense()))
    np.testing.assert_allclose(op.b_split.to_dense(), ref, atol=1e-14)
    minus = (op.m_rect.to_dense()
             - 0.05 * (op.k_rect.to_dense() + op.g_rect.to_dense()))
    np.testing.assert_allclose(op.rhs_ops["rect_minus"].to_dense(), minus,
                               atol=1e-14)


def test_zero_dt_reduces_one_step_block_to_mass():
    op = _build("y", dt_eff=0.0)
    np.testing.assert_allclose(op.b_split.to_dense(), op.m_rect.to_dense(),
                               atol=0.0)


@pytest.mark.parametrize("direction", ["x", "y"])
def test_substep_matches_dense_saddle_solve(direction):
    op = _build(direction)
    a, b = op.a_split.to_dense(), op.b_split.to_dense()
    mo = op.m_other.to_dense()
    m, n = b.shape
    rng = np.random.default_rng(101)
    if direction == "x":
        rhs = rng.standard_normal((m, mo.shape[0]))
        top = np.hstack([np.kron(a, mo), np.kron(b, mo)])
        bot = np.hstack([np.kron(b.T, mo), np.zeros((n * mo.shape[0],) * 2)])
        vec = np.concatenate([rhs.ravel(), np.zeros(n * mo.shape[0])])
        sol = np.linalg.solve(np.vstack([top, bot]), vec)
        r_ref = sol[:m * mo.shape[0]].reshape(m, mo.shape[0])
        u_ref = sol[m * mo.shape[0]:].reshape(n, mo.shape[0])
    else:
        rhs = rng.standard_normal((mo.shape[0], m))
        top = np.hstack([np.kron(mo, a), np.kron(mo, b)])
        bot = np.hstack([np.kron(mo, b.T), np.zeros((n * mo.shape[0],) * 2)])
        vec = np.concatenate([rhs.ravel(), np.zeros(mo.shape[0] * n)])
        sol = np.linalg.solve(np.vstack([top, bot]), vec)
        r_ref = sol[:mo.shape[0] * m].reshape(mo.shape[0], m)
        u_ref = sol[mo.shape[0] * m:].reshape(mo.shape[0], n)
    state = substep(op, rhs)
    np.testing.assert_allclose(state.u, u_ref, atol=1e-10)
    np.testing.assert_allclose(state.r, r_ref, atol=1e-10)


@pytest.mark.parametrize("direction", ["x", "y"])
def test_substep_satisfies_saddle_equations(direction):
    op = _build(direction, n_el=6)
    rng = np.random.default_rng(55)
    if direction == "x":
        rhs = rng.standard_normal((op.m_split, op.m_other.shape[0]))
    else:
        rhs = rng.standard_normal((op.m_other.shape[0], op.m_split))
    state = substep(op, rhs)
    a, b = op.a_split.to_dense(), op.b_split.to_dense()
    mo = op.m_other.to_dense()
    if direction == "x":
        first = a @ state.r @ mo.T + b @ state.u @ mo.T - rhs
        second = b.T @ state.r @ mo.T
    else:
        first = mo @ state.r @ a.T + mo @ state.u @ b.T - rhs
        second = mo @ state.r @ b
    scale = np.linalg.norm(rhs)
    assert np.linalg.norm(first) / scale < 1e-10
    assert np.linalg.norm(second) / scale < 1e-10


def test_unstabilized_substep_solves_square_system():
    op = _build("x", stabilized=False)
    rng = np.random.default_rng(9)
    rhs = rng.standard_normal((op.m_split, op.m_other.shape[0]))
    state = substep(op, rhs)
    assert state.r is None
    big = np.kron(op.b_split.to_dense(), op.m_other.to_dense())
    ref = np.linalg.solve(big, rhs.ravel()).reshape(rhs.shape)
    np.testing.assert_allclose(state.u, ref, atol=1e-10)


def test_unstabilized_path_ignores_the_test_space():
    # with stabilization off, the test space collapses onto the trial space
    op = _build("y", stabilized=False)
    assert op.test_split.degree == op.trial_split.degree
    assert op.m_split == op.n_split


def test_residual_norms_match_dense_quadratic_forms():
    for direction in ("x", "y"):
        op = _build(direction)
        rng = np.random.default_rng(77)
        shape = ((op.m_split, op.m_other.shape[0]) if direction == "x"
                 else (op.m_other.shape[0], op.m_split))
        r = rng.standard_normal(shape)
        l2, h1 = residual_norms(op, r)
        mt, mo = op.m_test.to_dense(), op.m_other.to_dense()
        gr = op.a_split.to_dense()
        if direction == "x":
            big_l2 = np.kron(mt, mo)
            big_h1 = np.kron(gr, mo)
        else:
            big_l2 = np.kron(mo, mt)
            big_h1 = np.kron(mo, gr)
        v = r.ravel()
        np.testing.assert_allclose(l2, np.sqrt(v @ big_l2 @ v), atol=1e-12)
        np.testing.assert_allclose(h1, np.sqrt(v @ big_h1 @ v), atol=1e-12)
        assert h1 >= l2  # the V-norm dominates the L2 norm


def test_galerkin_test_space_gives_zero_residual():
    op = _build("x", trial_pc=(2, 1), test_pc=(2, 1))
    rng = np.random.default_rng(23)
    rhs = rng.standard_normal((op.m_split, op.m_other.shape[0]))
    state = substep(op, rhs)
    l2, h1 = residual_norms(op, state.r)
    assert l2 < 1e-10 and h1 < 1e-10


def test_load_assembler_separable_integrand():
    sx = make_space(2, 1, 4, (0.0, 1.0))
    sy = make_space(3, 0, 4, (0.0, 1.0))
    loads = LoadAssembler(sx, sy)
    got = loads.load(lambda x, y, t: np.sin(x) * (2.0 + y) * (1.0 + t), 0.5)
    # separable f factors into two 1D integrals per basis pair
    from splitmin.assembly import gauss_points
    px, wx = gauss_points(sx.breakpoints, 8)
    py, wy = gauss_points(sy.breakpoints, 8)
    ix = (wx * np.sin(px)) @ eval_matrix(sx, px)[0][:, 1:-1]
    iy = (wy * (2.0 + py)) @ eval_matrix(sy, py)[0][:, 1:-1]
    np.testing.assert_allclose(got, 1.5 * np.outer(ix, iy), atol=1e-9)


def test_constant_load_is_positive_for_interior_functions():
    sx = make_space(2, 1, 4, (0.0, 1.0))
    loads = LoadAssembler(sx, sx)
    grid = loads.load(lambda x, y, t: 1.0, 0.0)
    assert grid.shape == (sx.dim - 2, sx.dim - 2)
    assert np.all(grid > 0.0)


def test_invalid_direction_and_incompatible_degrees_rejected():
    tx, ty, ts = _spaces()
    diffusion = (0.1, 0.1)
    velocity = (1.0, 0.0)
    with pytest.raises(ParameterError):
        build_directional("z", tx, ty, ts, diffusion, velocity, 0.01)
    low = make_space(1, 0, 4, (0.0, 1.0))
    with pytest.raises(ParameterError):
        build_directional("x", tx, ty, low, diffusion, velocity, 0.01)
