"""Time integrators: scheme catalog, projection, orders, stability."""

import numpy as np
import pytest

from splitmin.exceptions import ParameterError
from splitmin.problems import get_problem
from splitmin.reporting import (RunConfig, compute_errors, convergence_study,
                                solution_l2_norm)
from splitmin.resmin import build_directional
from splitmin.splines import eval_matrix, make_space
from splitmin.stepping import (SchemeKind, Stepper, TimeLoopConfig,
                               pr_step, project_initial)


def test_scheme_parsing_and_catalog():
    assert SchemeKind.parse("pr") is SchemeKind.PEACEMAN_RACHFORD
    assert SchemeKind.parse("strang-cn") is SchemeKind.STRANG_CN
    with pytest.raises(ParameterError):
        SchemeKind.parse("rk4")
    assert SchemeKind.PEACEMAN_RACHFORD.dt_factors() == (0.5, 0.5)
    assert SchemeKind.STRANG_BE.dt_factors() == (0.5, 1.0)
    assert SchemeKind.STRANG_CN.dt_factors() == (0.25, 0.5)
    assert SchemeKind.BE_SPLIT.dt_factors() == (1.0, 1.0)
    assert SchemeKind.PEACEMAN_RACHFORD.order == 2
    assert SchemeKind.STRANG_CN.order == 2
    assert SchemeKind.STRANG_BE.order == 1
    assert SchemeKind.BE_SPLIT.order == 1


def test_projection_reproduces_member_of_the_space():
    tx = make_space(2, 1, 6, (0.0, 1.0))
    ty = make_space(3, 2, 5, (0.0, 1.0))
    rng = np.random.default_rng(40)
    coeff = rng.standard_normal((tx.dim - 2, ty.dim - 2))

    def u0(x, y):
        xv = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        yv = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        vx = eval_matrix(tx, xv)[0][:, 1:-1]
        vy = eval_matrix(ty, yv)[0][:, 1:-1]
        return vx @ coeff @ vy.T

    state = project_initial(u0, tx, ty)
    np.testing.assert_allclose(state.u, coeff, atol=1e-10)
    assert state.time == 0.0


def test_projection_error_shrinks_with_mesh():
    u0 = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    errs = []
    for n in (4, 8, 16):
        tx = make_space(2, 1, n, (0.0, 1.0))
        state = project_initial(u0, tx, tx)
        xs = np.linspace(0.1, 0.9, 33)
        vx = eval_matrix(tx, xs)[0][:, 1:-1]
        uh = vx @ state.u @ vx.T
        ue = u0(xs[:, None], xs[None, :])
        errs.append(float(np.max(np.abs(uh - ue))))
    assert errs[1] < errs[0] / 4 and errs[2] < errs[1] / 4


def test_temporal_orders_by_richardson_self_reference():
    config = RunConfig(problem="manufactured", mesh=(8, 8), trial=(2, 1),
                       test=(3, 0), tau=0.04, n_steps=5)
    study = convergence_study(config, taus=(0.04, 0.02, 0.01),
                              schemes=("pr", "strang-cn", "strang-be", "be"),
                              reference="self")
    slopes = {s: study["slopes"][s]["l2"] for s in study["slopes"]}
    assert 1.7 <= slopes["pr"] <= 2.3
    assert 1.7 <= slopes["strang-cn"] <= 2.3
    assert 0.8 <= slopes["strang-be"] <= 1.3
    assert 0.8 <= slopes["be"] <= 1.3


def test_forced_run_tracks_exact_solution():
    problem = get_problem("manufactured")
    loop = TimeLoopConfig(tau=0.01, n_steps=10,
                          scheme=SchemeKind.PEACEMAN_RACHFORD)
    stepper = Stepper(problem, (16, 16), (2, 1), (3, 0), loop)
    state = stepper.initial_state()
    for _ in range(loop.n_steps):
        state = stepper.step(state)
    assert state.time == pytest.approx(0.1)
    row = compute_errors(state, problem, stepper.trial_x, stepper.trial_y)
    assert row.relative
    assert row.l2_percent < 0.05
    assert row.h1_percent < 0.5


def test_pure_diffusion_norm_decays_monotonically():
    tx = make_space(2, 1, 8, (0.0, 1.0))
    ty = make_space(2, 1, 8, (0.0, 1.0))
    sx = make_space(3, 0, 8, (0.0, 1.0))
    tau = 0.1
    x_op = build_directional("x", tx, ty, sx, (1.0, 1.0), (0.0, 0.0),
                             0.5 * tau)
    y_op = build_directional("y", tx, ty, sx, (1.0, 1.0), (0.0, 0.0),
                             0.5 * tau)
    state = project_initial(
        lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y), tx, ty)
    norms = [solution_l2_norm(state.u, tx, ty)]
    for _ in range(30):
        state = pr_step(state, x_op, y_op, None, tau)[-1][1]
        norms.append(solution_l2_norm(state.u, tx, ty))
    diffs = np.diff(norms)
    assert np.all(diffs <= 1e-12)
    assert norms[-1] < 1e-6 * norms[0]


def test_stabilized_equals_plain_galerkin_when_test_is_trial():
    problem = get_problem("manufactured")
    results = {}
    for stabilized in (True, False):
        loop = TimeLoopConfig(tau=0.02, n_steps=5,
                              scheme=SchemeKind.STRANG_CN,
                              stabilized=stabilized)
        stepper = Stepper(problem, (8, 8), (2, 1), (2, 1), loop)
        state = stepper.initial_state()
        for _ in range(loop.n_steps):
            state = stepper.step(state)
        results[stabilized] = state.u
    diff = np.linalg.norm(results[True] - results[False])
    assert diff / np.linalg.norm(results[False]) < 1e-10


def test_residual_norms_recorded_only_when_stabilized():
    problem = get_problem("manufactured")
    loop = TimeLoopConfig(tau=0.02, n_steps=1,
                          scheme=SchemeKind.PEACEMAN_RACHFORD, stabilized=True)
    stepper = Stepper(problem, (8, 8), (2, 1), (3, 0), loop)
    state = stepper.initial_state()
    stepper.step(state)
    l2, h1 = stepper.last_residual_norms
    assert l2 > 0.0 and h1 >= l2


def test_time_dependent_wind_rebuilds_operators():
    problem = get_problem("pollution")
    loop = TimeLoopConfig(tau=0.5, n_steps=2,
                          scheme=SchemeKind.PEACEMAN_RACHFORD,
                          record_residuals=False)
    stepper = Stepper(problem, (8, 8), (2, 1), (3, 0), loop)
    state = stepper.initial_state()
    first_ops = stepper.x_op
    state = stepper.step(state)
    state = stepper.step(state)
    assert stepper.x_op is not first_ops
    assert np.all(np.isfinite(state.u))


def test_steady_wind_keeps_factorizations():
    problem = get_problem("manufactured")
    loop = TimeLoopConfig(tau=0.01, n_steps=2,
                          scheme=SchemeKind.PEACEMAN_RACHFORD)
    stepper = Stepper(problem, (8, 8), (2, 1), (3, 0), loop)
    state = stepper.initial_state()
    first_ops = stepper.x_op
    stepper.step(stepper.step(state))
    assert stepper.x_op is first_ops


def test_non_separable_problem_rejected_by_split_stepper():
    problem = get_problem("circular-wind")
    loop = TimeLoopConfig(tau=0.1, n_steps=1)
    with pytest.raises(ParameterError):
        Stepper(problem, (8, 8), (4, 3), (5, 0), loop)
