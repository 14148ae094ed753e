"""Acceptance gate: each criterion returns (passed, detail).

`run_all()` executes every criterion in order and prints one PASS/FAIL line
per criterion; the CLI `verify` subcommand and the test suite both call in
here so the gate has a single implementation.
"""

from __future__ import annotations

import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .assembly import advection, apply_dirichlet, gram, mass, stiffness
from .kron import OpCounter
from .problems import get_problem
from .reporting import (RunConfig, compute_errors, convergence_study,
                        full_dof_count, run, sample_field, solution_l2_norm,
                        timing_study)
from .resmin import build_directional, substep
from .splines import eval_matrix, make_space
from .stepping import SchemeKind, Stepper, TimeLoopConfig

__all__ = ["run_all", "CRITERIA",
           "criterion_1_oracle_equivalence", "criterion_2_convergence_orders",
           "criterion_3_error_floor", "criterion_4_linear_cost",
           "criterion_5_galerkin_reduction", "criterion_6_dof_counts",
           "criterion_7_stability", "criterion_8_property_suite"]


def _dense_substep(op, rhs_grid: np.ndarray) -> np.ndarray:
    """Dense 2D assembled solve of one substep; returns the u grid."""
    a = op.a_split.to_dense()
    b = op.b_split.to_dense()
    mo = op.m_other.to_dense()
    m, n = b.shape
    if op.direction == "x":
        top = np.hstack([np.kron(a, mo), np.kron(b, mo)])
        bot = np.hstack([np.kron(b.T, mo), np.zeros((n * mo.shape[0],) * 2)])
        nyc = mo.shape[0]
        rhs = np.concatenate([rhs_grid.ravel(), np.zeros(n * nyc)])
        sol = np.linalg.solve(np.vstack([top, bot]), rhs)
        return sol[m * nyc:].reshape(n, nyc)
    top = np.hstack([np.kron(mo, a), np.kron(mo, b)])
    bot = np.hstack([np.kron(mo, b.T), np.zeros((n * mo.shape[0],) * 2)])
    nxc = mo.shape[0]
    rhs = np.concatenate([rhs_grid.ravel(), np.zeros(nxc * n)])
    sol = np.linalg.solve(np.vstack([top, bot]), rhs)
    return sol[nxc * m:].reshape(nxc, n)


def criterion_1_oracle_equivalence() -> tuple[bool, str]:
    problem = get_problem("manufactured")
    rng = np.random.default_rng(12345)
    worst = 0.0
    for p, c in ((1, 0), (2, 1), (3, 2)):
        for test_pair in ((p, c), (p + 1, 0)):
            for n_el in (4, 8):
                trial_x = make_space(p, c, n_el, (0.0, 1.0))
                trial_y = make_space(p, c, n_el, (0.0, 1.0))
                for direction in ("x", "y"):
                    test_split = make_space(*test_pair, n_el, (0.0, 1.0))
                    op = build_directional(
                        direction, trial_x, trial_y, test_split,
                        (problem.diffusion_x, problem.diffusion_y),
                        (lambda x: problem.velocity_x(x, 0.0),
                         lambda y: problem.velocity_y(y, 0.0)),
                        dt_eff=0.01, stabilized=True, counter=OpCounter())
                    if direction == "x":
                        shape = (op.m_split, trial_y.dim - 2)
                    else:
                        shape = (trial_x.dim - 2, op.m_split)
                    rhs = rng.standard_normal(shape)
                    u_kron = substep(op, rhs).u
                    u_dense = _dense_substep(op, rhs)
                    rel = (np.linalg.norm(u_kron - u_dense)
                           / np.linalg.norm(u_dense))
                    worst = max(worst, rel)
    return bool(worst <= 1e-9), f"worst relative coefficient difference {worst:.3e}"


_STUDY_CONFIG = RunConfig(problem="manufactured", mesh=(32, 32), trial=(2, 1),
                          test=(2, 0), scheme="pr", tau=0.02, n_steps=25)


def criterion_2_convergence_orders() -> tuple[bool, str]:
    # Temporal orders via self-reference: on this fixed 32x32 mesh the exact
    # solution carries a spatial floor of ~8e-6 relative L2, which the
    # second-order schemes reach inside this tau range, so the fit against
    # the exact solution flattens no matter how the time stepping is done.
    # Comparing each scheme against itself at tau_min/8 removes the floor
    # and isolates the time-discretization order being graded here.
    study = convergence_study(_STUDY_CONFIG, taus=(0.02, 0.01, 0.005),
                              schemes=("pr", "strang-cn", "strang-be"),
                              reference="self")
    slopes = {s: study["slopes"][s]["l2"] for s in study["slopes"]}
    ok = (1.75 <= slopes["pr"] <= 2.25 and 1.75 <= slopes["strang-cn"] <= 2.25
          and 0.75 <= slopes["strang-be"] <= 1.25)
    detail = ", ".join(f"{s}: {v:.3f}" for s, v in sorted(slopes.items()))
    return ok, f"fitted L2 orders (self-reference) {detail}"


def _final_error(scheme: str, tau: float) -> float:
    cfg = _STUDY_CONFIG
    problem = get_problem(cfg.problem)
    horizon = cfg.tau * cfg.n_steps
    loop = TimeLoopConfig(tau=tau, n_steps=int(round(horizon / tau)),
                          scheme=SchemeKind.parse(scheme),
                          record_residuals=False)
    stepper = Stepper(problem, cfg.mesh, cfg.trial, cfg.test, loop)
    state = stepper.initial_state()
    for _ in range(loop.n_steps):
        state = stepper.step(state)
    row = compute_errors(state, problem, stepper.trial_x, stepper.trial_y)
    return row.l2_percent / 100.0


def criterion_3_error_floor() -> tuple[bool, str]:
    errs = {s: _final_error(s, 0.005) for s in ("pr", "strang-cn")}
    ok = all(e <= 1e-4 for e in errs.values())
    detail = ", ".join(f"{s}: {e:.3e}" for s, e in sorted(errs.items()))
    return ok, f"relative L2 errors at tau=0.005: {detail}"


def criterion_4_linear_cost() -> tuple[bool, str]:
    rows = timing_study(meshes=(16, 32, 64, 128), pairs=(((2, 1), (3, 0)),),
                        include_general=False)
    dofs = np.array([r["dofs"] for r in rows], dtype=float)
    ops = np.array([r["split_total_ops"] for r in rows], dtype=float)
    slope = float(np.polyfit(np.log(dofs), np.log(ops), 1)[0])
    return 0.9 <= slope <= 1.2, f"op-count slope vs dofs {slope:.3f}"


def _run_pair(mesh: int, stabilized: bool):
    problem = get_problem("manufactured")
    loop = TimeLoopConfig(tau=0.01, n_steps=10,
                          scheme=SchemeKind.PEACEMAN_RACHFORD,
                          stabilized=stabilized)
    stepper = Stepper(problem, (mesh, mesh), (2, 1), (2, 1), loop)
    state = stepper.initial_state()
    for _ in range(loop.n_steps):
        state = stepper.step(state)
    return state, stepper.last_residual_norms


def criterion_5_galerkin_reduction() -> tuple[bool, str]:
    worst_diff, worst_res = 0.0, 0.0
    for mesh in (8, 16):
        saddle_state, res = _run_pair(mesh, stabilized=True)
        plain_state, _ = _run_pair(mesh, stabilized=False)
        denom = np.linalg.norm(plain_state.u)
        worst_diff = max(worst_diff,
                         np.linalg.norm(saddle_state.u - plain_state.u) / denom)
        worst_res = max(worst_res, *res)
    ok = worst_diff <= 1e-10 and worst_res < 1e-10
    return ok, (f"max relative solution difference {worst_diff:.3e}, "
                f"max residual norm {worst_res:.3e}")


def criterion_6_dof_counts() -> tuple[bool, str]:
    problem = get_problem("manufactured")
    counts = {
        ((2, 1), (3, 0), 8): 725,
        ((2, 1), (3, 0), 16): 2725,
        ((3, 2), (4, 0), 8): 1210,
    }
    for (trial, test, n), expected in counts.items():
        got = full_dof_count((n, n), trial, test, problem.domain)
        if got != expected:
            return False, (f"dofs for trial{trial}/test{test} n={n}: "
                           f"{got} != {expected}")
    rows = timing_study(meshes=(8, 64), pairs=(((2, 1), (3, 0)),),
                        include_general=True)
    t8 = rows[0]["general_time_ms"]
    t64 = rows[1]["general_time_ms"]
    ratio = t64 / t8 if t8 > 0 else float("inf")
    ok = ratio > 8.0
    return ok, (f"dof counts 725/2725/1210 exact; general-path time ratio "
                f"time(64)/time(8) = {ratio:.1f}")


def criterion_7_stability() -> tuple[bool, str]:
    problem = get_problem("pollution")
    loop = TimeLoopConfig(tau=0.1, n_steps=100,
                          scheme=SchemeKind.PEACEMAN_RACHFORD,
                          record_residuals=False)
    stepper = Stepper(problem, (50, 50), (2, 1), (3, 0), loop)
    state = stepper.initial_state()
    max_seen = 0.0
    for _ in range(loop.n_steps):
        state = stepper.step(state)
        if not np.all(np.isfinite(state.u)):
            return False, "pollution run produced NaN/Inf"
        _, _, field = sample_field(state.u, stepper.trial_x, stepper.trial_y, 101)
        max_seen = max(max_seen, float(np.max(np.abs(field))))
    horizon = loop.tau * loop.n_steps
    bound = 10.0 * (1e-6 + horizon * 1.0)  # source peak is exactly 1
    if max_seen > bound:
        return False, f"pollution max|u| {max_seen:.3e} exceeds bound {bound:.3e}"

    circ = get_problem("circular-wind")
    from .full2d import RotatingFlowStepper
    rot = RotatingFlowStepper(circ, (32, 32), (4, 3), (5, 0), tau=0.1)
    state = rot.initial_state()
    norm0 = solution_l2_norm(state.u, rot.trial_x, rot.trial_y)
    _, _, f0 = sample_field(state.u, rot.trial_x, rot.trial_y, 129)
    max0 = float(np.max(np.abs(f0)))
    worst_norm, worst_max = norm0, max0
    for _ in range(100):
        state = rot.step(state)
        worst_norm = max(worst_norm,
                         solution_l2_norm(state.u, rot.trial_x, rot.trial_y))
        _, _, fk = sample_field(state.u, rot.trial_x, rot.trial_y, 129)
        worst_max = max(worst_max, float(np.max(np.abs(fk))))
    ok = worst_max <= 1.05 * max0 and worst_norm <= 1.01 * norm0
    return ok, (f"pollution max|u| {max_seen:.3e} <= {bound:.1f}; circular "
                f"max|u| ratio {worst_max / max0:.4f} (<=1.05), L2 ratio "
                f"{worst_norm / norm0:.4f} (<=1.01)")


def criterion_8_property_suite() -> tuple[bool, str]:
    checks = []

    space = make_space(3, 2, 8, (0.0, 1.0))
    xs = np.linspace(0.0, 1.0, 301)
    vals, ders = eval_matrix(space, xs)
    checks.append(("partition of unity",
                   float(np.max(np.abs(vals.sum(axis=1) - 1.0))) < 1e-12))
    h = 1e-6
    inner = xs[(xs > 2 * h) & (xs < 1 - 2 * h)]
    fd = (eval_matrix(space, inner + h)[0] - eval_matrix(space, inner - h)[0]) / (2 * h)
    dmid = eval_matrix(space, inner)[1]
    checks.append(("derivative vs finite difference",
                   float(np.max(np.abs(fd - dmid))) < 1e-5))

    lin = make_space(1, 0, 2, (0.0, 1.0))
    m_ref = np.array([[1 / 6, 1 / 12, 0], [1 / 12, 1 / 3, 1 / 12],
                      [0, 1 / 12, 1 / 6]])
    k_ref = np.array([[2.0, -2.0, 0.0], [-2.0, 4.0, -2.0], [0.0, -2.0, 2.0]])
    g_ref = np.array([[-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5], [0.0, -0.5, 0.5]])
    checks.append(("hand-integrated degree-1 matrices",
                   np.allclose(mass(lin, lin).to_dense(), m_ref, atol=1e-14)
                   and np.allclose(stiffness(lin, lin).to_dense(), k_ref, atol=1e-13)
                   and np.allclose(advection(lin, lin).to_dense(), g_ref, atol=1e-14)))

    quad = make_space(2, 1, 6, (0.0, 1.0))
    ones = np.ones(quad.dim)
    checks.append(("stiffness and advection annihilate constants",
                   float(np.max(np.abs(stiffness(quad, quad).to_dense() @ ones))) < 1e-13
                   and float(np.max(np.abs(advection(quad, quad).to_dense() @ ones))) < 1e-13))

    g = apply_dirichlet(gram(make_space(3, 0, 6, (0.0, 1.0))),
                        make_space(3, 0, 6, (0.0, 1.0)),
                        make_space(3, 0, 6, (0.0, 1.0))).to_dense()
    eig = np.linalg.eigvalsh(0.5 * (g + g.T))
    checks.append(("gram SPD", bool(eig.min() > 0)
                   and np.allclose(g, g.T, atol=1e-13)))

    problem = get_problem("manufactured")
    op = build_directional(
        "x", make_space(2, 1, 8, (0.0, 1.0)), make_space(2, 1, 8, (0.0, 1.0)),
        make_space(3, 0, 8, (0.0, 1.0)),
        (problem.diffusion_x, problem.diffusion_y),
        (lambda x: problem.velocity_x(x, 0.0),
         lambda y: problem.velocity_y(y, 0.0)), dt_eff=0.01)
    rng = np.random.default_rng(7)
    rhs = rng.standard_normal((op.m_split, op.m_other.shape[0]))
    state = substep(op, rhs)
    a, b = op.a_split.to_dense(), op.b_split.to_dense()
    mo = op.m_other.to_dense()
    back = (a @ state.r @ mo.T + b @ state.u @ mo.T - rhs)
    rel = np.linalg.norm(back) / np.linalg.norm(rhs)
    checks.append(("saddle back-substitution residual", rel < 1e-9))

    with tempfile.TemporaryDirectory() as tmp:
        cfg = RunConfig(problem="manufactured", mesh=(8, 8), trial=(2, 1),
                        test=(3, 0), scheme="pr", tau=0.05, n_steps=5,
                        out_dir=str(Path(tmp) / "a"))
        run(cfg)
        run(replace(cfg, out_dir=str(Path(tmp) / "b")))
        same = ((Path(tmp) / "a" / "errors.csv").read_bytes()
                == (Path(tmp) / "b" / "errors.csv").read_bytes()
                and (Path(tmp) / "a" / "residuals.csv").read_bytes()
                == (Path(tmp) / "b" / "residuals.csv").read_bytes())
        checks.append(("byte-identical CSV determinism", same))

    failed = [name for name, ok in checks if not ok]
    if failed:
        return False, "failed: " + "; ".join(failed)
    return True, f"all {len(checks)} property checks passed"


CRITERIA = (
    ("1 oracle equivalence", criterion_1_oracle_equivalence),
    ("2 convergence orders", criterion_2_convergence_orders),
    ("3 error floor", criterion_3_error_floor),
    ("4 linear cost", criterion_4_linear_cost),
    ("5 galerkin reduction", criterion_5_galerkin_reduction),
    ("6 dof accounting and general-path growth", criterion_6_dof_counts),
    ("7 stability bounds", criterion_7_stability),
    ("8 property suite", criterion_8_property_suite),
)


def run_all(printer=print) -> bool:
    all_ok = True
    for name, fn in CRITERIA:
        ok, detail = fn()
        all_ok &= ok
        printer(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
