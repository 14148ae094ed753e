"""Run orchestration, error reporting, studies, and artifact export.

Artifacts are deterministic for a fixed configuration: CSV files use
shortest-roundtrip float formatting and fixed row orders, so two runs with
the same config are byte-identical.  Wall-clock measurements go only to
metadata.json and the timing table, never into solution CSVs.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .assembly import _nq, apply_dirichlet, gauss_points, mass, stiffness
from .exceptions import ParameterError
from .full2d import RotatingFlowStepper, Space2D, assemble_2d_saddle, sparse_lu
from .kron import OpCounter, kron_matvec
from .problems import get_problem
from .splines import SplineSpace, eval_matrix, make_space
from .stepping import SchemeKind, Stepper, TimeLoopConfig

__all__ = ["RunConfig", "ErrorRow", "ErrorEvaluator", "compute_errors",
           "make_stepper", "run", "convergence_study", "timing_study",
           "export_field", "sample_field", "solution_l2_norm"]

_ZERO_NORM_GUARD = 1e-14


@dataclass(frozen=True)
class RunConfig:
    problem: str = "manufactured"
    mesh: tuple[int, int] = (16, 16)
    trial: tuple[int, int] = (2, 1)
    test: tuple[int, int] = (3, 0)
    scheme: str = "pr"
    tau: float = 0.01
    n_steps: int = 50
    stabilized: bool = True
    out_dir: str = "out"
    snapshot_stride: int = 0
    snapshot_resolution: int = 65
    t0: float = 0.0


@dataclass(frozen=True)
class ErrorRow:
    t: float
    l2_percent: float
    h1_percent: float
    relative: bool


def _format(value) -> str:
    return repr(float(value))


class ErrorEvaluator:
    """Relative L2/H1 errors of a coefficient grid against a closed form.

    Quadrature: one Gauss order above the assembly rule of the trial space.
    When the exact solution's norm vanishes at t (below 1e-14), absolute
    norms are reported and the row is flagged relative=False.
    """

    def __init__(self, trial_x: SplineSpace, trial_y: SplineSpace,
                 exact, exact_grad=None):
        if exact is None:
            raise ParameterError("error evaluation requires an exact solution")
        self.exact = exact
        self.exact_grad = exact_grad
        nqx = _nq(trial_x.degree, trial_x.degree) + 1
        nqy = _nq(trial_y.degree, trial_y.degree) + 1
        self.px, self.wx = gauss_points(trial_x.breakpoints, nqx)
        self.py, self.wy = gauss_points(trial_y.breakpoints, nqy)
        vx, dx = eval_matrix(trial_x, self.px)
        vy, dy = eval_matrix(trial_y, self.py)
        self.vx, self.dx = vx[:, 1:-1], dx[:, 1:-1]
        self.vy, self.dy = vy[:, 1:-1], dy[:, 1:-1]
        self.w2 = self.wx[:, None] * self.wy[None, :]
        self._grid = (self.px[:, None], self.py[None, :])

    def errors(self, u_grid: np.ndarray, t: float) -> ErrorRow:
        X, Y = self._grid
        shape = self.w2.shape
        uh = self.vx @ u_grid @ self.vy.T
        ue = np.broadcast_to(np.asarray(self.exact(X, Y, t), dtype=float), shape)
        l2_err2 = float(np.sum(self.w2 * (ue - uh) ** 2))
        l2_ref2 = float(np.sum(self.w2 * ue ** 2))
        h1_err2, h1_ref2 = l2_err2, l2_ref2
        if self.exact_grad is not None:
            gx, gy = self.exact_grad(X, Y, t)
            gx = np.broadcast_to(np.asarray(gx, dtype=float), shape)
            gy = np.broadcast_to(np.asarray(gy, dtype=float), shape)
            dhx = self.dx @ u_grid @ self.vy.T
            dhy = self.vx @ u_grid @ self.dy.T
            h1_err2 += float(np.sum(self.w2 * ((gx - dhx) ** 2 + (gy - dhy) ** 2)))
            h1_ref2 += float(np.sum(self.w2 * (gx ** 2 + gy ** 2)))
        else:
            h1_err2 = h1_ref2 = float("nan")
        l2_err, l2_ref = np.sqrt(l2_err2), np.sqrt(l2_ref2)
        h1_err, h1_ref = np.sqrt(h1_err2), np.sqrt(h1_ref2)
        if l2_ref < _ZERO_NORM_GUARD:
            return ErrorRow(t, float(l2_err), float(h1_err), relative=False)
        return ErrorRow(t, float(100.0 * l2_err / l2_ref),
                        float(100.0 * h1_err / h1_ref), relative=True)


def compute_errors(state, problem, trial_x: SplineSpace, trial_y: SplineSpace,
                   t: Optional[float] = None) -> ErrorRow:
    evaluator = ErrorEvaluator(trial_x, trial_y, problem.exact,
                               problem.exact_grad)
    return evaluator.errors(state.u, state.time if t is None else t)


def make_stepper(problem, config: RunConfig, counter: OpCounter | None = None):
    if problem.separable:
        loop = TimeLoopConfig(tau=config.tau, n_steps=config.n_steps,
                              t0=config.t0,
                              scheme=SchemeKind.parse(config.scheme),
                              stabilized=config.stabilized)
        return Stepper(problem, config.mesh, config.trial, config.test, loop,
                       counter)
    return RotatingFlowStepper(problem, config.mesh, config.trial, config.test,
                               config.tau)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def run(config: RunConfig):
    """Execute one configured run; write artifacts; return the final state."""
    problem = get_problem(config.problem)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counter = OpCounter()
    stepper = make_stepper(problem, config, counter)
    trial_x, trial_y = stepper.trial_x, stepper.trial_y
    effective_scheme = config.scheme if problem.separable else "monolithic-cn"

    evaluator = None
    if problem.exact is not None:
        evaluator = ErrorEvaluator(trial_x, trial_y, problem.exact,
                                   problem.exact_grad)

    state = stepper.initial_state()
    error_rows, residual_rows = [], []
    if evaluator is not None:
        error_rows.append(evaluator.errors(state.u, state.time))

    def snapshot(state, step_index):
        base = out / f"field_step{step_index:06d}"
        export_field(state.u, trial_x, trial_y, config.snapshot_resolution,
                     base, title=f"{problem.name} t={state.time}")

    if config.snapshot_stride > 0:
        snapshot(state, 0)
    started = time.perf_counter()
    for k in range(1, config.n_steps + 1):
        state = stepper.step(state)
        if evaluator is not None:
            error_rows.append(evaluator.errors(state.u, state.time))
        if config.stabilized:
            l2r, h1r = stepper.last_residual_norms
            residual_rows.append((state.time, l2r, h1r))
        if config.snapshot_stride > 0 and k % config.snapshot_stride == 0:
            snapshot(state, k)
    elapsed = time.perf_counter() - started

    if config.snapshot_stride == 0 or config.n_steps % config.snapshot_stride:
        snapshot(state, config.n_steps)
    if error_rows:
        _write_csv(out / "errors.csv",
                   ("t", "l2_percent", "h1_percent", "relative"),
                   ((r.t, r.l2_percent, r.h1_percent, int(r.relative))
                    for r in error_rows))
    if residual_rows:
        _write_csv(out / "residuals.csv", ("t", "residual_l2", "residual_h1"),
                   residual_rows)
    metadata = {
        "config": asdict(config),
        "effective_scheme": effective_scheme,
        "factor_ops": counter.factor_ops,
        "solve_ops": counter.solve_ops,
        "total_ops": counter.total,
        "final_time": state.time,
        "wall_time_s": elapsed,
    }
    (out / "metadata.json").write_text(json.dumps(metadata, indent=2,
                                                  sort_keys=True) + "\n")
    return state


def _study_point(args) -> tuple[str, float, np.ndarray]:
    cfg_dict, scheme, tau, n_steps = args
    config = RunConfig(**cfg_dict)
    problem = get_problem(config.problem)
    loop = TimeLoopConfig(tau=tau, n_steps=n_steps, t0=config.t0,
                          scheme=SchemeKind.parse(scheme),
                          stabilized=config.stabilized,
                          record_residuals=False)
    stepper = Stepper(problem, config.mesh, config.trial, config.test, loop)
    state = stepper.initial_state()
    for _ in range(n_steps):
        state = stepper.step(state)
    return scheme, tau, state.u


def _trial_spaces(problem, config: RunConfig) -> tuple[SplineSpace, SplineSpace]:
    (x0, x1), (y0, y1) = problem.domain
    p, c = config.trial
    return (make_space(p, c, config.mesh[0], (x0, x1)),
            make_space(p, c, config.mesh[1], (y0, y1)))


def convergence_study(config: RunConfig, taus: Sequence[float],
                      schemes: Sequence[str] = ("pr", "strang-be", "strang-cn", "be"),
                      jobs: int = 1, out_dir: Optional[str] = None,
                      reference: str = "exact") -> dict:
    """Error-vs-tau sweep at a fixed horizon; least-squares orders per scheme.

    The horizon is config.tau * config.n_steps; every tau in the sweep must
    divide it to an integer number of steps.

    reference="exact" measures each run against the closed-form solution (the
    usual relative-percent errors).  On a fixed mesh that fit bottoms out at
    the spatial floor once the time error drops below it; reference="self"
    instead measures, per scheme, the discrete L2/H1 distance to the same
    scheme at tau_min/8, isolating the temporal order.
    """
    if len(taus) < 3:
        raise ParameterError("convergence study needs at least 3 tau values")
    if reference not in ("exact", "self"):
        raise ParameterError(f"unknown reference {reference!r}")
    horizon = config.tau * config.n_steps
    steps_of = {}
    for tau in taus:
        steps = horizon / tau
        if abs(steps - round(steps)) > 1e-9:
            raise ParameterError(
                f"tau={tau} does not divide the horizon {horizon}")
        steps_of[float(tau)] = int(round(steps))
    tasks = [(asdict(config), scheme, float(tau), steps_of[float(tau)])
             for scheme in schemes for tau in taus]
    tau_ref = None
    if reference == "self":
        tau_min = float(min(taus))
        tau_ref = tau_min / 8.0
        tasks += [(asdict(config), scheme, tau_ref, 8 * steps_of[tau_min])
                  for scheme in schemes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_study_point, tasks))
    else:
        results = [_study_point(t) for t in tasks]
    grids = {(s, t): u for s, t, u in results}

    problem = get_problem(config.problem)
    trial_x, trial_y = _trial_spaces(problem, config)
    points = {}
    if reference == "exact":
        evaluator = ErrorEvaluator(trial_x, trial_y, problem.exact,
                                   problem.exact_grad)
        t_final = config.t0 + horizon
        for scheme in schemes:
            for tau in taus:
                row = evaluator.errors(grids[(scheme, float(tau))], t_final)
                points[(scheme, float(tau))] = (row.l2_percent, row.h1_percent)
    else:
        mx = apply_dirichlet(mass(trial_x, trial_x), trial_x, trial_x)
        my = apply_dirichlet(mass(trial_y, trial_y), trial_y, trial_y)
        kx = apply_dirichlet(stiffness(trial_x, trial_x), trial_x, trial_x)
        ky = apply_dirichlet(stiffness(trial_y, trial_y), trial_y, trial_y)
        for scheme in schemes:
            ref = grids[(scheme, tau_ref)]
            for tau in taus:
                d = grids[(scheme, float(tau))] - ref
                l2sq = float(np.sum(d * kron_matvec(mx, my, d)))
                h1sq = l2sq + float(np.sum(d * kron_matvec(kx, my, d))) \
                    + float(np.sum(d * kron_matvec(mx, ky, d)))
                points[(scheme, float(tau))] = (np.sqrt(max(l2sq, 0.0)),
                                                np.sqrt(max(h1sq, 0.0)))

    slopes = {}
    for scheme in schemes:
        errs = np.array([points[(scheme, float(t))] for t in taus])
        logt = np.log(np.asarray(taus, dtype=float))
        slopes[scheme] = {
            "l2": float(np.polyfit(logt, np.log(errs[:, 0]), 1)[0]),
            "h1": float(np.polyfit(logt, np.log(errs[:, 1]), 1)[0]),
        }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        labels = (("l2_percent", "h1_percent") if reference == "exact"
                  else ("l2_abs", "h1_abs"))
        _write_csv(out / "convergence.csv", ("scheme", "tau", *labels),
                   ((s, float(t), *points[(s, float(t))])
                    for s in schemes for t in taus))
        _write_csv(out / "slopes.csv", ("scheme", "l2_order", "h1_order"),
                   ((s, slopes[s]["l2"], slopes[s]["h1"]) for s in schemes))
    return {"points": points, "slopes": slopes, "horizon": horizon,
            "reference": reference}


def _space_pair_label(trial, test) -> str:
    return f"trial({trial[0]},{trial[1]})/test({test[0]},{test[1]})"


def full_dof_count(mesh: tuple[int, int], trial: tuple[int, int],
                   test: tuple[int, int], domain=((0.0, 1.0), (0.0, 1.0))) -> int:
    """Saddle unknown count: full (uneliminated) 2D test dim + trial dim."""
    (x0, x1), (y0, y1) = domain
    tx = make_space(trial[0], trial[1], mesh[0], (x0, x1))
    ty = make_space(trial[0], trial[1], mesh[1], (y0, y1))
    sx = make_space(test[0], test[1], mesh[0], (x0, x1))
    sy = make_space(test[0], test[1], mesh[1], (y0, y1))
    return tx.dim * ty.dim + sx.dim * sy.dim


def _unit_wind(x, y):
    return 1.0, 0.0


def timing_study(meshes: Sequence[int],
                 pairs: Sequence[tuple[tuple[int, int], tuple[int, int]]],
                 out_dir: Optional[str] = None,
                 include_general: bool = True,
                 tau: float = 0.01) -> list[dict]:
    """Per-mesh cost table for both solver paths.

    The split path reports counted floating-point operations (factor + solve
    of one step) and wall time; the general path reports wall time of sparse
    factorization plus one solve on the same spaces.  dofs column counts full
    test + trial dimensions.
    """
    problem = get_problem("manufactured")
    rows = []
    for trial, test in pairs:
        for n in meshes:
            mesh = (n, n)
            counter = OpCounter()
            started = time.perf_counter()
            loop = TimeLoopConfig(tau=tau, n_steps=1,
                                  scheme=SchemeKind.PEACEMAN_RACHFORD,
                                  stabilized=True, record_residuals=False)
            stepper = Stepper(problem, mesh, trial, test, loop, counter)
            factor_ops, solve_ops0 = counter.factor_ops, counter.solve_ops
            state = stepper.initial_state()
            counter.solve_ops = solve_ops0
            state = stepper.step(state)
            kron_time = time.perf_counter() - started
            row = {
                "space": _space_pair_label(trial, test),
                "n": n,
                "dofs": full_dof_count(mesh, trial, test, problem.domain),
                "split_factor_ops": factor_ops,
                "split_solve_ops": counter.solve_ops,
                "split_total_ops": factor_ops + counter.solve_ops,
                "split_time_ms": 1e3 * kron_time,
            }
            if include_general:
                (x0, x1), (y0, y1) = problem.domain
                trial2 = Space2D(make_space(trial[0], trial[1], n, (x0, x1)),
                                 make_space(trial[0], trial[1], n, (y0, y1)))
                test2 = Space2D(make_space(test[0], test[1], n, (x0, x1)),
                                make_space(test[0], test[1], n, (y0, y1)))
                system = assemble_2d_saddle(trial2, test2, problem.alpha,
                                            _unit_wind, 0.5 * tau)
                rhs = np.ones(system.matrix.shape[0])
                started = time.perf_counter()
                factor = sparse_lu(system.matrix)
                factor.solve(rhs)
                row["general_time_ms"] = 1e3 * (time.perf_counter() - started)
            rows.append(row)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        header = list(rows[0].keys())
        _write_csv(out / "timing.csv", header,
                   (tuple(r[h] for h in header) for r in rows))
    return rows


def sample_field(u_grid: np.ndarray, trial_x: SplineSpace, trial_y: SplineSpace,
                 resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.linspace(*trial_x.interval, resolution)
    ys = np.linspace(*trial_y.interval, resolution)
    vx = eval_matrix(trial_x, xs)[0][:, 1:-1]
    vy = eval_matrix(trial_y, ys)[0][:, 1:-1]
    return xs, ys, vx @ u_grid @ vy.T


def export_field(u_grid: np.ndarray, trial_x: SplineSpace, trial_y: SplineSpace,
                 resolution: int, path_base, title: str = "field") -> None:
    """Write <base>.vtk (legacy STRUCTURED_POINTS) and <base>.csv (x,y,value)."""
    xs, ys, field = sample_field(u_grid, trial_x, trial_y, resolution)
    base = Path(path_base)
    nx, ny = len(xs), len(ys)
    dx = (xs[-1] - xs[0]) / (nx - 1) if nx > 1 else 1.0
    dy = (ys[-1] - ys[0]) / (ny - 1) if ny > 1 else 1.0
    lines = ["# vtk DataFile Version 3.0", title, "ASCII",
             "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {nx} {ny} 1",
             f"ORIGIN {_format(xs[0])} {_format(ys[0])} 0.0",
             f"SPACING {_format(dx)} {_format(dy)} 1.0",
             f"POINT_DATA {nx * ny}",
             "SCALARS u double 1",
             "LOOKUP_TABLE default"]
    for j in range(ny):
        for i in range(nx):
            lines.append(_format(field[i, j]))
    base.with_suffix(".vtk").write_text("\n".join(lines) + "\n")
    rows = ((float(xs[i]), float(ys[j]), float(field[i, j]))
            for i in range(nx) for j in range(ny))
    _write_csv(base.with_suffix(".csv"), ("x", "y", "value"), rows)


def solution_l2_norm(u_grid: np.ndarray, trial_x: SplineSpace,
                     trial_y: SplineSpace) -> float:
    mx = apply_dirichlet(mass(trial_x, trial_x), trial_x, trial_x)
    my = apply_dirichlet(mass(trial_y, trial_y), trial_y, trial_y)
    return float(np.sqrt(max(np.sum(u_grid * kron_matvec(mx, my, u_grid)), 0.0)))
