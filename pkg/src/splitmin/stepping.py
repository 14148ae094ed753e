"""Direction-split time integrators.

Four schemes over the substep machinery, written in the transposed grid
algebra  result = Ax @ U @ Ay^T  (grids indexed (x, y), all blocks
Dirichlet-eliminated):

  pr          two substeps, dt_eff = tau/2 in both directions, forcing at
              t + tau/2; second order.
  strang-be   half-x / full-y / half-x backward Euler substeps
              (dt_eff = tau/2, tau, tau/2), forcing at t+tau/2 and t+tau;
              first order.
  strang-cn   Crank-Nicolson substeps (dt_eff = tau/4, tau/2, tau/4) with
              averaged forcings; second order.
  be          Lie-split backward Euler: each direction once at dt_eff = tau,
              forcing at t+tau in the x substep; first order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .assembly import apply_dirichlet, mass
from .exceptions import ParameterError
from .kron import BandedLU, OpCounter, kron_matvec
from .resmin import (LoadAssembler, SolutionState, build_directional,
                     residual_norms, substep)
from .splines import SplineSpace, make_space

__all__ = ["SchemeKind", "TimeLoopConfig", "Stepper", "project_initial",
           "pr_step", "strang_be_step", "strang_cn_step", "be_split_step"]


class SchemeKind(Enum):
    PEACEMAN_RACHFORD = "pr"
    STRANG_BE = "strang-be"
    STRANG_CN = "strang-cn"
    BE_SPLIT = "be"

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ParameterError(f"unknown scheme {name!r}; expected one of "
                             f"{[k.value for k in cls]}")

    def dt_factors(self) -> tuple[float, float]:
        """Effective-dt multipliers of tau for the (x, y) substeps."""
        return {
            SchemeKind.PEACEMAN_RACHFORD: (0.5, 0.5),
            SchemeKind.STRANG_BE: (0.5, 1.0),
            SchemeKind.STRANG_CN: (0.25, 0.5),
            SchemeKind.BE_SPLIT: (1.0, 1.0),
        }[self]

    @property
    def order(self) -> int:
        return 2 if self in (SchemeKind.PEACEMAN_RACHFORD, SchemeKind.STRANG_CN) else 1


@dataclass
class TimeLoopConfig:
    tau: float
    n_steps: int
    t0: float = 0.0
    scheme: SchemeKind = SchemeKind.PEACEMAN_RACHFORD
    stabilized: bool = True
    record_residuals: bool = True


def pr_step(state, x_op, y_op, forcing, tau):
    th = state.time + 0.5 * tau
    rhs = kron_matvec(x_op.m_rect, x_op.rhs_ops["other_minus"], state.u)
    if forcing is not None:
        rhs += x_op.dt_eff * x_op.load(forcing, th)
    mid = substep(x_op, rhs)
    rhs = kron_matvec(y_op.rhs_ops["other_minus"], y_op.m_rect, mid.u)
    if forcing is not None:
        rhs += y_op.dt_eff * y_op.load(forcing, th)
    out = substep(y_op, rhs)
    return [(x_op, mid), (y_op, out)]


def strang_be_step(state, x_op, y_op, forcing, tau):
    th, t1 = state.time + 0.5 * tau, state.time + tau
    rhs = kron_matvec(x_op.m_rect, x_op.m_other, state.u)
    if forcing is not None:
        rhs += x_op.dt_eff * x_op.load(forcing, th)
    s1 = substep(x_op, rhs)
    s2 = substep(y_op, kron_matvec(y_op.m_other, y_op.m_rect, s1.u))
    rhs = kron_matvec(x_op.m_rect, x_op.m_other, s2.u)
    if forcing is not None:
        rhs += x_op.dt_eff * x_op.load(forcing, t1)
    s3 = substep(x_op, rhs)
    return [(x_op, s1), (y_op, s2), (x_op, s3)]


def strang_cn_step(state, x_op, y_op, forcing, tau):
    t0, th, t1 = state.time, state.time + 0.5 * tau, state.time + tau
    rhs = kron_matvec(x_op.rhs_ops["rect_minus"], x_op.m_other, state.u)
    if forcing is not None:
        rhs += x_op.dt_eff * (x_op.load(forcing, th) + x_op.load(forcing, t0))
    s1 = substep(x_op, rhs)
    s2 = substep(y_op, kron_matvec(y_op.m_other, y_op.rhs_ops["rect_minus"], s1.u))
    rhs = kron_matvec(x_op.rhs_ops["rect_minus"], x_op.m_other, s2.u)
    if forcing is not None:
        rhs += x_op.dt_eff * (x_op.load(forcing, t1) + x_op.load(forcing, th))
    s3 = substep(x_op, rhs)
    return [(x_op, s1), (y_op, s2), (x_op, s3)]


def be_split_step(state, x_op, y_op, forcing, tau):
    rhs = kron_matvec(x_op.m_rect, x_op.m_other, state.u)
    if forcing is not None:
        rhs += x_op.dt_eff * x_op.load(forcing, state.time + tau)
    s1 = substep(x_op, rhs)
    s2 = substep(y_op, kron_matvec(y_op.m_other, y_op.m_rect, s1.u))
    return [(x_op, s1), (y_op, s2)]


_STEP_FUNCTIONS = {
    SchemeKind.PEACEMAN_RACHFORD: pr_step,
    SchemeKind.STRANG_BE: strang_be_step,
    SchemeKind.STRANG_CN: strang_cn_step,
    SchemeKind.BE_SPLIT: be_split_step,
}


class Stepper:
    """Owns the spaces and directional operators for one problem run.

    Operators are rebuilt each step only when the velocity field is
    time-dependent (the pollution wind); otherwise assembly and factorization
    happen once.
    """

    def __init__(self, problem, mesh: tuple[int, int], trial: tuple[int, int],
                 test: tuple[int, int], loop: TimeLoopConfig,
                 counter: OpCounter | None = None):
        if not problem.separable:
            raise ParameterError(
                f"problem {problem.name!r} has a non-separable velocity; "
                "use the general 2D solver path")
        self.problem = problem
        self.loop = loop
        self.counter = counter if counter is not None else OpCounter()
        (x0, x1), (y0, y1) = problem.domain
        p, c = trial
        self.trial_x = make_space(p, c, mesh[0], (x0, x1))
        self.trial_y = make_space(p, c, mesh[1], (y0, y1))
        q, cq = test if loop.stabilized else trial
        self.test_x = make_space(q, cq, mesh[0], (x0, x1))
        self.test_y = make_space(q, cq, mesh[1], (y0, y1))
        self._step_fn = _STEP_FUNCTIONS[loop.scheme]
        self._ops_time = None
        self.last_residual_norms = (0.0, 0.0)
        self._build_ops(loop.t0)

    def _build_ops(self, t: float) -> None:
        if self._ops_time == t:
            return
        pr = self.problem
        fx, fy = self.loop.scheme.dt_factors()
        tau = self.loop.tau

        def vx(x):
            return pr.velocity_x(x, t)

        def vy(y):
            return pr.velocity_y(y, t)

        diffusion = (pr.diffusion_x, pr.diffusion_y)
        self.x_op = build_directional("x", self.trial_x, self.trial_y, self.test_x,
                                      diffusion, (vx, vy), fx * tau,
                                      self.loop.stabilized, self.counter)
        self.y_op = build_directional("y", self.trial_x, self.trial_y, self.test_y,
                                      diffusion, (vx, vy), fy * tau,
                                      self.loop.stabilized, self.counter)
        self._ops_time = t

    def step(self, state: SolutionState) -> SolutionState:
        if self.problem.velocity_time_dependent:
            self._build_ops(state.time)
        states = self._step_fn(state, self.x_op, self.y_op,
                               self.problem.forcing, self.loop.tau)
        final_op, final = states[-1]
        final.time = state.time + self.loop.tau
        if self.loop.stabilized and self.loop.record_residuals:
            self.last_residual_norms = residual_norms(final_op, final.r)
        return final

    def initial_state(self) -> SolutionState:
        state = project_initial(self.problem.initial, self.trial_x, self.trial_y,
                                self.counter)
        state.time = self.loop.t0
        return state


def project_initial(u0, trial_x: SplineSpace, trial_y: SplineSpace,
                    counter: OpCounter | None = None) -> SolutionState:
    """L2-project u0(x, y) onto the interior trial space: (Mx (x) My) u = load."""
    loads = LoadAssembler(trial_x, trial_y)
    rhs = loads.load(lambda x, y, t: u0(x, y), 0.0)
    lux = BandedLU(apply_dirichlet(mass(trial_x, trial_x), trial_x, trial_x), counter)
    luy = BandedLU(apply_dirichlet(mass(trial_y, trial_y), trial_y, trial_y), counter)
    u = lux.solve(luy.solve(rhs.T).T)
    return SolutionState(u=u, time=0.0)
