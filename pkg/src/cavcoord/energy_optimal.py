"""Minimum-energy (L2-norm of control) traversal between fixed timed boundary states.

With both endpoint times fixed, the unconstrained optimum has a linear control
u(t) = a*t + b, so speed is quadratic and position cubic in absolute time. The
four integration constants follow from the entry/exit position and speed. Bound
violations of the resulting profile are detected and reported, never repaired.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import SingularSystem, solve_linear
from .dynamics import Limits, VehicleState, Violation
from .time_optimal import ZoneBoundary

__all__ = [
    "TimedBoundary",
    "CubicCoeffs",
    "DegenerateHorizon",
    "ExtrapolationWarning",
    "solve_energy",
    "eval_energy",
    "check_inactive_constraints",
    "replan_from",
]


class DegenerateHorizon(ValueError):
    """Entry and exit times coincide; the boundary-condition system is singular."""


class ExtrapolationWarning(UserWarning):
    """Evaluation outside the solved horizon."""


@dataclass(frozen=True)
class TimedBoundary:
    """A zone boundary plus the scheduled entry and exit times (absolute seconds)."""

    boundary: ZoneBoundary
    t_entry: float
    t_exit: float

    def __post_init__(self):
        if self.t_exit <= self.t_entry:
            raise DegenerateHorizon(f"horizon must be positive, got [{self.t_entry}, {self.t_exit}]")

    @property
    def horizon(self) -> float:
        return self.t_exit - self.t_entry


@dataclass(frozen=True)
class CubicCoeffs:
    """Integration constants of u = a*t + b, v = a*t^2/2 + b*t + c, p = a*t^3/6 + b*t^2/2 + c*t + d."""

    a: float
    b: float
    c: float
    d: float


def solve_energy(tb: TimedBoundary) -> CubicCoeffs:
    """Solve the four boundary conditions for the cubic-position coefficients.

    The 4x4 system (position and speed rows at entry and exit time) is solved
    by direct elimination with partial pivoting.
    """
    t0, t1 = tb.t_entry, tb.t_exit
    bnd = tb.boundary
    rows = [
        [t0**3 / 6.0, t0**2 / 2.0, t0, 1.0],
        [t0**2 / 2.0, t0, 1.0, 0.0],
        [t1**3 / 6.0, t1**2 / 2.0, t1, 1.0],
        [t1**2 / 2.0, t1, 1.0, 0.0],
    ]
    rhs = [bnd.p_s, bnd.v_s, bnd.p_e, bnd.v_e]
    try:
        a, b, c, d = solve_linear(rows, rhs)
    except SingularSystem as exc:
        raise DegenerateHorizon(f"boundary-condition system singular over [{t0}, {t1}]") from exc
    return CubicCoeffs(a=a, b=b, c=c, d=d)


def eval_energy(c: CubicCoeffs, t: float, tb: TimedBoundary | None = None) -> tuple[float, VehicleState]:
    """Control and state at absolute time t.

    Evaluation outside the horizon is permitted but flagged with an
    ExtrapolationWarning when the timed boundary is supplied.
    """
    if tb is not None and not (tb.t_entry <= t <= tb.t_exit):
        warnings.warn(f"t={t} outside horizon [{tb.t_entry}, {tb.t_exit}]", ExtrapolationWarning, stacklevel=2)
    u = c.a * t + c.b
    v = 0.5 * c.a * t * t + c.b * t + c.c
    p = c.a * t**3 / 6.0 + 0.5 * c.b * t * t + c.c * t + c.d
    return u, VehicleState(p=p, v=v)


def check_inactive_constraints(c: CubicCoeffs, tb: TimedBoundary, lim: Limits) -> list[Violation]:
    """Bound violations of the solved profile over its horizon.

    The control is linear (extremes at the horizon endpoints) and the speed
    quadratic (endpoints plus the interior stationary point where u = 0).
    """
    violations = []
    for t in (tb.t_entry, tb.t_exit):
        u = c.a * t + c.b
        if u < lim.u_min:
            violations.append(Violation("control_low", u, lim.u_min, t=t))
        elif u > lim.u_max:
            violations.append(Violation("control_high", u, lim.u_max, t=t))

    speed_times = [tb.t_entry, tb.t_exit]
    if c.a != 0.0:
        t_star = -c.b / c.a
        if tb.t_entry < t_star < tb.t_exit:
            speed_times.append(t_star)
    for t in speed_times:
        v = 0.5 * c.a * t * t + c.b * t + c.c
        if v < lim.v_min:
            violations.append(Violation("speed_low", v, lim.v_min, t=t))
        elif v > lim.v_max:
            violations.append(Violation("speed_high", v, lim.v_max, t=t))
    return violations


def replan_from(c: CubicCoeffs, t_now: float, tb: TimedBoundary) -> CubicCoeffs:
    """Re-solve the coefficients from the current state at t_now to the same exit boundary.

    On-trajectory states reproduce the original coefficients (the system has a
    unique solution); perturbed states yield new coefficients that restore the
    exit boundary. The current state is evaluated in extended precision: its
    rounding error is what the re-solve would otherwise amplify.
    """
    if not (tb.t_entry <= t_now < tb.t_exit):
        raise ValueError(f"t_now={t_now} outside [{tb.t_entry}, {tb.t_exit})")
    t = np.longdouble(t_now)
    v_now = float(np.longdouble(c.a) * t * t / 2 + np.longdouble(c.b) * t + np.longdouble(c.c))
    p_now = float(
        np.longdouble(c.a) * t**3 / 6 + np.longdouble(c.b) * t * t / 2 + np.longdouble(c.c) * t + np.longdouble(c.d)
    )
    bnd = tb.boundary
    new_tb = TimedBoundary(
        boundary=ZoneBoundary(p_s=p_now, v_s=v_now, p_e=bnd.p_e, v_e=bnd.v_e),
        t_entry=t_now,
        t_exit=tb.t_exit,
    )
    return solve_energy(new_tb)
