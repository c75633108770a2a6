"""Minimum-time traversal of a single zone under acceleration and speed bounds.

The closed-form solution accelerates at u_max up to a switching state and then
decelerates at u_min to the required exit state. When the switching speed would
exceed the speed limit, a cruise segment at v_max is inserted and the plan is
flagged as saturated. Merging zones are crossed at the fixed speed v_z, so their
traversal time is length / v_z.
"""

import bisect
import enum
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import solve_linear
from .dynamics import Limits, VehicleState
from .topology import Zone, ZoneKind

__all__ = [
    "ZoneBoundary",
    "Profile",
    "Phase",
    "BangBangPlan",
    "InfeasibleBoundary",
    "NoSwitchingPoint",
    "final_speed_bounds",
    "switching_state",
    "plan_min_time",
    "process_time",
    "feedback_control",
    "eval_trajectory",
    "sample_trajectory",
]

# Relative band inside which an exit speed counts as sitting exactly on a
# reachability bound (avoids a vanishing second phase with negative duration).
BOUNDARY_REL_TOL = 1e-9


class InfeasibleBoundary(ValueError):
    """Exit speed not reachable over the zone under the given limits."""


class NoSwitchingPoint(ValueError):
    """Exit speed equals a reachability bound: single-phase profile, no interior switch."""


class Profile(str, enum.Enum):
    ACCEL_THEN_DECEL = "accel_then_decel"
    PURE_ACCEL = "pure_accel"
    PURE_DECEL = "pure_decel"
    ACCEL_CRUISE_DECEL = "accel_cruise_decel"


@dataclass(frozen=True)
class ZoneBoundary:
    """Entry/exit position and speed for one zone traversal, in path coordinates."""

    p_s: float
    v_s: float
    p_e: float
    v_e: float

    def __post_init__(self):
        if self.p_e < self.p_s:
            raise ValueError(f"zone must have p_e >= p_s, got [{self.p_s}, {self.p_e}]")
        if self.v_s <= 0.0 or self.v_e <= 0.0:
            raise ValueError(f"boundary speeds must be positive, got v_s={self.v_s}, v_e={self.v_e}")

    @property
    def length(self) -> float:
        return self.p_e - self.p_s


@dataclass(frozen=True)
class Phase:
    """Constant-control segment over zone-relative time [t0, t1].

    Speed and position evaluate as v(t) = u*t + b and p(t) = u*t^2/2 + b*t + c.
    """

    t0: float
    t1: float
    u: float
    b: float
    c: float

    def eval(self, t: float) -> VehicleState:
        return VehicleState(p=0.5 * self.u * t * t + self.b * t + self.c, v=self.u * t + self.b)


@dataclass(frozen=True)
class BangBangPlan:
    """Closed-form minimum-time plan for one zone, in zone-relative time.

    t_c is when the first control arc ends (for saturated plans: when the cruise
    begins), (p_c, v_c) the state there, and t_e the exit time. `saturated`
    marks plans where the speed limit forced a cruise segment.
    """

    boundary: ZoneBoundary
    profile: Profile
    p_c: float
    v_c: float
    t_c: float
    t_e: float
    phases: tuple[Phase, ...]
    saturated: bool = False

    @property
    def phase_constants(self) -> tuple[tuple[float, float], ...]:
        return tuple((ph.b, ph.c) for ph in self.phases)


def _raw_speed_bounds(p_s: float, v_s: float, p_e: float, lim: Limits) -> tuple[float | None, float]:
    """Reachable exit-speed extremes ignoring the speed limits.

    The lower bound is None when full braking reaches zero speed before the
    zone end (negative radicand).
    """
    dp = p_e - p_s
    hi = math.sqrt(2.0 * lim.u_max * dp + v_s * v_s)
    lo_rad = 2.0 * lim.u_min * dp + v_s * v_s
    lo = math.sqrt(lo_rad) if lo_rad >= 0.0 else None
    return lo, hi


def final_speed_bounds(p_s: float, v_s: float, p_e: float, lim: Limits) -> tuple[float, float]:
    """Admissible exit-speed interval for a zone entered at (p_s, v_s)."""
    lo_raw, hi_raw = _raw_speed_bounds(p_s, v_s, p_e, lim)
    v_hi = min(lim.v_max, hi_raw)
    v_lo = max(lim.v_min, lo_raw if lo_raw is not None else 0.0)
    return v_lo, v_hi


def _near(value: float, target: float | None) -> bool:
    if target is None:
        return False
    return abs(value - target) <= BOUNDARY_REL_TOL * max(1.0, abs(target))


def switching_state(b: ZoneBoundary, lim: Limits) -> tuple[float, float]:
    """Interior switching state (p_c, v_c) where the control flips from u_max to u_min.

    Raises NoSwitchingPoint when the exit speed sits on a reachability bound
    (single-phase profile) and InfeasibleBoundary when it is outside the bounds.
    """
    lo_raw, hi_raw = _raw_speed_bounds(b.p_s, b.v_s, b.p_e, lim)
    if _near(b.v_e, hi_raw) or _near(b.v_e, lo_raw):
        raise NoSwitchingPoint(f"v_e={b.v_e} equals a reachability bound; use a single-phase profile")
    if b.v_e > hi_raw or (lo_raw is not None and b.v_e < lo_raw):
        raise InfeasibleBoundary(f"v_e={b.v_e} outside reachable range [{lo_raw}, {hi_raw}]")
    p_c = (b.v_e**2 - b.v_s**2 + 2.0 * (lim.u_max * b.p_s - lim.u_min * b.p_e)) / (2.0 * (lim.u_max - lim.u_min))
    v_c = math.sqrt(b.v_s**2 + 2.0 * lim.u_max * (p_c - b.p_s))
    return p_c, v_c


def _phase_from_state(t0: float, t1: float, u: float, p0: float, v0: float) -> Phase:
    # Constants from the 2x2 boundary-condition system [[t0, 1], [1, 0]]·[b, c]^T = q.
    bc = solve_linear([[t0, 1.0], [1.0, 0.0]], [p0 - 0.5 * u * t0 * t0, v0 - u * t0])
    return Phase(t0=t0, t1=t1, u=u, b=bc[0], c=bc[1])


def _phase_from_exit(t0: float, t1: float, u: float, p1: float, v1: float) -> Phase:
    bc = solve_linear([[t1, 1.0], [1.0, 0.0]], [p1 - 0.5 * u * t1 * t1, v1 - u * t1])
    return Phase(t0=t0, t1=t1, u=u, b=bc[0], c=bc[1])


def plan_min_time(b: ZoneBoundary, lim: Limits) -> BangBangPlan:
    """Solve the minimum-time zone traversal for a regular zone.

    Returns a plan whose trajectory starts at (p_s, v_s) at zone-relative time 0
    and reaches (p_e, v_e) at t_e. Raises InfeasibleBoundary when the exit speed
    cannot be met.
    """
    tol_v = BOUNDARY_REL_TOL * max(1.0, lim.v_max)
    if not (lim.v_min - tol_v <= b.v_s <= lim.v_max + tol_v):
        raise InfeasibleBoundary(f"entry speed {b.v_s} outside [{lim.v_min}, {lim.v_max}]")
    if not (lim.v_min - tol_v <= b.v_e <= lim.v_max + tol_v):
        raise InfeasibleBoundary(f"exit speed {b.v_e} outside [{lim.v_min}, {lim.v_max}]")

    if b.length == 0.0:
        if not _near(b.v_e, b.v_s):
            raise InfeasibleBoundary(f"zero-length zone cannot change speed {b.v_s} -> {b.v_e}")
        phase = _phase_from_state(0.0, 0.0, 0.0, b.p_s, b.v_s)
        return BangBangPlan(b, Profile.PURE_ACCEL, b.p_s, b.v_s, 0.0, 0.0, (phase,))

    lo_raw, hi_raw = _raw_speed_bounds(b.p_s, b.v_s, b.p_e, lim)

    if _near(b.v_e, hi_raw):
        t_e = (b.v_e - b.v_s) / lim.u_max
        phase = _phase_from_state(0.0, t_e, lim.u_max, b.p_s, b.v_s)
        return BangBangPlan(b, Profile.PURE_ACCEL, b.p_e, b.v_e, t_e, t_e, (phase,))

    if _near(b.v_e, lo_raw):
        t_e = (b.v_e - b.v_s) / lim.u_min
        phase = _phase_from_state(0.0, t_e, lim.u_min, b.p_s, b.v_s)
        return BangBangPlan(b, Profile.PURE_DECEL, b.p_s, b.v_s, 0.0, t_e, (phase,))

    if b.v_e > hi_raw or (lo_raw is not None and b.v_e < lo_raw):
        raise InfeasibleBoundary(
            f"v_e={b.v_e} outside reachable range [{lo_raw if lo_raw is not None else lim.v_min}, {hi_raw}]"
        )

    p_c, v_c = switching_state(b, lim)

    if v_c <= lim.v_max * (1.0 + BOUNDARY_REL_TOL):
        t_c = (v_c - b.v_s) / lim.u_max
        t_e = t_c + (b.v_e - v_c) / lim.u_min
        accel = _phase_from_state(0.0, t_c, lim.u_max, b.p_s, b.v_s)
        decel = _phase_from_exit(t_c, t_e, lim.u_min, b.p_e, b.v_e)
        return BangBangPlan(b, Profile.ACCEL_THEN_DECEL, p_c, v_c, t_c, t_e, (accel, decel))

    # Speed limit binds: accelerate to v_max, cruise, then decelerate.
    t1 = (lim.v_max - b.v_s) / lim.u_max
    d1 = (lim.v_max**2 - b.v_s**2) / (2.0 * lim.u_max)
    t3 = (b.v_e - lim.v_max) / lim.u_min
    d3 = (b.v_e**2 - lim.v_max**2) / (2.0 * lim.u_min)
    d2 = b.length - d1 - d3
    t2 = d2 / lim.v_max
    t_e = t1 + t2 + t3

    phases = []
    if t1 > 0.0:
        phases.append(_phase_from_state(0.0, t1, lim.u_max, b.p_s, b.v_s))
    phases.append(_phase_from_state(t1, t1 + t2, 0.0, b.p_s + d1, lim.v_max))
    if t3 > 0.0:
        phases.append(_phase_from_exit(t1 + t2, t_e, lim.u_min, b.p_e, b.v_e))
    return BangBangPlan(
        b, Profile.ACCEL_CRUISE_DECEL, b.p_s + d1, lim.v_max, t1, t_e, tuple(phases), saturated=True
    )


def process_time(zone: Zone, b: ZoneBoundary, lim: Limits, v_z: float) -> float:
    """Minimum feasible traversal duration of a zone.

    Regular zones use the minimum-time plan; merging zones are crossed at the
    fixed speed v_z, which both boundary speeds must equal.
    """
    if zone.kind is ZoneKind.MERGING:
        if not (_near(b.v_s, v_z) and _near(b.v_e, v_z)):
            raise ValueError(f"merging zone {zone.id} requires entry/exit speed v_z={v_z}, got {b.v_s}/{b.v_e}")
        return (b.p_e - b.p_s) / v_z
    return plan_min_time(b, lim).t_e


def _phase_at(plan: BangBangPlan, t_local: float) -> Phase:
    starts = [ph.t0 for ph in plan.phases]
    idx = bisect.bisect_right(starts, t_local) - 1
    return plan.phases[max(0, min(idx, len(plan.phases) - 1))]


def feedback_control(plan: BangBangPlan, t: float, t_entry: float) -> float:
    """Control input at absolute time t for a plan entered at t_entry.

    The switch instant itself belongs to the later phase (half-open first
    phase); the final instant t_entry + t_e belongs to the last phase.
    """
    tau = t - t_entry
    tol = BOUNDARY_REL_TOL * max(1.0, plan.t_e)
    if tau < -tol or tau > plan.t_e + tol:
        raise ValueError(f"t={t} outside plan window [{t_entry}, {t_entry + plan.t_e}]")
    tau = min(max(tau, 0.0), plan.t_e)
    return _phase_at(plan, tau).u


def eval_trajectory(plan: BangBangPlan, t: float) -> VehicleState:
    """State at zone-relative time t in [0, t_e]."""
    tol = BOUNDARY_REL_TOL * max(1.0, plan.t_e)
    if t < -tol or t > plan.t_e + tol:
        raise ValueError(f"t={t} outside [0, {plan.t_e}]")
    t = min(max(t, 0.0), plan.t_e)
    return _phase_at(plan, t).eval(t)


def sample_trajectory(plan: BangBangPlan, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (p, v, u) along the plan for zone-relative times ts."""
    ts = np.asarray(ts, dtype=float)
    starts = np.array([ph.t0 for ph in plan.phases])
    idx = np.clip(np.searchsorted(starts, ts, side="right") - 1, 0, len(plan.phases) - 1)
    u = np.array([ph.u for ph in plan.phases])[idx]
    bs = np.array([ph.b for ph in plan.phases])[idx]
    cs = np.array([ph.c for ph in plan.phases])[idx]
    v = u * ts + bs
    p = 0.5 * u * ts * ts + bs * ts + cs
    return p, v, u
