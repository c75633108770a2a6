"""Double-integrator vehicle model: exact constant-acceleration steps and limit checks.

Positions are one-dimensional path-arclength coordinates measured from the
control-zone entry. A single set of acceleration/speed limits applies to every
vehicle in a scenario.
"""

from dataclasses import dataclass

__all__ = ["VehicleState", "Limits", "Violation", "integrate_const_accel", "check_limits"]


@dataclass(frozen=True)
class VehicleState:
    """Longitudinal state: position p [m] along the path, speed v [m/s]."""

    p: float
    v: float


@dataclass(frozen=True)
class Limits:
    """Control and speed bounds shared by all vehicles.

    u_min must be negative, u_max positive, and 0 < v_min <= v_max.
    """

    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < 0.0 < self.u_max):
            raise ValueError(f"control bounds must satisfy u_min < 0 < u_max, got [{self.u_min}, {self.u_max}]")
        if not (0.0 < self.v_min <= self.v_max):
            raise ValueError(f"speed bounds must satisfy 0 < v_min <= v_max, got [{self.v_min}, {self.v_max}]")


@dataclass(frozen=True)
class Violation:
    """A single bound violation. kind is one of control_low, control_high, speed_low, speed_high."""

    kind: str
    value: float
    bound: float
    t: float | None = None


def integrate_const_accel(s: VehicleState, u: float, dt: float) -> VehicleState:
    """Advance a state by dt seconds under constant acceleration u (closed form, exact)."""
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    return VehicleState(p=s.p + s.v * dt + 0.5 * u * dt * dt, v=s.v + u * dt)


def check_limits(u: float, v: float, lim: Limits) -> list[Violation]:
    """Return the list of bound violations for a control/speed pair (empty when admissible)."""
    violations = []
    if u < lim.u_min:
        violations.append(Violation("control_low", u, lim.u_min))
    if u > lim.u_max:
        violations.append(Violation("control_high", u, lim.u_max))
    if v < lim.v_min:
        violations.append(Violation("speed_low", v, lim.v_min))
    if v > lim.v_max:
        violations.append(Violation("speed_high", v, lim.v_max))
    return violations
