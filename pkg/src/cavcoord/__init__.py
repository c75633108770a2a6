"""Coordination of connected automated vehicles through two interconnected intersections.

The library combines three pieces: closed-form minimum-time zone traversal
(accelerate-then-decelerate with an optional speed-limited cruise), sequential
decentralized scheduling of zone-entry times under safety headways, and a
minimum-energy cubic fallback for zones where the time-optimal entry is blocked.
A deterministic simulator ties them together over a configurable corridor.
"""

__version__ = "0.1.0"

from .dynamics import Limits, VehicleState, Violation, check_limits, integrate_const_accel
from .energy_optimal import (
    CubicCoeffs,
    DegenerateHorizon,
    TimedBoundary,
    check_inactive_constraints,
    eval_energy,
    replan_from,
    solve_energy,
)
from .scheduler import (
    ArrivalQueue,
    CommitError,
    ConflictContext,
    DroneMemory,
    Mode,
    QueueEntry,
    Schedule,
    ScheduleEntry,
    SchedulingInfeasible,
    commit,
    earliest_feasible_entry,
    schedule_path,
)
from .sim import (
    Arrival,
    SafetyReport,
    SimConfig,
    SimResult,
    TrajectoryLog,
    run,
    sample_arrivals,
    verify_safety,
)
from .time_optimal import (
    BangBangPlan,
    InfeasibleBoundary,
    NoSwitchingPoint,
    Profile,
    ZoneBoundary,
    eval_trajectory,
    feedback_control,
    final_speed_bounds,
    plan_min_time,
    process_time,
    switching_state,
)
from .topology import (
    ConflictTuple,
    Path,
    ScenarioError,
    Topology,
    Zone,
    ZoneKind,
    conflict_zones,
    default_scenario_path,
    load_scenario_file,
    load_topology,
)
