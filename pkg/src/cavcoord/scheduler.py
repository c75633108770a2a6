"""Decentralized sequential scheduling of zone-entry times under safety headways.

Each arriving vehicle plans against the already-committed schedules of
lower-order vehicles only: it chains release times through its path
(R[m+1] = T[m] + P[m]), takes the earliest entry slot that keeps a headway h
from every committed entry time at the zone, and marks a zone time-optimal
exactly when no waiting was needed at the next zone (otherwise the zone is
driven with the minimum-energy fallback over the stretched horizon). Committing
a schedule never changes earlier ones.
"""

import bisect
import enum
import math
from dataclasses import dataclass, field

from .dynamics import Limits
from .time_optimal import InfeasibleBoundary, ZoneBoundary, process_time
from .topology import Topology, ZoneKind

__all__ = [
    "Mode",
    "QueueEntry",
    "ArrivalQueue",
    "ScheduleEntry",
    "Schedule",
    "ConflictContext",
    "DroneMemory",
    "SchedulingInfeasible",
    "CommitError",
    "earliest_feasible_entry",
    "schedule_path",
    "commit",
]


# Slack absorbed when comparing entry-time gaps against the headway: exact-h
# gaps pick up a few ulps of rounding when chained through fixed-duration
# merging zones, and 1e-9 s is physically nil against headways of order 1 s.
HEADWAY_TOL = 1e-9


class Mode(str, enum.Enum):
    TIME_OPTIMAL = "time_optimal"
    ENERGY_OPTIMAL = "energy_optimal"


class SchedulingInfeasible(Exception):
    """No admissible entry time at some zone (deadline passed or a rigid merging link)."""

    def __init__(self, cav_id: int, zone_id: int, reason: str):
        self.cav_id = cav_id
        self.zone_id = zone_id
        self.reason = reason
        super().__init__(f"cav {cav_id}, zone {zone_id}: {reason}")


class CommitError(ValueError):
    """Schedule rejected at commit; the coordinator memory is left unchanged."""


@dataclass(frozen=True)
class QueueEntry:
    """A vehicle's slot in the control-zone queue (order is 1-based)."""

    cav_id: int
    arrival_time: float
    path_id: int
    order: int


class ArrivalQueue:
    """Queue ordering: earlier arrival first, ties by shorter path, then lower id."""

    def __init__(self, topology: Topology):
        self._topology = topology
        self._keys: list[tuple[float, float, int]] = []
        self._items: list[tuple[int, float, int]] = []

    def enqueue(self, cav_id: int, t0: float, path_id: int) -> QueueEntry:
        if t0 < 0.0:
            raise ValueError(f"arrival time must be non-negative, got {t0}")
        if path_id not in self._topology.paths:
            raise ValueError(f"unknown path id {path_id}")
        if any(item[0] == cav_id for item in self._items):
            raise ValueError(f"duplicate cav id {cav_id}")
        key = (t0, self._topology.path(path_id).total_length, cav_id)
        pos = bisect.bisect_left(self._keys, key)
        self._keys.insert(pos, key)
        self._items.insert(pos, (cav_id, t0, path_id))
        return QueueEntry(cav_id=cav_id, arrival_time=t0, path_id=path_id, order=pos + 1)

    @property
    def entries(self) -> tuple[QueueEntry, ...]:
        return tuple(
            QueueEntry(cav_id=c, arrival_time=t, path_id=p, order=i + 1)
            for i, (c, t, p) in enumerate(self._items)
        )

    def __len__(self) -> int:
        return len(self._items)


@dataclass(frozen=True)
class ScheduleEntry:
    """One zone of a committed schedule.

    entry_time is the scheduled zone entry T, release/deadline its admissible
    window, process_time the minimum traversal duration, and exit_time the
    actual planned traversal end (equal to the next zone's entry time).
    """

    zone_id: int
    release: float
    deadline: float
    entry_time: float
    process_time: float
    exit_time: float
    mode: Mode
    v_in: float
    v_out: float


@dataclass(frozen=True)
class Schedule:
    cav_id: int
    path_id: int
    arrival_time: float
    entries: tuple[ScheduleEntry, ...]

    @property
    def exit_time(self) -> float:
        return self.entries[-1].exit_time

    def entry_times(self) -> dict[int, float]:
        return {e.zone_id: e.entry_time for e in self.entries}


@dataclass
class DroneMemory:
    """The coordinator's store: committed schedules and per-zone sorted entry times."""

    headway: float
    schedules: dict[int, Schedule] = field(default_factory=dict)
    occupancy: dict[int, list[tuple[float, int]]] = field(default_factory=dict)

    def committed_times(self, zone_id: int) -> tuple[float, ...]:
        return tuple(t for t, _ in self.occupancy.get(zone_id, ()))

    def paths(self) -> dict[int, int]:
        return {cav_id: s.path_id for cav_id, s in self.schedules.items()}


@dataclass(frozen=True)
class ConflictContext:
    """Committed entry times, per zone of the arriving vehicle's path.

    Built from a memory snapshot, so it only ever contains lower-order
    vehicles; later commits cannot affect it.
    """

    occupied: dict[int, tuple[float, ...]]

    @classmethod
    def from_memory(cls, path_zone_sequence: tuple[int, ...], memory: DroneMemory) -> "ConflictContext":
        return cls(occupied={zid: memory.committed_times(zid) for zid in path_zone_sequence})

    def times(self, zone_id: int) -> tuple[float, ...]:
        return self.occupied.get(zone_id, ())


def earliest_feasible_entry(
    release: float, deadline: float, occupied, headway: float
) -> float:
    """Smallest T >= release with |T - T_j| >= headway for all committed T_j, and T <= deadline.

    Scans the blocked intervals around the committed times in ascending order;
    for a single free job against fixed jobs this is exactly the optimum of the
    disjunctive program. Gaps within HEADWAY_TOL of the headway count as
    feasible. Raises ValueError when the deadline cuts every slot.
    """
    t = release
    for t_j in sorted(occupied):
        if t_j - headway + HEADWAY_TOL < t < t_j + headway - HEADWAY_TOL:
            t = t_j + headway
    if t > deadline:
        raise ValueError(f"no feasible entry time <= deadline {deadline} (earliest is {t})")
    return t


def schedule_path(
    cav: QueueEntry,
    ctx: ConflictContext,
    topo: Topology,
    lim: Limits,
    headway: float,
    entry_speed: float | None = None,
    exit_speed: float | None = None,
    cap_deadlines: bool = False,
) -> Schedule:
    """Compute the full zone-entry schedule for one arriving vehicle.

    The first zone is entered at the arrival time itself (arrival headways are
    validated by the caller). Interior zone-boundary speeds are the merging
    speed v_z; the control-zone entry/exit speeds default to v_z as well.
    Raises SchedulingInfeasible when a deadline cuts every slot, when a zone
    traversal is infeasible, or when a delay would land on a merging zone
    (which cannot stretch its fixed-speed traversal).

    Args:
        cav: queue entry of the arriving vehicle.
        ctx: committed entry times of lower-order vehicles along the path.
        topo: zone/path layout, provides v_z.
        lim: acceleration and speed bounds.
        headway: minimum separation h between entry times at a shared zone.
        entry_speed: speed at the control-zone entry (default v_z).
        exit_speed: speed at the control-zone exit (default v_z).
        cap_deadlines: bound each next-zone deadline by T + length/v_min.
    """
    path = topo.path(cav.path_id)
    seq = path.zone_sequence
    v_z = topo.merging_speed
    v_entry = v_z if entry_speed is None else entry_speed
    v_exit = v_z if exit_speed is None else exit_speed

    entries: list[ScheduleEntry] = []
    p_start = 0.0
    release = cav.arrival_time
    deadline = math.inf
    t_cur = cav.arrival_time

    for k, zid in enumerate(seq):
        zone = topo.zone(zid)
        last = k == len(seq) - 1
        v_in = v_entry if k == 0 else v_z
        v_out = v_exit if last else v_z
        if zone.kind is ZoneKind.MERGING and (v_in != v_z or v_out != v_z):
            raise SchedulingInfeasible(cav.cav_id, zid, f"merging zone boundary speeds must equal v_z={v_z}")

        boundary = ZoneBoundary(p_s=p_start, v_s=v_in, p_e=p_start + zone.length, v_e=v_out)
        try:
            p_time = process_time(zone, boundary, lim, v_z)
        except InfeasibleBoundary as exc:
            raise SchedulingInfeasible(cav.cav_id, zid, str(exc)) from exc

        if last:
            mode = Mode.TIME_OPTIMAL
            exit_time = t_cur + p_time
            next_release = next_deadline = None
        else:
            next_release = t_cur + p_time
            next_deadline = t_cur + zone.length / lim.v_min if cap_deadlines else math.inf
            try:
                t_next = earliest_feasible_entry(next_release, next_deadline, ctx.times(seq[k + 1]), headway)
            except ValueError as exc:
                raise SchedulingInfeasible(cav.cav_id, seq[k + 1], str(exc)) from exc
            mode = Mode.TIME_OPTIMAL if t_next == next_release else Mode.ENERGY_OPTIMAL
            if mode is Mode.ENERGY_OPTIMAL and zone.kind is ZoneKind.MERGING:
                raise SchedulingInfeasible(
                    cav.cav_id, zid, "delay at the next zone cannot be absorbed inside a fixed-speed merging zone"
                )
            exit_time = t_next

        entries.append(
            ScheduleEntry(
                zone_id=zid,
                release=release,
                deadline=deadline,
                entry_time=t_cur,
                process_time=p_time,
                exit_time=exit_time,
                mode=mode,
                v_in=v_in,
                v_out=v_out,
            )
        )
        if not last:
            release, deadline, t_cur = next_release, next_deadline, exit_time
        p_start += zone.length

    return Schedule(cav_id=cav.cav_id, path_id=cav.path_id, arrival_time=cav.arrival_time, entries=tuple(entries))


def commit(schedule: Schedule, memory: DroneMemory) -> DroneMemory:
    """Validate a schedule against the memory and record it atomically.

    All checks run before any mutation, so a rejected schedule leaves the
    memory unchanged.
    """
    if schedule.cav_id in memory.schedules:
        raise CommitError(f"cav {schedule.cav_id} already committed")

    h = memory.headway
    prev_exit = None
    for e in schedule.entries:
        if not (e.release <= e.entry_time <= e.deadline):
            raise CommitError(
                f"cav {schedule.cav_id}, zone {e.zone_id}: entry {e.entry_time} outside [{e.release}, {e.deadline}]"
            )
        if prev_exit is not None and e.entry_time != prev_exit:
            raise CommitError(f"cav {schedule.cav_id}, zone {e.zone_id}: entry {e.entry_time} != previous exit {prev_exit}")
        prev_exit = e.exit_time
        for t_j, other in memory.occupancy.get(e.zone_id, ()):
            if abs(e.entry_time - t_j) < h - HEADWAY_TOL:
                raise CommitError(
                    f"cav {schedule.cav_id}, zone {e.zone_id}: headway {abs(e.entry_time - t_j):.6f} < {h} vs cav {other}"
                )

    for e in schedule.entries:
        bisect.insort(memory.occupancy.setdefault(e.zone_id, []), (e.entry_time, schedule.cav_id))
    memory.schedules[schedule.cav_id] = schedule
    return memory
