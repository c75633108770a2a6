"""Zone partition of the two-intersection corridor, fixed vehicle paths, and conflict tuples.

A scenario document (YAML) declares the zones (regular or merging), the paths as
ordered zone-id sequences, and the fixed merging-zone speed. Values are immutable
after loading and safe to share between threads.
"""

import enum
from dataclasses import dataclass
from importlib import resources
from typing import Any, Mapping

import yaml

__all__ = [
    "ZoneKind",
    "Zone",
    "Path",
    "Topology",
    "ConflictTuple",
    "ScenarioError",
    "conflict_zones",
    "load_topology",
    "load_scenario_file",
    "default_scenario_path",
]

MAX_PATH_ZONES = 16

ConflictTuple = tuple[int, ...]


class ScenarioError(ValueError):
    """Raised for malformed scenario documents; the message carries the offending field path."""


class ZoneKind(str, enum.Enum):
    REGULAR = "regular"
    MERGING = "merging"


@dataclass(frozen=True)
class Zone:
    """A directed road segment. Merging zones are where lateral collisions are possible."""

    id: int
    kind: ZoneKind
    length: float

    def __post_init__(self):
        if self.length <= 0.0:
            raise ScenarioError(f"zone {self.id}: length must be > 0, got {self.length}")


@dataclass(frozen=True)
class Path:
    """An ordered tuple of zone ids a vehicle will cross, with its total arclength."""

    id: int
    zone_sequence: tuple[int, ...]
    total_length: float


@dataclass(frozen=True)
class Topology:
    """Validated zone/path layout plus the fixed merging-zone speed v_z [m/s]."""

    zones: Mapping[int, Zone]
    paths: Mapping[int, Path]
    merging_speed: float

    def zone(self, zone_id: int) -> Zone:
        return self.zones[zone_id]

    def path(self, path_id: int) -> Path:
        return self.paths[path_id]

    def merging_zone_ids(self) -> tuple[int, ...]:
        return tuple(z.id for z in self.zones.values() if z.kind is ZoneKind.MERGING)

    def zone_starts(self, path_id: int) -> dict[int, float]:
        """Arclength of each zone's entry point along a path, measured from path start."""
        starts = {}
        cum = 0.0
        for zid in self.paths[path_id].zone_sequence:
            starts[zid] = cum
            cum += self.zones[zid].length
        return starts


def conflict_zones(path_i: Path, path_j: Path) -> ConflictTuple:
    """Zones present in both paths, ordered as path_i traverses them."""
    other = set(path_j.zone_sequence)
    return tuple(m for m in path_i.zone_sequence if m in other)


def _require(mapping: Any, key: str, where: str) -> Any:
    if not isinstance(mapping, Mapping):
        raise ScenarioError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ScenarioError(f"{where}.{key}: missing required field")
    return mapping[key]


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    return float(value)


def load_topology(doc: Mapping) -> Topology:
    """Build a validated Topology from a parsed scenario document.

    The document needs `zones` (id, kind, length_m), `paths` (id, zones) and
    `merging_speed_mps`. Every error message names the offending field.
    """
    if not isinstance(doc, Mapping):
        raise ScenarioError(f"scenario: expected a mapping at top level, got {type(doc).__name__}")

    v_z = _as_number(_require(doc, "merging_speed_mps", "scenario"), "scenario.merging_speed_mps")
    if v_z <= 0.0:
        raise ScenarioError(f"scenario.merging_speed_mps: must be > 0, got {v_z}")

    zones: dict[int, Zone] = {}
    raw_zones = _require(doc, "zones", "scenario")
    if not isinstance(raw_zones, list) or not raw_zones:
        raise ScenarioError("scenario.zones: expected a non-empty list")
    for idx, rz in enumerate(raw_zones):
        where = f"zones[{idx}]"
        zid = _require(rz, "id", where)
        if not isinstance(zid, int) or isinstance(zid, bool):
            raise ScenarioError(f"{where}.id: expected an integer, got {zid!r}")
        if zid in zones:
            raise ScenarioError(f"{where}.id: duplicate zone id {zid}")
        kind_s = _require(rz, "kind", where)
        try:
            kind = ZoneKind(kind_s)
        except ValueError:
            raise ScenarioError(f"{where}.kind: expected 'regular' or 'merging', got {kind_s!r}") from None
        length = _as_number(_require(rz, "length_m", where), f"{where}.length_m")
        if length <= 0.0:
            raise ScenarioError(f"{where}.length_m: must be > 0, got {length}")
        zones[zid] = Zone(id=zid, kind=kind, length=length)

    paths: dict[int, Path] = {}
    raw_paths = _require(doc, "paths", "scenario")
    if not isinstance(raw_paths, list) or not raw_paths:
        raise ScenarioError("scenario.paths: expected a non-empty list")
    for idx, rp in enumerate(raw_paths):
        where = f"paths[{idx}]"
        pid = _require(rp, "id", where)
        if not isinstance(pid, int) or isinstance(pid, bool):
            raise ScenarioError(f"{where}.id: expected an integer, got {pid!r}")
        if pid in paths:
            raise ScenarioError(f"{where}.id: duplicate path id {pid}")
        seq = _require(rp, "zones", where)
        if not isinstance(seq, list) or not seq:
            raise ScenarioError(f"{where}.zones: expected a non-empty list of zone ids")
        if len(seq) > MAX_PATH_ZONES:
            raise ScenarioError(f"{where}.zones: at most {MAX_PATH_ZONES} zones per path, got {len(seq)}")
        if len(set(seq)) != len(seq):
            raise ScenarioError(f"{where}.zones: repeated zone id in {seq}")
        for j, zid in enumerate(seq):
            if zid not in zones:
                raise ScenarioError(f"{where}.zones[{j}]: unknown zone id {zid}")
        total = sum(zones[zid].length for zid in seq)
        paths[pid] = Path(id=pid, zone_sequence=tuple(seq), total_length=total)

    return Topology(zones=zones, paths=paths, merging_speed=v_z)


def load_scenario_file(path) -> dict:
    """Parse a YAML scenario file; parse errors carry line/column context."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise ScenarioError(f"{path}: expected a mapping at top level")
    return dict(doc)


def default_scenario_path():
    """Filesystem path of the bundled two-intersection scenario."""
    return resources.files("cavcoord").joinpath("data/two_intersections.yaml")
