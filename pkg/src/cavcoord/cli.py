"""Command-line entry point: run corridor simulations or single-planner queries.

Exit codes: 0 success (no safety violations), 1 violations found, 2 infeasible
(scheduling or planner boundary), 3 configuration errors. Set CAVCOORD_LOG to a
logging level name for verbosity.
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import Limits
from .energy_optimal import DegenerateHorizon, TimedBoundary, solve_energy
from .scheduler import Schedule, SchedulingInfeasible
from .sim import CavTrack, OvercrowdedWindow, SimConfig, SimResult, TrajectoryLog, run
from .time_optimal import InfeasibleBoundary, ZoneBoundary, plan_min_time
from .topology import ScenarioError, default_scenario_path, load_scenario_file

__all__ = [
    "RunManifest",
    "main",
    "cmd_simulate",
    "cmd_plan",
    "write_schedules_csv",
    "write_trajectories_csv",
    "read_trajectories_csv",
]

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3

SCHEDULES_HEADER = "cav_id,zone,R,D,T,P,mode"
TRAJECTORIES_HEADER = "cav_id,t,p,v,u,zone,mode"

logger = logging.getLogger(__name__)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass
class RunManifest:
    """Reproducibility record written next to the exports."""

    version: str
    seed: int
    scenario_sha256: str
    duration_s: float
    config: dict
    counts: dict

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "scenario_sha256": self.scenario_sha256,
            "duration_s": self.duration_s,
            "config": self.config,
            "counts": self.counts,
        }


def write_schedules_csv(path, schedules: dict[int, Schedule]) -> None:
    lines = [SCHEDULES_HEADER]
    for cav_id in sorted(schedules):
        for e in schedules[cav_id].entries:
            lines.append(
                f"{cav_id},{e.zone_id},{_fmt(e.release)},{_fmt(e.deadline)},"
                f"{_fmt(e.entry_time)},{_fmt(e.process_time)},{e.mode.value}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_trajectories_csv(path, log: TrajectoryLog) -> None:
    lines = [TRAJECTORIES_HEADER]
    for cav_id in sorted(log.tracks):
        tr = log.tracks[cav_id]
        for i in range(tr.t.size):
            lines.append(
                f"{cav_id},{_fmt(tr.t[i])},{_fmt(tr.p[i])},{_fmt(tr.v[i])},"
                f"{_fmt(tr.u[i])},{tr.zone[i]},{tr.mode[i]}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trajectories_csv(path) -> TrajectoryLog:
    """Read a trajectories export back into a TrajectoryLog."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0] != TRAJECTORIES_HEADER:
        raise ValueError(f"{path}: not a trajectories export")
    per_cav: dict[int, list[tuple]] = {}
    for line in text[1:]:
        cav_s, t_s, p_s, v_s, u_s, zone_s, mode_s = line.split(",")
        per_cav.setdefault(int(cav_s), []).append(
            (float(t_s), float(p_s), float(v_s), float(u_s), int(zone_s), mode_s)
        )
    steps = []
    for rows in per_cav.values():
        ts = [r[0] for r in rows]
        steps.extend(b - a for a, b in zip(ts, ts[1:]))
    step = min(s for s in steps if s > 0) if steps else 1.0
    log = TrajectoryLog(step=step)
    for cav_id, rows in per_cav.items():
        t = np.array([r[0] for r in rows])
        log.tracks[cav_id] = CavTrack(
            cav_id=cav_id,
            k0=int(round(t[0] / step)),
            t=t,
            p=np.array([r[1] for r in rows]),
            v=np.array([r[2] for r in rows]),
            u=np.array([r[3] for r in rows]),
            zone=np.array([r[4] for r in rows], dtype=np.int64),
            mode=np.array([r[5] for r in rows], dtype="<U14"),
        )
    return log


def _config_echo(cfg: SimConfig) -> dict:
    return {
        "n_cavs": cfg.n_cavs,
        "window_s": cfg.window,
        "headway_s": cfg.headway,
        "sample_step_s": cfg.sample_step,
        "merging_speed_mps": cfg.topology.merging_speed,
        "entry_speed_mps": cfg.entry_speed,
        "exit_speed_mps": cfg.exit_speed,
        "deadline_cap": cfg.cap_deadlines,
        "limits": {
            "u_min": cfg.limits.u_min,
            "u_max": cfg.limits.u_max,
            "v_min": cfg.limits.v_min,
            "v_max": cfg.limits.v_max,
        },
    }


def export_run(out_dir, result: SimResult, scenario_sha256: str, duration_s: float) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_schedules_csv(out / "schedules.csv", result.schedules)
    write_trajectories_csv(out / "trajectories.csv", result.log)
    (out / "safety.json").write_text(
        json.dumps(result.report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    manifest = RunManifest(
        version=__version__,
        seed=result.config.seed,
        scenario_sha256=scenario_sha256,
        duration_s=duration_s,
        config=_config_echo(result.config),
        counts={
            "cavs": len(result.schedules),
            "zones": len(result.config.topology.zones),
            "violations": result.report.n_lateral + result.report.n_rear_end,
            "lateral_violations": result.report.n_lateral,
            "rear_end_violations": result.report.n_rear_end,
            "energy_constraint_reports": result.metrics["n_energy_constraint_reports"],
        },
    )
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _diagnostic(kind: str, **fields) -> None:
    print(json.dumps({"error": kind, **fields}, sort_keys=True), file=sys.stderr)


def _simulate_once(cfg: SimConfig, out_dir, scenario_sha256: str) -> int:
    t_start = time.perf_counter()
    try:
        result = run(cfg)
    except SchedulingInfeasible as exc:
        _diagnostic("scheduling_infeasible", cav_id=exc.cav_id, zone_id=exc.zone_id, reason=exc.reason)
        return EXIT_INFEASIBLE
    except OvercrowdedWindow as exc:
        _diagnostic("overcrowded_window", cav_id=exc.cav_id, reason=str(exc))
        return EXIT_INFEASIBLE
    duration = time.perf_counter() - t_start
    export_run(out_dir, result, scenario_sha256, duration)
    logger.info(
        "seed %d: %d cavs, %d violations, %d energy zones",
        cfg.seed,
        len(result.schedules),
        result.report.n_lateral + result.report.n_rear_end,
        result.metrics["mode_counts"]["energy_optimal"],
    )
    return EXIT_OK if result.report.ok else EXIT_VIOLATIONS


def cmd_simulate(args) -> int:
    scenario = args.scenario if args.scenario is not None else default_scenario_path()
    try:
        raw = Path(scenario).read_bytes()
        doc = load_scenario_file(scenario)
        cfg = SimConfig.from_document(doc, seed=args.seed, n_cavs=args.cavs, headway=args.headway)
    except (ScenarioError, OSError, ValueError) as exc:
        _diagnostic("config_error", reason=str(exc))
        return EXIT_CONFIG
    sha = hashlib.sha256(raw).hexdigest()

    if args.sweep is None:
        return _simulate_once(cfg, args.out, sha)

    seeds = [cfg.seed + i for i in range(args.sweep)]
    configs = []
    for s in seeds:
        c = SimConfig.from_document(doc, seed=s, n_cavs=args.cavs, headway=args.headway)
        configs.append(c)
    with ThreadPoolExecutor(max_workers=min(len(seeds), os.cpu_count() or 1)) as pool:
        codes = list(
            pool.map(lambda c: _simulate_once(c, Path(args.out) / f"seed_{c.seed}", sha), configs)
        )
    return max(codes)


def _plan_limits(args) -> Limits:
    return Limits(u_min=args.u_min, u_max=args.u_max, v_min=args.v_min, v_max=args.v_max)


def cmd_plan(args) -> int:
    try:
        lim = _plan_limits(args)
        boundary = ZoneBoundary(p_s=args.p_start, v_s=args.v_start, p_e=args.p_end, v_e=args.v_end)
    except ValueError as exc:
        _diagnostic("config_error", reason=str(exc))
        return EXIT_CONFIG

    if args.kind == "min_time":
        try:
            plan = plan_min_time(boundary, lim)
        except InfeasibleBoundary as exc:
            _diagnostic("infeasible_boundary", reason=str(exc))
            return EXIT_INFEASIBLE
        payload = {
            "kind": "min_time",
            "profile": plan.profile.value,
            "saturated": plan.saturated,
            "p_c": plan.p_c,
            "v_c": plan.v_c,
            "t_c": plan.t_c,
            "t_e": plan.t_e,
            "phases": [{"t0": ph.t0, "t1": ph.t1, "u": ph.u, "b": ph.b, "c": ph.c} for ph in plan.phases],
        }
    else:
        try:
            tb = TimedBoundary(boundary=boundary, t_entry=args.t_start, t_exit=args.t_end)
            coeffs = solve_energy(tb)
        except DegenerateHorizon as exc:
            _diagnostic("degenerate_horizon", reason=str(exc))
            return EXIT_INFEASIBLE
        payload = {"kind": "min_energy", "a": coeffs.a, "b": coeffs.b, "c": coeffs.c, "d": coeffs.d}

    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavcoord", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cavcoord {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the corridor simulation and export results")
    p_sim.add_argument("--scenario", type=Path, default=None, help="scenario YAML (default: bundled two-intersection layout)")
    p_sim.add_argument("--out", type=Path, required=True, help="output directory")
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.add_argument("--cavs", type=int, default=None, help="override the number of vehicles")
    p_sim.add_argument("--headway", type=float, default=None, help="override the safety headway [s]")
    p_sim.add_argument("--sweep", type=int, default=None, help="run K consecutive seeds into per-seed subdirectories")
    p_sim.set_defaults(func=cmd_simulate)

    p_plan = sub.add_parser("plan", help="solve a single zone traversal and print JSON")
    p_plan.add_argument("kind", choices=["min_time", "min_energy"])
    p_plan.add_argument("--p-start", type=float, required=True)
    p_plan.add_argument("--v-start", type=float, required=True)
    p_plan.add_argument("--p-end", type=float, required=True)
    p_plan.add_argument("--v-end", type=float, required=True)
    p_plan.add_argument("--t-start", type=float, default=0.0, help="entry time (min_energy)")
    p_plan.add_argument("--t-end", type=float, default=math.nan, help="exit time (min_energy)")
    p_plan.add_argument("--u-min", type=float, default=-3.0)
    p_plan.add_argument("--u-max", type=float, default=3.0)
    p_plan.add_argument("--v-min", type=float, default=1.0)
    p_plan.add_argument("--v-max", type=float, default=25.0)
    p_plan.set_defaults(func=cmd_plan)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("CAVCOORD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kind", None) == "min_energy" and math.isnan(args.t_end):
        _diagnostic("config_error", reason="min_energy requires --t-end")
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
