"""Deterministic tactical planners standing in for an opaque AI planner.

The gap-acceptance planner looks at every perceived object whose
predicted constant-velocity path crosses the ego route inside the
conflict zone and compares the time gap against a required gap scaled by
a caution factor. The over-cautious and aggressive variants are the same
law with caution multiplied up or down, reproducing hesitation/gridlock
and stress-case behavior respectively.

Planners see only what the perception pipeline exposes: they never read
provenance tags or ground truth. An optional external-planner adapter
speaks a line-delimited JSON protocol over a subprocess's standard
streams so a real model can fill the generator slot later.
"""

from __future__ import annotations

import json
import logging
import subprocess
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .sim import build_intersection, ego_route_for
from .state import (
    IntersectionGeometry,
    Maneuver,
    PerceivedState,
    RouteGoal,
    truncate_rationale,
)
from . import geometry

log = logging.getLogger(__name__)

STATIONARY_SPEED = 0.3        # m/s; below this an object is a static blocker
BLOCK_LOOKAHEAD = 25.0        # m of route ahead scanned for static blockers
BLOCK_LATERAL_MARGIN = 1.5    # m added to the blocker footprint
CROSSING_HORIZON = 30.0       # s of object motion searched for a crossing
ACCELERATE_BELOW_FRACTION = 0.5  # of the speed limit


class PlannerKind(str, Enum):
    GAP_ACCEPTANCE = "gap_acceptance"
    OVER_CAUTIOUS = "over_cautious"
    AGGRESSIVE = "aggressive"


_KIND_CAUTION = {
    PlannerKind.GAP_ACCEPTANCE: 1.0,
    PlannerKind.OVER_CAUTIOUS: 2.5,
    PlannerKind.AGGRESSIVE: 0.4,
}


@dataclass(frozen=True)
class PlannerConfig:
    kind: PlannerKind = PlannerKind.GAP_ACCEPTANCE
    caution: float = 1.0
    reaction_time: float = 0.5
    trust_perception: bool = True  # fixed true; the vulnerability under test

    def __post_init__(self) -> None:
        if self.caution <= 0:
            raise ValueError("caution must be > 0")

    @property
    def effective_caution(self) -> float:
        return self.caution * _KIND_CAUTION[self.kind]


def required_gap(ego_speed: float, crossing_distance: float,
                 cfg: PlannerConfig) -> float:
    """Seconds of clearance demanded before committing past a crossing."""
    if crossing_distance < 0:
        raise ValueError("crossing_distance must be >= 0")
    return (cfg.effective_caution * crossing_distance / max(ego_speed, 1.0)
            + cfg.reaction_time)


@dataclass(frozen=True)
class Conflict:
    object_id: int
    time_gap: float          # s until the object reaches the crossing point
    crossing_distance: float  # m of ego route to the crossing point


def find_conflicts(perceived: PerceivedState, route: geometry.Route,
                   ego_s: float, zone) -> tuple[list[Conflict], Optional[int]]:
    """Crossing conflicts ahead of the ego, plus any static blocker id."""
    conflicts: list[Conflict] = []
    blocker: Optional[int] = None
    route_pts = route.points
    for obj in perceived.objects:
        if obj.speed < STATIONARY_SPEED:
            s_obj = route.arc_length_of(obj.position, s_min=ego_s)
            if s_obj is None:
                continue
            ahead = s_obj - ego_s
            lateral = route.lateral_offset(obj.position)
            if 0.0 < ahead <= BLOCK_LOOKAHEAD and \
                    lateral <= float(np.max(obj.half_extent)) + BLOCK_LATERAL_MARGIN:
                if blocker is None:
                    blocker = obj.id
            continue
        path_end = obj.position + obj.velocity * CROSSING_HORIZON
        for i in range(len(route_pts) - 1):
            cross = geometry.segment_intersection(route_pts[i], route_pts[i + 1],
                                                  obj.position, path_end)
            if cross is None or not zone.contains(cross):
                continue
            s_cross = route.arc_length_of(cross, s_min=ego_s)
            if s_cross is None or s_cross <= ego_s:
                continue
            time_gap = float(np.hypot(*(cross - obj.position))) / obj.speed
            conflicts.append(Conflict(object_id=obj.id, time_gap=time_gap,
                                      crossing_distance=s_cross - ego_s))
            break
    return conflicts, blocker


def plan(perceived: PerceivedState, goal: RouteGoal, cfg: PlannerConfig,
         world_geometry: Optional[IntersectionGeometry] = None
         ) -> tuple[Maneuver, str]:
    """Gap-acceptance tactical decision from the perceived state alone."""
    world_geometry = world_geometry or build_intersection()
    zone = world_geometry.conflict_zone
    limit = world_geometry.speed_limit
    route = ego_route_for(goal)
    odom = perceived.ego_odometry
    ego_s = route.arc_length_of(odom.position)
    if ego_s is None:
        return Maneuver.WAIT, truncate_rationale("ego off route; waiting")

    conflicts, blocker = find_conflicts(perceived, route, ego_s, zone)
    if blocker is not None:
        return Maneuver.WAIT, truncate_rationale(
            f"path blocked by stationary object {blocker}")

    def go() -> tuple[Maneuver, str]:
        if odom.speed < ACCELERATE_BELOW_FRACTION * limit:
            return Maneuver.ACCELERATE, "no conflicts; below cruise speed"
        return Maneuver.PROCEED, "no conflicts"

    if not conflicts:
        maneuver, why = go()
        return maneuver, truncate_rationale(why)

    binding = min(conflicts, key=lambda c: (c.time_gap, c.object_id))
    req = required_gap(odom.speed, binding.crossing_distance, cfg)
    detail = (f"object {binding.object_id}: gap {binding.time_gap:.2f}s, "
              f"required {req:.2f}s at {binding.crossing_distance:.1f}m")
    if binding.time_gap < cfg.reaction_time:
        return Maneuver.WAIT, truncate_rationale(f"imminent conflict; {detail}")
    if binding.time_gap >= req:
        maneuver, why = go()
        return maneuver, truncate_rationale(f"{why}; accepted {detail}")
    if binding.time_gap >= 0.5 * req:
        return Maneuver.PROCEED_CAUTIOUSLY, truncate_rationale(f"tight {detail}")
    return Maneuver.YIELD, truncate_rationale(f"rejected {detail}")


# --- optional external planner binding -----------------------------------

_MANEUVER_ALIASES = {
    "wait": Maneuver.WAIT,
    "yield": Maneuver.YIELD,
    "proceed_cautiously": Maneuver.PROCEED_CAUTIOUSLY,
    "proceed cautiously": Maneuver.PROCEED_CAUTIOUSLY,
    "proceed": Maneuver.PROCEED,
    "go": Maneuver.PROCEED,
    "accelerate": Maneuver.ACCELERATE,
}


def map_maneuver_text(text: str) -> Optional[Maneuver]:
    return _MANEUVER_ALIASES.get(text.strip().lower())


def perceived_to_request(perceived: PerceivedState) -> dict:
    """Wire request for one tick. Provenance is deliberately not sent."""
    odom = perceived.ego_odometry
    return {
        "tick": perceived.clock.tick,
        "ego": {
            "position": [float(odom.position[0]), float(odom.position[1])],
            "velocity": [float(odom.velocity[0]), float(odom.velocity[1])],
            "heading": float(odom.heading),
        },
        "objects": [
            {
                "id": o.id,
                "kind": o.kind.value,
                "position": [float(o.position[0]), float(o.position[1])],
                "velocity": [float(o.velocity[0]), float(o.velocity[1])],
                "half_extent": [float(o.half_extent[0]), float(o.half_extent[1])],
            }
            for o in perceived.objects
        ],
        "goal": perceived.goal.value,
    }


class ExternalPlanner:
    """Line-delimited JSON request/response planner over a subprocess.

    One request line per tick, one response line with
    ``{"maneuver": ..., "rationale": ...}``. A response that times out is
    treated as Wait with a "planner timeout" rationale and counted as a
    planner fault; unmapped maneuver text also degrades to Wait.
    """

    def __init__(self, command: list[str], timeout: float = 2.0):
        self.command = command
        self.timeout = timeout
        self.fault_count = 0
        self._proc: Optional[subprocess.Popen] = None

    def _ensure_started(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        return self._proc

    def plan(self, perceived: PerceivedState, goal: RouteGoal) -> tuple[Maneuver, str]:
        proc = self._ensure_started()
        request = json.dumps(perceived_to_request(perceived))
        line: list[Optional[str]] = [None]

        def read_line() -> None:
            line[0] = proc.stdout.readline()

        try:
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self.fault_count += 1
            return Maneuver.WAIT, "planner unavailable"
        reader = threading.Thread(target=read_line, daemon=True)
        reader.start()
        reader.join(self.timeout)
        if reader.is_alive() or not line[0]:
            self.fault_count += 1
            log.warning("external planner timeout at tick %d", perceived.clock.tick)
            return Maneuver.WAIT, "planner timeout"
        try:
            response = json.loads(line[0])
            maneuver = map_maneuver_text(str(response.get("maneuver", "")))
            rationale = str(response.get("rationale", ""))
        except (json.JSONDecodeError, AttributeError):
            maneuver, rationale = None, "unparseable planner response"
        if maneuver is None:
            self.fault_count += 1
            log.warning("unmapped planner maneuver at tick %d", perceived.clock.tick)
            return Maneuver.WAIT, truncate_rationale(
                f"unmapped maneuver; {rationale}")
        return maneuver, truncate_rationale(rationale)

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=1.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None


__all__ = [
    "Conflict",
    "ExternalPlanner",
    "PlannerConfig",
    "PlannerKind",
    "find_conflicts",
    "map_maneuver_text",
    "perceived_to_request",
    "plan",
    "required_gap",
]
