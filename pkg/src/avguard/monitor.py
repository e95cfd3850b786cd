"""Predicted-trajectory safety monitoring and the recovery override.

The monitor predicts the ego under the proposed maneuver's acceleration
command (constant-acceleration along its heading, speed clamped at zero)
and every perceived object under constant velocity, then takes the
minimum disc-footprint separation over a sampled horizon. The recovery
planner overrides an unsafe proposal with an emergency brake.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .sim import SimParams, command_accel, crossing_traffic_within_envelope, \
    distance_to_entry
from .state import (
    IntersectionGeometry,
    Maneuver,
    PerceivedState,
    Verdict,
    VerdictLevel,
)

# Ego footprint radius for the disc approximation; matches the vehicle
# bounding box (max half extent).
EGO_RADIUS = 2.0


class PredictionModel(str, Enum):
    CONSTANT_VELOCITY = "constant_velocity"
    CONSTANT_ACCEL = "constant_accel"


@dataclass(frozen=True)
class SafetyParams:
    horizon: float = 3.0          # s
    sample_dt: float = 0.05       # s
    d_unsafe: float = 2.0         # m
    d_warn: float = 4.0           # m
    margin_speed_gain: float = 0.25  # s; widens d_unsafe with closing speed

    def __post_init__(self) -> None:
        if not (0.0 < self.d_unsafe < self.d_warn):
            raise ValueError("require 0 < d_unsafe < d_warn")


def sample_times(horizon: float, sample_dt: float) -> np.ndarray:
    """Samples at 0, sample_dt, ..., horizon inclusive."""
    times = np.arange(0.0, horizon + 0.5 * sample_dt, sample_dt)
    if times[-1] < horizon - 1e-12:
        times = np.append(times, horizon)
    return times


def displacement_along(speed: float, accel: float, times: np.ndarray) -> np.ndarray:
    """Scalar arc displacement under constant accel, clamped at zero speed."""
    s = speed * times + 0.5 * accel * times * times
    if accel < 0.0 and speed > 0.0:
        t_stop = speed / -accel
        s = np.where(times >= t_stop, speed * speed / (2.0 * -accel), s)
    elif accel < 0.0 and speed <= 0.0:
        s = np.zeros_like(times)
    elif accel > 0.0 and speed < 0.0:  # defensive; speeds are never negative here
        s = np.maximum(s, 0.0)
    return s


def predict_trajectory(position: np.ndarray, velocity: np.ndarray,
                       acceleration: np.ndarray, model: PredictionModel,
                       horizon: float, sample_dt: float) -> list[tuple[float, np.ndarray]]:
    """Sampled future positions under a point-mass motion model.

    Constant-accel motion is taken along the current velocity direction
    (or acceleration direction when starting from rest) and freezes once
    the speed reaches zero; nothing here reverses.
    """
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    acceleration = np.asarray(acceleration, dtype=float)
    times = sample_times(horizon, sample_dt)
    if model == PredictionModel.CONSTANT_VELOCITY:
        points = position[None, :] + times[:, None] * velocity[None, :]
    else:
        speed = float(np.hypot(*velocity))
        if speed > 0.0:
            u = velocity / speed
        elif float(np.hypot(*acceleration)) > 0.0:
            u = acceleration / float(np.hypot(*acceleration))
        else:
            u = np.array([1.0, 0.0])
        a_s = float(np.dot(acceleration, u))
        s = displacement_along(speed, a_s, times)
        points = position[None, :] + s[:, None] * u[None, :]
    return [(float(t), points[i]) for i, t in enumerate(times)]


def proposed_ego_accel(perceived: PerceivedState, proposed: Maneuver,
                       world_geometry: IntersectionGeometry,
                       sim_params: SimParams, ego_route=None) -> float:
    """The longitudinal command the proposal would actuate, from perception."""
    from .sim import ego_route_for  # local to avoid import noise at module load

    odom = perceived.ego_odometry
    route = ego_route if ego_route is not None else ego_route_for(perceived.goal)
    zone = world_geometry.conflict_zone
    s_ego = route.arc_length_of(odom.position)
    if s_ego is None:
        dist = zone.distance_to(odom.position)
    else:
        dist = distance_to_entry(route, s_ego, zone)
    near = crossing_traffic_within_envelope(
        [(o.position, o.velocity) for o in perceived.objects], zone)
    return command_accel(proposed, odom.speed, dist, near,
                         world_geometry.speed_limit, sim_params)


def safety_check(perceived: PerceivedState, proposed: Maneuver,
                 params: SafetyParams, world_geometry: IntersectionGeometry,
                 sim_params: Optional[SimParams] = None) -> Verdict:
    """Minimum predicted separation between ego and all perceived objects.

    Separation is center distance minus summed disc radii (max half
    extent per body). The unsafe threshold widens with the offending
    object's closing speed: d_unsafe + margin_speed_gain * closing.
    """
    sim_params = sim_params or SimParams()
    odom = perceived.ego_odometry
    if not perceived.objects:
        return Verdict(level=VerdictLevel.SAFE,
                       min_predicted_separation=np.inf, time_of_min=0.0)

    accel = proposed_ego_accel(perceived, proposed, world_geometry, sim_params)
    times = sample_times(params.horizon, params.sample_dt)
    u = np.array([np.cos(odom.heading), np.sin(odom.heading)])
    s = displacement_along(odom.speed, accel, times)
    ego_points = odom.position[None, :] + s[:, None] * u[None, :]

    best_sep, best_t, best_obj = np.inf, 0.0, None
    for obj in perceived.objects:
        obj_points = obj.position[None, :] + times[:, None] * obj.velocity[None, :]
        delta = ego_points - obj_points
        dist = np.hypot(delta[:, 0], delta[:, 1])
        sep = dist - (EGO_RADIUS + float(np.max(obj.half_extent)))
        i = int(np.argmin(sep))
        if sep[i] < best_sep:
            best_sep, best_t, best_obj = float(sep[i]), float(times[i]), obj.id

    offender = next(o for o in perceived.objects if o.id == best_obj)
    closing = closing_speed(odom.position, odom.velocity,
                            offender.position, offender.velocity)
    d_unsafe_eff = params.d_unsafe + params.margin_speed_gain * closing
    if best_sep < d_unsafe_eff:
        level = VerdictLevel.UNSAFE
    elif best_sep < max(params.d_warn, d_unsafe_eff):
        level = VerdictLevel.WARNING
    else:
        level = VerdictLevel.SAFE
    return Verdict(level=level, min_predicted_separation=best_sep,
                   time_of_min=best_t, offending_object=best_obj)


def closing_speed(ego_pos: np.ndarray, ego_vel: np.ndarray,
                  obj_pos: np.ndarray, obj_vel: np.ndarray) -> float:
    """Rate of approach along the line of sight at t=0; 0 if separating."""
    line = np.asarray(ego_pos, dtype=float) - np.asarray(obj_pos, dtype=float)
    norm = float(np.hypot(*line))
    if norm < 1e-9:
        return float(np.hypot(*(np.asarray(obj_vel) - np.asarray(ego_vel))))
    return max(0.0, float(np.dot(np.asarray(obj_vel) - np.asarray(ego_vel),
                                 line / norm)))


def recovery_decide(verdict: Verdict, proposed: Maneuver) -> Maneuver:
    """Emergency-brake override on an unsafe verdict; pass-through otherwise."""
    if verdict.level == VerdictLevel.UNSAFE:
        return Maneuver.EMERGENCY_BRAKE
    return proposed


__all__ = [
    "EGO_RADIUS",
    "PredictionModel",
    "SafetyParams",
    "closing_speed",
    "displacement_along",
    "predict_trajectory",
    "proposed_ego_accel",
    "recovery_decide",
    "safety_check",
    "sample_times",
]
