"""Performance oracle: clearance, acceleration and jerk thresholds."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PerfThresholds:
    max_clearance: float = 30.0    # s; still uncleared past this is gridlock
    max_abs_accel: float = 3.0     # m/s^2, recovery braking exempt
    max_abs_jerk: float = 5.0      # m/s^3, recovery braking exempt

    def __post_init__(self) -> None:
        if min(self.max_clearance, self.max_abs_accel, self.max_abs_jerk) <= 0:
            raise ValueError("thresholds must be > 0")


@dataclass(frozen=True)
class PerfFlags:
    accel_violation: bool = False
    jerk_violation: bool = False
    clearance_exceeded: bool = False
    exempt: bool = False  # violation happened during active recovery


def performance_check(run_history: list, sim_time: float, ego_cleared: bool,
                      dt: float, thresholds: PerfThresholds) -> PerfFlags:
    """Flags for the most recently executed motion.

    The oracle runs before this tick's decision, so acceleration comes
    from the last finalized record and jerk from the last two (commanded
    accel is piecewise constant; jerk is its first difference over dt).
    """
    accel_violation = jerk_violation = exempt = False
    if run_history:
        last = run_history[-1]
        accel_violation = abs(last.ego_accel_mps2) > thresholds.max_abs_accel
        if len(run_history) >= 2:
            jerk = abs(last.ego_accel_mps2 - run_history[-2].ego_accel_mps2) / dt
            jerk_violation = jerk > thresholds.max_abs_jerk
        exempt = (accel_violation or jerk_violation) and last.recovery_active
    clearance_exceeded = sim_time > thresholds.max_clearance and not ego_cleared
    return PerfFlags(accel_violation=accel_violation,
                     jerk_violation=jerk_violation,
                     clearance_exceeded=clearance_exceeded,
                     exempt=exempt)


__all__ = ["PerfFlags", "PerfThresholds", "performance_check"]
