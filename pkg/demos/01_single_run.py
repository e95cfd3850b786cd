"""A first run: one vehicle, one intersection, one verdict per tick.

Runs the nominal scenario once and walks through what the testbench
records each 100 ms tick: the planner's proposal and rationale, the
safety monitor's verdict, and the maneuver that was finally actuated.
"""

from avguard import run_scenario
from avguard.scenario import reference_specs

spec = next(s for s in reference_specs() if s.id == "nominal")
result = run_scenario(spec, seed=42)

print(f"scenario: {spec.id}   seed: 42   dt: {spec.sim_params.dt} s")
print(f"termination: {result.termination.value} "
      f"after {len(result.records)} ticks\n")

print(f"{'tick':>4} {'t (s)':>6} {'proposed':>20} {'verdict':>8} "
      f"{'sep (m)':>8} {'final':>20}")
for record in result.records[::5]:
    sep = record.min_predicted_separation
    sep_text = "inf" if sep == float("inf") else f"{sep:8.2f}"
    print(f"{record.tick:>4} {record.sim_time_s:>6.1f} "
          f"{record.proposed_maneuver:>20} {record.verdict_level:>8} "
          f"{sep_text:>8} {record.final_maneuver:>20}")

summary = result.summary
print(f"\nclearance time: {summary.clearance_time_s} s")
print(f"unsafe ticks: {summary.unsafe_tick_count}")
print(f"max |accel|: {summary.max_abs_accel:.2f} m/s^2, "
      f"max |jerk|: {summary.max_abs_jerk:.2f} m/s^3")
print(f"\nsample rationale: {result.records[0].rationale}")
