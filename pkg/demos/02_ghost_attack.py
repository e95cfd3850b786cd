"""Anatomy of a ghost-obstacle attack and the recovery response.

A ghost attack injects a phantom stationary vehicle into the ego's
perception once the ego comes within trigger range of the intersection.
Ground truth is never touched — only the perceived object list.

This demo runs the same seed three ways:

  1. nominal baseline (no attack),
  2. ghost attack with the recovery planner enabled,
  3. ghost attack with recovery disabled,

and shows when the fault window opens, how the safety monitor reacts,
and what the recovery override buys.
"""

from avguard import run_scenario
from avguard.orchestrator import RunOptions
from avguard.scenario import reference_specs
from avguard.sim import GHOST_ID_BASE

SEED = 7

specs = {s.id: s for s in reference_specs()}
nominal = run_scenario(specs["nominal"], seed=SEED)
attacked = run_scenario(specs["ghost_attack"], seed=SEED)
no_recovery = run_scenario(specs["ghost_attack"], seed=SEED,
                           options=RunOptions(recovery_enabled=False))

print("=== attack window ===")
fault_ticks = [r.tick for r in attacked.records if r.active_fault]
print(f"fault kind:   {attacked.records[fault_ticks[0]].active_fault}")
print(f"fault window: ticks {fault_ticks[0]}..{fault_ticks[-1]} "
      f"({len(fault_ticks)} ticks)")
culprits = {r.offending_object for r in attacked.records
            if r.offending_object is not None
            and r.offending_object >= GHOST_ID_BASE}
print(f"phantom object ids blamed by the monitor: {sorted(culprits)}\n")

print("=== monitor reaction (recovery enabled) ===")
print(f"{'tick':>4} {'fault':>6} {'verdict':>8} {'sep (m)':>8} "
      f"{'final maneuver':>16} {'speed (m/s)':>12}")
window = range(max(fault_ticks[0] - 3, 0), fault_ticks[0] + 15)
for record in (attacked.records[t] for t in window
               if t < len(attacked.records)):
    sep = record.min_predicted_separation
    sep_text = "inf" if sep == float("inf") else f"{sep:8.2f}"
    speed = abs(record.ego_velocity[1])
    print(f"{record.tick:>4} {'yes' if record.active_fault else '-':>6} "
          f"{record.verdict_level:>8} {sep_text:>8} "
          f"{record.final_maneuver:>16} {speed:>12.2f}")

def describe(label, result):
    s = result.summary
    print(f"{label:<28} termination={result.termination.value:<10} "
          f"unsafe_ticks={s.unsafe_tick_count:<3} "
          f"collision={s.collision} "
          f"clearance={s.clearance_time_s}")

print("\n=== three runs, same seed ===")
describe("nominal baseline", nominal)
describe("ghost + recovery", attacked)
describe("ghost, recovery disabled", no_recovery)

recov = attacked.summary
print(f"\nrecovery episodes: {recov.recovery_activations} "
      f"({recov.recovery_successes} ended without a collision)")
print("ground truth is unaffected: the phantom never collides with "
      "anything, it only costs time and braking.")
