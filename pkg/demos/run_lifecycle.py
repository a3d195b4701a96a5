"""
The full lifecycle, narrated from the trace
===========================================

Runs the bundled default scenario headless: the car requests permission at
the entrance, is granted, wall-follows past occupied slots, measures the one
free slot, parks vertically, reports its location (the owner gets a text),
and later receives the scripted leave request and drives to the exit.
"""

import json

import autopark
from autopark.sim import Simulation, lifecycle_codes

sim = Simulation(autopark.load_scenario("default"), auto_grant=True)
result = sim.run()

print(f"outcome: {result.outcome} after {result.ticks} ticks "
      f"({result.ticks * sim.dt:.1f} simulated seconds)")
print(f"owner notifications: {result.notifications}")
print("lifecycle:", " -> ".join(lifecycle_codes(sim.trace_records)))
print()

print("mode timeline:")
last = None
for line in sim.trace_records:
    rec = json.loads(line)
    if rec["mode"] != last:
        v = rec["vehicle"]
        print(f"  t={rec['tick'] * sim.dt:6.2f}s  {rec['mode']:<15s} "
              f"pose=({v['x']:.2f}, {v['y']:.2f})")
        last = rec["mode"]

print()
print("registry at the end:", json.dumps(result.registry["slots"]))
