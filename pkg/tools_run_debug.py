"""Dev helper: run a scenario and print trajectory summaries per mode/phase."""
import json
import math
import sys

import autopark
from autopark.sim import Simulation, lifecycle_codes
from autopark.vehicle import footprint
from autopark.geometry import polygon_in_rect


def run(name, stride=25, auto_grant=True, seed=None, quiet=False):
    s = autopark.load_scenario(name)
    sim = Simulation(s, auto_grant=auto_grant, seed=seed)
    prev = None
    while not sim.done() and sim.tick < s.max_ticks:
        rec = sim.tick_once()
        m = rec["mode"]
        ph = "-"
        if sim.brain.maneuver is not None:
            ph = f"p{sim.brain.maneuver.phase}"
        elif m == "leaving":
            ph = f"l{sim.brain.leave_phase}"
        key = (m, ph)
        v = rec["vehicle"]
        line = (f"tick {rec['tick']:5d} {m:>13s}/{ph:3s} x={v['x']:.3f} y={v['y']:.3f} "
                f"th={math.degrees(v['heading']):7.2f} steer={math.degrees(v['steer']):6.1f} "
                f"spd={v['speed']:5.2f}")
        if key != prev:
            if not quiet:
                print(line)
            prev = key
        elif rec["tick"] % stride == 0 and not quiet:
            print(line)
    print("outcome:", sim.outcome, "ticks:", sim.tick)
    print("codes:", lifecycle_codes(sim.trace_records))
    # final pose vs target slot
    body = footprint(sim.vehicle, sim.params)
    for slot in sim.lot.slots:
        if slot.rect.contains_point((body.cx, body.cy)):
            inside = polygon_in_rect(body.corners(), slot.rect)
            print(f"final slot {slot.slot_id}: fully_inside={inside} "
                  f"heading={math.degrees(sim.vehicle.heading):.2f}deg "
                  f"center=({body.cx:.3f},{body.cy:.3f}) rect={slot.rect}")
    return sim


if __name__ == "__main__":
    run(sys.argv[1] if len(sys.argv) > 1 else "vertical",
        quiet="--quiet" in sys.argv)
