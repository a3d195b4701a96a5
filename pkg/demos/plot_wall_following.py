"""
Wall-following convergence
==========================

The posture controller reads the two right-side range sensors and steers the
front wheels so the car tracks the lane wall at a fixed gap.  Here the car
starts from a fan of lateral offsets and heading errors in an empty lot; every
start converges into a one-centimetre band around the set point.
"""

import json
import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import autopark
from autopark.scenario import Scenario
from autopark.sim import Simulation

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

base = autopark.load_scenario("default").manifest()
base["lot"]["slots"] = []
base["lot"]["extra_walls"] = []
base["events"] = []

target_y = base["controllers"]["posture"]["target_gap"] + base["vehicle"]["body_width"] / 2

fig, ax = plt.subplots(figsize=(9, 3.2))
starts = [(0.34, -10.0), (0.34, 0.0), (0.29, 10.0), (0.20, -5.0), (0.16, 0.0)]
for y0, heading_deg in starts:
    raw = json.loads(json.dumps(base))
    raw["lot"]["entrance"] = [0.25, y0, math.radians(heading_deg)]
    sim = Simulation(Scenario(raw), auto_grant=True)
    xs, ys = [], []
    for _ in range(int(25.0 / 0.02)):
        rec = sim.tick_once()
        v = rec["vehicle"]
        xs.append(v["x"])
        ys.append(v["y"])
    ax.plot(xs, ys, lw=1, label=f"y0={y0:.2f} m, {heading_deg:+.0f} deg")

ax.axhline(target_y, color="k", ls="--", lw=0.8, label="set point")
ax.axhspan(target_y - 0.01, target_y + 0.01, color="k", alpha=0.08)
ax.set_xlabel("x [m]")
ax.set_ylabel("y [m]")
ax.set_title("Wall following from assorted initial conditions")
ax.legend(fontsize=7, ncol=2)
fig.tight_layout()
fig.savefig(OUT / "wall_following.png", dpi=130)
print(f"wrote {OUT}/wall_following.png")
