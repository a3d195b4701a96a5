"""
Top-down view of the two parking maneuvers
==========================================

Runs the bundled parallel and vertical scenarios headless and draws the lot,
the parked neighbours, and the car's trajectory from the entrance to its
final pose inside the target slot.
"""

import pathlib
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Polygon as MplPolygon, Rectangle

import autopark
from autopark.sim import Simulation
from autopark.vehicle import VehicleState, footprint

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def draw_lot(ax, sim):
    w, h = sim.lot.size
    ax.add_patch(Rectangle((0, 0), w, h, fill=False, lw=2))
    for seg in sim.lot.walls[4:]:
        ax.plot([seg.ax, seg.bx], [seg.ay, seg.by], "k-", lw=2)
    for slot in sim.lot.slots:
        r = slot.rect
        ax.add_patch(
            Rectangle((r.x_min, r.y_min), r.width, r.height,
                      fill=False, ls=":", ec="gray")
        )
        ax.text(*r.center, str(slot.slot_id), ha="center", va="center",
                fontsize=7, color="gray")
        if slot.occupied:
            car = slot.parked_car_rect(sim.params)
            ax.add_patch(MplPolygon(car.corners(), closed=True,
                                    fc="lightsteelblue", ec="steelblue"))


def run_and_plot(name, ax):
    sim = Simulation(autopark.load_scenario(name), auto_grant=True)
    result = sim.run()
    draw_lot(ax, sim)
    xs, ys = [], []
    for line in sim.trace_records:
        v = json.loads(line)["vehicle"]
        xs.append(v["x"])
        ys.append(v["y"])
    ax.plot(xs, ys, "-", color="tab:orange", lw=1)
    body = footprint(sim.vehicle, sim.params)
    ax.add_patch(MplPolygon(body.corners(), closed=True,
                            fc="navajowhite", ec="tab:orange", lw=1.5))
    ax.set_aspect("equal")
    ax.set_title(f"{name}: {result.outcome} in {result.ticks * 0.02:.0f}s")
    ax.set_xlim(-0.05, sim.lot.size[0] + 0.05)
    ax.set_ylim(-0.05, sim.lot.size[1] * 0.45)


fig, axes = plt.subplots(2, 1, figsize=(9, 6.5))
run_and_plot("parallel", axes[0])
run_and_plot("vertical", axes[1])
fig.tight_layout()
fig.savefig(OUT / "parking_runs.png", dpi=130)
print(f"wrote {OUT}/parking_runs.png")
