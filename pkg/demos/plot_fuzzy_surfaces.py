"""
Membership functions and control surfaces
=========================================

The three onboard controllers are all two-input fuzzy controllers built from
the same machinery: triangular memberships with shoulder end terms, a rule
table, and singleton outputs.  This script draws the membership families and
the full control surface for the wall-following and turn controllers, plus
the decision regions of the slot classifier.

Figures land in demos/out/.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import autopark
from autopark.fuzzy import evaluate, fuzzify

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

scenario = autopark.load_scenario("default")

# ---------------------------------------------------------------- memberships
posture = scenario.build_posture().controller
fig, axes = plt.subplots(1, 2, figsize=(10, 3), sharey=True)
for ax, family, title in (
    (axes[0], posture.input_a, "wall gap error [m]"),
    (axes[1], posture.input_b, "front/back skew [m]"),
):
    xs = np.linspace(*family.universe, 500)
    for label in family.labels:
        ax.plot(xs, [fuzzify(float(x), family)[label] for x in xs], label=label)
    ax.set_xlabel(title)
    ax.legend(fontsize=7)
axes[0].set_ylabel("membership")
fig.suptitle("Posture controller input families")
fig.tight_layout()
fig.savefig(OUT / "memberships.png", dpi=120)

# ------------------------------------------------------------ control surfaces
def surface(ctrl, n=61):
    a = np.linspace(*ctrl.input_a.universe, n)
    b = np.linspace(*ctrl.input_b.universe, n)
    A, B = np.meshgrid(a, b)
    Z = np.vectorize(lambda x, y: evaluate(ctrl, x, y))(A, B)
    return A, B, Z


fig = plt.figure(figsize=(11, 4))
for i, (build, name, xl, yl) in enumerate(
    (
        (scenario.build_posture().controller, "wall following", "gap error [m]", "skew [m]"),
        (scenario.build_turn().controller, "turn tracking", "angle error [rad]", "error rate [rad/s]"),
    )
):
    ax = fig.add_subplot(1, 2, i + 1, projection="3d")
    A, B, Z = surface(build)
    ax.plot_surface(A, B, np.degrees(Z), cmap="viridis", linewidth=0.2)
    ax.set_xlabel(xl)
    ax.set_ylabel(yl)
    ax.set_zlabel("steering [deg]")
    ax.set_title(name)
fig.tight_layout()
fig.savefig(OUT / "control_surfaces.png", dpi=120)

# ------------------------------------------------------------ decision regions
decider = scenario.build_decider()
grid = np.arange(0.0, 0.5, 0.0025)
colors = {"P": 2, "V": 1, "C": 0}
img = np.zeros((len(grid), len(grid)))
for i, depth in enumerate(grid):
    for j, length in enumerate(grid):
        img[i, j] = colors[decider.decide(float(depth), float(length)).value]

fig, ax = plt.subplots(figsize=(5, 4.2))
ax.imshow(img, origin="lower", extent=(0, 0.5, 0, 0.5), cmap="cividis")
ax.set_xlabel("measured slot length along the lane [m]")
ax.set_ylabel("measured slot depth [m]")
ax.set_title("Slot decision: dark = keep searching,\nmid = vertical, bright = parallel")
fig.tight_layout()
fig.savefig(OUT / "decision_regions.png", dpi=120)

print(f"wrote {OUT}/memberships.png, control_surfaces.png, decision_regions.png")
