"""Dev helper: regenerate the bundled scenario JSON files."""
import json
from pathlib import Path

OUT = Path("src/autopark/data")

P_ROW_Y = [0.45, 0.67]   # depth 0.22
V_ROW_Y = [0.45, 0.75]   # depth 0.30
P_X0, P_LEN = 0.30, 0.40
V_X0, V_LEN = 1.90, 0.25


def slots(p_occ, v_occ):
    out = []
    for i in range(4):
        out.append({
            "id": i + 1,
            "rect": [round(P_X0 + i * P_LEN, 3), P_ROW_Y[0],
                     round(P_X0 + (i + 1) * P_LEN, 3), P_ROW_Y[1]],
            "row": "parallel-row",
            "occupied": p_occ[i],
        })
    for i in range(4):
        out.append({
            "id": i + 5,
            "rect": [round(V_X0 + i * V_LEN, 3), V_ROW_Y[0],
                     round(V_X0 + (i + 1) * V_LEN, 3), V_ROW_Y[1]],
            "row": "vertical-row",
            "occupied": v_occ[i],
        })
    return out


EXTRA_WALLS = [
    [P_X0, P_ROW_Y[1], V_X0, P_ROW_Y[1]],              # parallel row back wall
    [V_X0, V_ROW_Y[1], V_X0 + 4 * V_LEN, V_ROW_Y[1]],  # vertical row back wall
    [P_X0, P_ROW_Y[0], P_X0, P_ROW_Y[1]],              # west cap
    [V_X0 + 4 * V_LEN, V_ROW_Y[0], V_X0 + 4 * V_LEN, V_ROW_Y[1]],  # east cap
    [V_X0, P_ROW_Y[1], V_X0, V_ROW_Y[1]],              # step between the rows
]


def base(name, p_occ, v_occ, events=(), seed=1):
    return {
        "schema_version": 1,
        "name": name,
        "seed": seed,
        "lot": {
            "size": [3.0, 2.5],
            "lane_y": [0.0, 0.45],
            "entrance": [0.25, 0.24, 0.0],
            "exit": [2.80, 0.24, 0.0],
            "extra_walls": EXTRA_WALLS,
            "slots": slots(p_occ, v_occ),
        },
        "events": list(events),
    }


scenarios = {
    # end-to-end lifecycle: only vertical slot 7 free; scripted leave request
    "default": base(
        "default",
        [True, True, True, True],
        [True, False, True, True],
        events=[{"tick": 2400, "type": "leave-request"}],
    ),
    # parallel target (slot 3) with occupied neighbours; run ends parked
    "parallel": base(
        "parallel",
        [True, True, False, True],
        [True, True, True, True],
    ),
    # vertical target (slot 7); run ends parked
    "vertical": base(
        "vertical",
        [True, True, True, True],
        [True, False, True, True],
    ),
    # permanent obstacle in the lane ahead of the searching car
    "congestion": base(
        "congestion",
        [True, True, True, True],
        [True, False, True, True],
        events=[{"tick": 100, "type": "obstacle-add", "id": "box",
                 "rect": [1.00, 0.10, 1.10, 0.38]}],
    ),
}

OUT.mkdir(parents=True, exist_ok=True)
for name, doc in scenarios.items():
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print("wrote", path)
