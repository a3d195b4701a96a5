"""Dev helper: closed-loop tuning of the turn controller and maneuver offsets."""
import json
import math
import sys

import autopark
from autopark.brain import Direction
from autopark.control import TurnController, make_five_term_controller, TURN_RULES, steering_command
from autopark.geometry import normalize_angle
from autopark.vehicle import DriveCommand, VehicleParams, VehicleState, step


def turn_metrics(e_bp, rate_bp, singles, speed=0.10, creep=0.04, slow_err=20.0,
                 target=-math.pi / 2, dt=0.02, verbose=False):
    """Reverse turn from yaw 0 to target; return (settle_s, overshoot_deg, dx, dy, ok)."""
    ctrl = make_five_term_controller(
        tuple(math.radians(v) for v in e_bp), (math.radians(-180), math.radians(180)),
        tuple(math.radians(v) for v in rate_bp), (math.radians(-360), math.radians(360)),
        tuple(math.radians(v) for v in singles), TURN_RULES)
    turn = TurnController(ctrl)
    params = VehicleParams()
    st = VehicleState()
    last_yaw = 0.0
    overshoot = 0.0
    first_hit = None  # (t, x, y) at first |err| <= 2 deg: where a maneuver phase exits
    settle_t = None
    min_y_excursion = 0.0
    for i in range(1500):  # 30 s
        yaw = st.heading
        rate = normalize_angle(yaw - last_yaw) / dt
        last_yaw = yaw
        err = target - yaw
        sp = speed if abs(err) > math.radians(slow_err) else creep
        steer = steering_command(turn, target, yaw, rate, Direction.BACKWARD, params.max_steer)
        st = step(st, DriveCommand(-sp, steer), params, dt)
        overshoot = max(overshoot, math.degrees(max(0.0, target - st.heading) if target < 0 else max(0.0, st.heading - target)))
        min_y_excursion = min(min_y_excursion, st.y)
        if abs(st.heading - target) <= math.radians(2.0):
            if first_hit is None:
                first_hit = (i * dt, st.x, st.y)
            if settle_t is None:
                settle_t = i * dt
        elif settle_t is not None:
            settle_t = None  # left the band; not settled yet
    ok = settle_t is not None and settle_t <= 15.0 and overshoot <= 10.0
    if first_hit is None:
        return settle_t, overshoot, None, None, None, ok
    return settle_t, overshoot, first_hit[0], first_hit[1], first_hit[2], ok


def arc_exit(turn, params, st, target, yaw0, speed, creep, slow_err_deg, dt=0.02,
             direction=Direction.BACKWARD, tol_deg=2.0, max_s=25.0):
    """Run one maneuver turn phase; return state at phase exit (or None)."""
    last_yaw = st.heading
    for i in range(int(max_s / dt)):
        rel = normalize_angle(st.heading - yaw0)
        rate = normalize_angle(st.heading - last_yaw) / dt
        last_yaw = st.heading
        if abs(rel - target) <= math.radians(tol_deg):
            return st, i * dt
        sp = speed if abs(target - rel) > math.radians(slow_err_deg) else creep
        steer = steering_command(turn, target, rel, rate, direction, params.max_steer)
        st = step(st, DriveCommand(sp * direction.value, steer), params, dt)
    return None, None


def build_turn(e_bp, rate_bp, singles):
    ctrl = make_five_term_controller(
        tuple(math.radians(v) for v in e_bp), (math.radians(-180), math.radians(180)),
        tuple(math.radians(v) for v in rate_bp), (math.radians(-360), math.radians(360)),
        tuple(math.radians(v) for v in singles), TURN_RULES)
    return TurnController(ctrl)


def main():
    print("== grid search: settle<=15s, overshoot<=10deg, quarter-turn extents ==")
    params = VehicleParams()
    best = []
    for e_in in (10, 15, 20):
        for e_out in (30, 45, 60):
            for r_in in (20, 30, 40):
                for s_in in (20, 25, 27):
                    for creep in (0.03, 0.04):
                        for slow in (10, 15):
                            e_bp = [-e_out, -e_in, 0, e_in, e_out]
                            r_bp = [-3 * r_in, -r_in, 0, r_in, 3 * r_in]
                            sg = [-30, -s_in, 0, s_in, 30]
                            s, ov, t, x, y, ok = turn_metrics(
                                e_bp, r_bp, sg, creep=creep, slow_err=slow)
                            if not ok or x is None:
                                continue
                            # quarter turn must fit slot depth and keep time budget
                            if 0.24 <= y <= 0.34 and x >= -0.42 and t <= 12.0:
                                best.append((t, y, x, ov, e_bp, r_bp, sg, creep, slow))
    best.sort()
    for t, y, x, ov, e_bp, r_bp, sg, creep, slow in best[:12]:
        print(f"t={t:5.2f}s dy={y:.3f} dx={x:.3f} ov={ov:4.1f} "
              f"e={e_bp} r={r_bp} s={sg} creep={creep} slow={slow}")


if __name__ == "__main__":
    main()


if __name__ == "__main__":
    main()
