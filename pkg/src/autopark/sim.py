"""Fixed-step deterministic run loop tying every subsystem together.

Tick order: scripted events, sensing, onboard control (emergency, mode FSM,
fuzzy controllers), vehicle integration, the radio link, then control-center
bookkeeping, and finally one trace record.  Given (scenario, seed) the whole
trace is bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comms
from .brain import Mode
from .center import CommandRejected, ControlCenter, LotRegistry, SmsGateway
from .control import slot_length
from .geometry import Rect
from .scenario import Scenario, ScenarioEvent
from .vehicle import DriveCommand, VehicleState, footprint, step as vehicle_step
from .world import Obstacle, SensorState, sample_frame, vehicle_collides

log = logging.getLogger(__name__)

OUTCOME_PARKED = "parked"
OUTCOME_EXITED = "exited"
OUTCOME_COLLISION = "collision"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_MANUAL = "manual-exit"

_SUCCESS_OUTCOMES = (OUTCOME_PARKED, OUTCOME_EXITED, OUTCOME_MANUAL)


@dataclass
class RunResult:
    outcome: str
    ticks: int
    registry: dict
    trace_dir: Path | None
    notifications: int

    @property
    def success(self) -> bool:
        return self.outcome in _SUCCESS_OUTCOMES


@dataclass
class InjectedCommand:
    tick: int
    type: str
    data: dict
    applied: bool = False
    accepted: bool | None = None
    reason: str = ""


class Simulation:
    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        trace_dir: str | Path | None = None,
        auto_grant: bool | None = None,
        extra_events: list[dict] | None = None,
    ) -> None:
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.dt = scenario.tick_seconds
        self.params = scenario.build_vehicle()
        self.lot = scenario.build_lot()
        self.rig = scenario.build_rig(self.params)
        self.brain = scenario.build_brain()
        self.car_id = scenario.car_id

        seq = np.random.SeedSequence(self.seed)
        rng_sensors, rng_up, rng_down = (np.random.default_rng(s) for s in seq.spawn(3))
        self.rng_sensors = rng_sensors
        model = scenario.build_channel_model()
        self.chan_up = comms.Channel(model=model, rng=rng_up)      # car -> ground station
        self.chan_down = comms.Channel(model=model, rng=rng_down)  # ground station -> car
        ccfg = scenario.raw["comms"]
        self.car_endpoint = comms.CarEndpoint(
            heartbeat_ticks=ccfg["heartbeat_ticks"],
            retransmit_ticks=ccfg["retransmit_ticks"],
        )
        self.ground_station = comms.GroundStation()

        registry = LotRegistry()
        for s in self.lot.slots:
            registry.register_slot(s.slot_id, None)
        registry.register_car(self.car_id)
        self.auto_grant = scenario.auto_grant if auto_grant is None else auto_grant
        self.center = ControlCenter(registry, SmsGateway(), auto_grant=self.auto_grant)

        entrance = self.lot.entrance
        self.vehicle = VehicleState(x=entrance[0], y=entrance[1], heading=entrance[2])
        self.sensors = SensorState()
        self.sensors.reset_yaw(self.vehicle.heading)

        events = [e.__dict__ if isinstance(e, ScenarioEvent) else dict(e) for e in scenario.events()]
        for extra in extra_events or []:
            ev = dict(extra)
            events.append(
                {"tick": ev.pop("tick"), "type": ev.pop("type"), "data": ev.get("data", ev)}
            )
        self.events = sorted(events, key=lambda e: e["tick"])
        self.last_event_tick = max((e["tick"] for e in self.events), default=-1)

        self.tick = 0
        self.outcome: str | None = None
        self._flush_left: int | None = None
        self._sleep_streak = 0
        self.pending_car_commands: list[str] = []
        self.center_outgoing: list[str] = []
        self.injected: list[InjectedCommand] = []
        self.collision_tick: int | None = None

        self.trace_dir = Path(trace_dir) if trace_dir else None
        self._trace_fh = None
        if self.trace_dir is not None:
            self.trace_dir.mkdir(parents=True, exist_ok=True)
            manifest = scenario.manifest()
            manifest["seed"] = self.seed
            manifest["auto_grant"] = self.auto_grant
            (self.trace_dir / "manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n"
            )
            self._trace_fh = (self.trace_dir / "trace.jsonl").open("w")
        self.trace_records: list[str] = []

    # -- scripted/injected events ------------------------------------------------

    def inject(self, command: InjectedCommand) -> None:
        """Queue an external command; it takes effect on its tick."""
        self.injected.append(command)

    def _apply_event(self, ev_type: str, data: dict) -> tuple[bool, str]:
        if ev_type == "obstacle-add":
            self.lot.add_obstacle(Obstacle(data["id"], Rect(*data["rect"])))
            return True, ""
        if ev_type == "obstacle-remove":
            self.lot.remove_obstacle(data["id"])
            return True, ""
        if ev_type == "shake":
            self._shake_this_tick = True
            return True, ""
        if ev_type == "leave-request":
            self.center.sms.inject_leave_request(self.car_id)
            return True, ""
        if ev_type == "operator":
            try:
                self.center.operator_command(data["command"], self.car_id, self.tick)
                return True, ""
            except CommandRejected as exc:
                log.warning("operator command rejected: %s", exc)
                return False, str(exc)
        return False, f"unknown event type {ev_type!r}"

    def _run_events_phase(self) -> None:
        self._shake_this_tick = False
        while self.events and self.events[0]["tick"] <= self.tick:
            ev = self.events.pop(0)
            self._apply_event(ev["type"], ev["data"])
        for cmd in self.injected:
            if not cmd.applied and cmd.tick <= self.tick:
                cmd.applied = True
                cmd.tick = self.tick
                ok, reason = self._apply_event(cmd.type, cmd.data)
                cmd.accepted, cmd.reason = ok, reason

    # -- per-tick ------------------------------------------------------------------

    def tick_once(self) -> dict:
        self._run_events_phase()

        frame = sample_frame(
            self.lot,
            self.vehicle,
            self.params,
            self.rig,
            self.sensors,
            rng=self.rng_sensors,
            shake_event=self._shake_this_tick,
        )
        travel = slot_length(
            frame.encoder_count,
            self.params,
            self.scenario.raw["controllers"]["decision"]["length_coefficient"],
        )

        for code in self.pending_car_commands:
            self.brain.apply_command(code)
        self.pending_car_commands = []

        out = self.brain.tick(frame, travel, self.dt, self.tick * self.dt)

        command = out.command
        self.vehicle = vehicle_step(self.vehicle, command, self.params, self.dt)
        self.sensors.advance(self.vehicle.speed, self.dt)

        alarms = list(out.alarms)
        if self.collision_tick is None and vehicle_collides(self.lot, self.params, self.vehicle):
            self.collision_tick = self.tick
            alarms += self.brain.crash_stop()
            self.outcome = OUTCOME_COLLISION
            self._flush_left = self.scenario.settle_ticks

        slot_id = self._resolve_slot_id() if out.park_completed else None

        car_tx = self.car_endpoint.step(
            self.tick,
            status=out.status,
            slot_id=slot_id,
            alarms=alarms,
            inbox=self.chan_down.poll(self.tick),
        )
        for frame_bytes in car_tx:
            self.chan_up.send(frame_bytes, self.tick)
        self.pending_car_commands = list(self.car_endpoint.received_commands)

        upward, gs_tx = self.ground_station.step(
            self.tick,
            inbox=self.chan_up.poll(self.tick),
            commands=self.center_outgoing,
        )
        self.center_outgoing = []
        for frame_bytes in gs_tx:
            self.chan_down.send(frame_bytes, self.tick)

        self.center_outgoing = self.center.step(self.tick, upward, self.car_id)
        gui_now = [e for e in self.center.gui_events if e["tick"] == self.tick]

        record = self._record(frame, out, car_tx, gs_tx, upward, alarms, gui_now)
        self._append_trace(record)
        self._update_outcome()
        self.tick += 1
        return record

    def _resolve_slot_id(self) -> int | None:
        body = footprint(self.vehicle, self.params)
        cx, cy = body.cx, body.cy
        for slot in self.lot.slots:
            if slot.rect.contains_point((cx, cy)):
                return slot.slot_id
        log.warning("park completed outside any slot rectangle")
        return None

    def _record(self, frame, out, car_tx, gs_tx, upward, alarms, gui_now) -> dict:
        reg_json = json.dumps(self.center.registry.snapshot(), sort_keys=True)
        return {
            "tick": self.tick,
            "mode": self.brain.state.mode.value,
            "status": out.status,
            "vehicle": {
                "x": self.vehicle.x,
                "y": self.vehicle.y,
                "heading": self.vehicle.heading,
                "speed": self.vehicle.speed,
                "steer": self.vehicle.steer,
            },
            "sensors": {
                **{k: frame.distances[k] for k in sorted(frame.distances)},
                "encoder": frame.encoder_count,
                "yaw": frame.yaw,
                "shake": frame.shake_event,
            },
            "fuzzy": out.fuzzy_trace,
            "car_tx": [f.hex() for f in car_tx],
            "gs_tx": [f.hex() for f in gs_tx],
            "gs_rx": upward,
            "alarms": alarms,
            "gui": gui_now,
            "notifications": len(self.center.sms.outbound),
            "registry_hash": hashlib.sha256(reg_json.encode()).hexdigest()[:16],
        }

    def _append_trace(self, record: dict) -> None:
        line = json.dumps(record, separators=(",", ":"))
        self.trace_records.append(line)
        if self._trace_fh is not None:
            self._trace_fh.write(line + "\n")

    def _update_outcome(self) -> None:
        if self._flush_left is not None:
            self._flush_left -= 1
            return
        mode = self.brain.state.mode
        if mode is Mode.EXITED:
            self.outcome = OUTCOME_EXITED
            self._flush_left = self.scenario.settle_ticks
        elif mode is Mode.MANUAL_EXIT:
            self.outcome = OUTCOME_MANUAL
            self._flush_left = self.scenario.settle_ticks
        elif (
            mode is Mode.SLEEP
            and self.brain.state.parked
            and self.tick > self.last_event_tick
            and not any(not c.applied for c in self.injected)
        ):
            self._sleep_streak += 1
            if self._sleep_streak >= self.scenario.settle_ticks:
                self.outcome = OUTCOME_PARKED
                self._flush_left = 0
        else:
            self._sleep_streak = 0

    # -- whole runs ---------------------------------------------------------------

    def done(self) -> bool:
        return self.outcome is not None and (self._flush_left or 0) <= 0

    def run(self, max_ticks: int | None = None) -> RunResult:
        limit = max_ticks if max_ticks is not None else self.scenario.max_ticks
        while not self.done() and self.tick < limit:
            self.tick_once()
        if self.outcome is None:
            self.outcome = OUTCOME_TIMEOUT
        return self.finalize()

    def finalize(self) -> RunResult:
        result = RunResult(
            outcome=self.outcome or OUTCOME_TIMEOUT,
            ticks=self.tick,
            registry=self.center.registry.snapshot(),
            trace_dir=self.trace_dir,
            notifications=len(self.center.sms.outbound),
        )
        if self.trace_dir is not None:
            if self._trace_fh is not None:
                self._trace_fh.close()
                self._trace_fh = None
            (self.trace_dir / "owner_messages.log").write_text(
                "".join(
                    f"{m.direction}\t{m.payload}\n" for m in self.center.sms.outbound
                )
            )
            injected = [
                {"tick": c.tick, "type": c.type, "data": c.data, "accepted": c.accepted}
                for c in self.injected
            ]
            (self.trace_dir / "result.json").write_text(
                json.dumps(
                    {
                        "outcome": result.outcome,
                        "ticks": result.ticks,
                        "registry": result.registry,
                        "notifications": result.notifications,
                        "injected": injected,
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )
        return result

    def snapshot(self) -> dict:
        """Immutable per-tick view for the telemetry stream."""
        reg = self.center.registry
        rec = reg.cars[self.car_id]
        return {
            "tick": self.tick,
            "tick_seconds": self.dt,
            "mode": self.brain.state.mode.value,
            "outcome": self.outcome,
            "vehicle": {
                "x": self.vehicle.x,
                "y": self.vehicle.y,
                "heading": self.vehicle.heading,
                "length": self.params.body_length,
                "width": self.params.body_width,
            },
            "lot": {
                "size": list(self.lot.size),
                "lane_y": list(self.lot.lane_y),
                "slots": [
                    {
                        "id": s.slot_id,
                        "rect": [s.rect.x_min, s.rect.y_min, s.rect.x_max, s.rect.y_max],
                        "row": s.row,
                        "occupied": s.occupied or reg.slot_occupancy.get(s.slot_id) is not None,
                    }
                    for s in self.lot.slots
                ],
                "obstacles": [
                    {
                        "id": o.obstacle_id,
                        "rect": [o.rect.x_min, o.rect.y_min, o.rect.x_max, o.rect.y_max],
                    }
                    for o in self.lot.obstacles
                ],
            },
            "pending_approval": rec.pending_request,
            "alarm": rec.alarm,
            "parked_slot": rec.parked_slot,
            "car_status": rec.mode_code,
        }


def run_scenario(
    scenario: Scenario,
    seed: int | None = None,
    max_ticks: int | None = None,
    trace_dir: str | Path | None = None,
    auto_grant: bool | None = None,
    extra_events: list[dict] | None = None,
) -> RunResult:
    sim = Simulation(
        scenario,
        seed=seed,
        trace_dir=trace_dir,
        auto_grant=auto_grant,
        extra_events=extra_events,
    )
    return sim.run(max_ticks=max_ticks)


def lifecycle_codes(trace_lines: list[str]) -> list[str]:
    """Ordered lifecycle markers extracted from a trace.

    Each marker appears at its first occurrence: car-sent status codes as
    they first hit the wire, 'G'/'W' when the ground station frames them,
    and 'notify' when the owner SMS goes out.  Heartbeat repetitions of an
    already-seen status do not register.
    """
    order: list[str] = []

    def push(code: str) -> None:
        if code not in order:
            order.append(code)

    notified = 0
    for line in trace_lines:
        rec = json.loads(line)
        for hexframe in rec["car_tx"]:
            frame = bytes.fromhex(hexframe)
            if frame[0] == comms.ADDR_CAR_STATUS:
                push(chr(frame[1]))
        for hexframe in rec["gs_tx"]:
            frame = bytes.fromhex(hexframe)
            if frame[0] == comms.ADDR_CAR_CMD and chr(frame[1]) != comms.ACK:
                push(chr(frame[1]))
        if rec["notifications"] > notified:
            notified = rec["notifications"]
            push("notify")
        if rec["mode"] == Mode.EXITED.value:
            push("exit")
            break
    return order
