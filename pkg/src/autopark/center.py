"""Control-room logic: lot registry, permission workflow, alarms, owner SMS mock.

The center consumes decoded application messages from the ground station and
produces single-letter command codes back.  The SMS gateway is a mock with an
append-only outbound log and an injectable inbound queue, standing in for the
GSM modem path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import comms

log = logging.getLogger(__name__)


@dataclass
class CarRecord:
    car_id: int
    mode_code: str = comms.STATUS_REQUEST
    reported_slot: int | None = None
    parked_slot: int | None = None
    alarm: str | None = None
    pending_request: bool = False


@dataclass
class OwnerMessage:
    direction: str  # "outbound" or "inbound"
    car_id: int
    location: str
    payload: str


@dataclass
class SmsGateway:
    """Mock GSM path: outbound notifications log plus an injectable inbox."""

    outbound: list[OwnerMessage] = field(default_factory=list)
    inbound: list[OwnerMessage] = field(default_factory=list)

    def notify_owner(self, car_id: int, location: str, extra: str = "") -> OwnerMessage:
        payload = f"{car_id},{location}"
        if extra:
            payload += f",{extra}"
        msg = OwnerMessage("outbound", car_id, location, payload)
        self.outbound.append(msg)
        return msg

    def inject_leave_request(self, car_id: int) -> None:
        self.inbound.append(
            OwnerMessage("inbound", car_id, "", f"{car_id},leave-request")
        )

    def drain_inbound(self) -> list[OwnerMessage]:
        msgs, self.inbound = self.inbound, []
        return msgs


@dataclass
class LotRegistry:
    slot_occupancy: dict[int, int | None] = field(default_factory=dict)  # slot -> car
    cars: dict[int, CarRecord] = field(default_factory=dict)

    def register_car(self, car_id: int) -> CarRecord:
        rec = CarRecord(car_id=car_id)
        self.cars[car_id] = rec
        return rec

    def register_slot(self, slot_id: int, occupied_by: int | None = None) -> None:
        self.slot_occupancy[slot_id] = occupied_by

    def occupy(self, slot_id: int, car_id: int) -> None:
        holder = self.slot_occupancy.get(slot_id)
        if holder is not None and holder != car_id:
            raise ValueError(f"slot {slot_id} already held by car {holder}")
        previous = self.cars[car_id].parked_slot
        if previous is not None and previous != slot_id:
            self.slot_occupancy[previous] = None
        self.slot_occupancy[slot_id] = car_id
        self.cars[car_id].parked_slot = slot_id

    def release(self, car_id: int) -> None:
        slot = self.cars[car_id].parked_slot
        if slot is not None:
            self.slot_occupancy[slot] = None
        self.cars[car_id].parked_slot = None

    def occupied_count(self) -> int:
        return sum(1 for car in self.slot_occupancy.values() if car is not None)

    def parked_count(self) -> int:
        return sum(1 for rec in self.cars.values() if rec.parked_slot is not None)

    def snapshot(self) -> dict:
        return {
            "slots": {str(k): v for k, v in sorted(self.slot_occupancy.items())},
            "cars": {
                str(cid): {
                    "mode": rec.mode_code,
                    "slot": rec.parked_slot,
                    "alarm": rec.alarm,
                    "pending": rec.pending_request,
                }
                for cid, rec in sorted(self.cars.items())
            },
        }


class CommandRejected(ValueError):
    pass


class ControlCenter:
    """Registry bookkeeping plus the operator and owner workflows."""

    def __init__(self, registry: LotRegistry, sms: SmsGateway, auto_grant: bool = False) -> None:
        self.registry = registry
        self.sms = sms
        self.auto_grant = auto_grant
        self.gui_events: list[dict] = []
        self.outgoing: list[str] = []  # command codes queued for the car

    def _gui(self, tick: int, kind: str, **info) -> None:
        self.gui_events.append({"tick": tick, "kind": kind, **info})

    # -- car -> center -------------------------------------------------------

    def handle_car_message(self, car_id: int, message: dict, tick: int) -> None:
        rec = self.registry.cars.get(car_id)
        if rec is None:
            log.warning("message from unknown car %s dropped", car_id)
            return
        if message["kind"] == "slot":
            rec.reported_slot = message["slot_id"]
            self._maybe_complete_park(rec, tick)
            return
        code = message["code"]
        rec.mode_code = code
        if code == comms.STATUS_REQUEST:
            if not rec.pending_request and rec.parked_slot is None:
                rec.pending_request = True
                self._gui(tick, "parking-request", car=car_id)
                if self.auto_grant:
                    self.operator_command("grant", car_id, tick)
        elif code == comms.STATUS_PARKED:
            self._maybe_complete_park(rec, tick)
        elif code in comms.ALARM_CODES:
            rec.alarm = code
            self._gui(tick, "alarm", car=car_id, code=code)
        elif code == comms.STATUS_LEAVING:
            if rec.parked_slot is not None:
                self.registry.release(car_id)
                self._gui(tick, "slot-freed", car=car_id)
        elif code in (comms.STATUS_SEARCHING, comms.STATUS_PARALLEL, comms.STATUS_VERTICAL):
            self._gui(tick, "status", car=car_id, code=code)

    def _maybe_complete_park(self, rec: CarRecord, tick: int) -> None:
        """Occupy the slot and notify the owner once per completed park."""
        if rec.mode_code != comms.STATUS_PARKED or rec.reported_slot is None:
            return
        if rec.parked_slot == rec.reported_slot:
            return  # retransmission of an already-handled completion
        self.registry.occupy(rec.reported_slot, rec.car_id)
        self._gui(tick, "parked", car=rec.car_id, slot=rec.reported_slot)
        self.sms.notify_owner(rec.car_id, f"slot {rec.reported_slot}")

    # -- operator ------------------------------------------------------------

    def operator_command(self, cmd: str, car_id: int, tick: int) -> str:
        """Validate and queue an operator command; returns the wire code."""
        rec = self.registry.cars.get(car_id)
        if rec is None:
            raise CommandRejected(f"unknown car {car_id}")
        if cmd in ("grant", "deny"):
            if not rec.pending_request:
                raise CommandRejected("no parking request pending")
            rec.pending_request = False
            code = comms.CMD_GRANT if cmd == "grant" else comms.CMD_DENY
        elif cmd in ("resume", "manual"):
            if rec.alarm is None:
                raise CommandRejected("no active alarm")
            rec.alarm = None
            code = comms.CMD_RESUME if cmd == "resume" else comms.CMD_MANUAL
        else:
            raise CommandRejected(f"unknown operator command {cmd!r}")
        self.outgoing.append(code)
        self._gui(tick, "operator-command", car=car_id, command=cmd, code=code)
        return code

    # -- owner ---------------------------------------------------------------

    def handle_leave_request(self, msg: OwnerMessage, tick: int) -> str | None:
        rec = self.registry.cars.get(msg.car_id)
        if rec is None:
            self.sms.notify_owner(msg.car_id, "unknown car", "rejected")
            return None
        if rec.parked_slot is None:
            if rec.mode_code == comms.STATUS_LEAVING:
                return None  # already on its way out; idempotent
            self.sms.notify_owner(msg.car_id, "not parked", "rejected")
            return None
        self.outgoing.append(comms.CMD_LEAVE)
        self._gui(tick, "leave-request", car=msg.car_id)
        return comms.CMD_LEAVE

    # -- tick -----------------------------------------------------------------

    def step(self, tick: int, upward_messages: list[dict], car_id: int) -> list[str]:
        """Process one tick of inputs; return command codes for the car."""
        for msg in upward_messages:
            self.handle_car_message(car_id, msg, tick)
        for owner_msg in self.sms.drain_inbound():
            self.handle_leave_request(owner_msg, tick)
        out, self.outgoing = self.outgoing, []
        return out
