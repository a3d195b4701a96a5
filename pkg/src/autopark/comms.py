"""Three-byte framed link between the car and the ground station.

Wire format is (address, data, check) with check = address XOR data, which
detects every single-bit error in a frame.  The channel model drops and
bit-flips frames under a seeded stream and delivers survivors after a fixed
tick latency.  Endpoints implement fire-and-forget status, heartbeats, and
retransmit-until-ack for the two safety alarms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PACKET_LEN = 3

# single-letter status/command alphabet carried in the data byte
STATUS_SEARCHING = "S"
STATUS_PARALLEL = "P"
STATUS_VERTICAL = "V"
STATUS_PARKED = "E"
STATUS_LEAVING = "L"
STATUS_CONGESTION = "C"
STATUS_CRASH = "X"
CMD_RESUME = "R"
CMD_MANUAL = "M"
STATUS_REQUEST = "Q"
CMD_GRANT = "G"
CMD_DENY = "D"
CMD_LEAVE = "W"
ACK = "A"  # link-level alarm acknowledgement (not part of the operator set)

STATUS_CODES = {
    STATUS_SEARCHING: "searching",
    STATUS_PARALLEL: "parallel-parking",
    STATUS_VERTICAL: "vertical-parking",
    STATUS_PARKED: "parked",
    STATUS_LEAVING: "leaving",
    STATUS_CONGESTION: "congestion-alarm",
    STATUS_CRASH: "crash-alarm",
    CMD_RESUME: "resume",
    CMD_MANUAL: "manual",
    STATUS_REQUEST: "parking-request",
    CMD_GRANT: "permission-granted",
    CMD_DENY: "permission-denied",
    CMD_LEAVE: "leave-command",
    ACK: "alarm-ack",
}

ALARM_CODES = (STATUS_CONGESTION, STATUS_CRASH)

# address bytes name the receiving mailbox
ADDR_CAR_STATUS = 0x10   # car -> ground station, data = status letter
ADDR_CAR_SLOT = 0x11     # car -> ground station, data = slot id
ADDR_CAR_CMD = 0x20      # ground station -> car, data = command letter


class ProtocolError(ValueError):
    pass


class FrameLengthError(ProtocolError):
    pass


class IntegrityError(ProtocolError):
    pass


@dataclass(frozen=True)
class Packet:
    address: int
    data: int

    def __post_init__(self) -> None:
        if not (0 <= self.address <= 0xFF and 0 <= self.data <= 0xFF):
            raise ValueError("address and data must be single bytes")

    @property
    def check(self) -> int:
        return self.address ^ self.data


def encode(address: int, data: int) -> bytes:
    pkt = Packet(address, data)
    return bytes((pkt.address, pkt.data, pkt.check))


def decode(frame: bytes) -> tuple[int, int]:
    """Return (address, data) from a verified frame.

    Raises FrameLengthError for anything but 3 bytes and IntegrityError when
    the check byte does not match.  Address filtering is the receiver's job:
    frames for another host decode fine here and are dropped silently there.
    """
    if len(frame) != PACKET_LEN:
        raise FrameLengthError(f"expected {PACKET_LEN} bytes, got {len(frame)}")
    address, data, check = frame
    if (address ^ data) != check:
        raise IntegrityError(
            f"check byte 0x{check:02X} does not verify 0x{address:02X}^0x{data:02X}"
        )
    return address, data


def code_packet(address: int, code: str) -> bytes:
    return encode(address, ord(code))


@dataclass(frozen=True)
class ChannelModel:
    loss_probability: float = 0.0
    bit_flip_probability: float = 0.0
    latency_ticks: int = 1

    def __post_init__(self) -> None:
        for name in ("loss_probability", "bit_flip_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.latency_ticks < 0:
            raise ValueError("latency cannot be negative")


@dataclass
class Channel:
    """One direction of the RF link; deterministic given its seeded stream."""

    model: ChannelModel
    rng: np.random.Generator
    in_flight: list[tuple[int, bytes]] = field(default_factory=list)

    def send(self, frame: bytes, tick: int) -> None:
        if self.model.loss_probability > 0.0:
            if self.rng.random() < self.model.loss_probability:
                return
        if self.model.bit_flip_probability > 0.0:
            frame = self._corrupt(frame)
        self.in_flight.append((tick + self.model.latency_ticks, frame))

    def _corrupt(self, frame: bytes) -> bytes:
        out = bytearray(frame)
        flips = self.rng.random(8 * len(out)) < self.model.bit_flip_probability
        for bit, flipped in enumerate(flips):
            if flipped:
                out[bit // 8] ^= 1 << (bit % 8)
        return bytes(out)

    def poll(self, tick: int) -> list[bytes]:
        due = [f for t, f in self.in_flight if t <= tick]
        self.in_flight = [(t, f) for t, f in self.in_flight if t > tick]
        return due


@dataclass
class LinkStats:
    sent: int = 0
    delivered: int = 0
    integrity_failures: int = 0
    wrong_address: int = 0


@dataclass
class CarEndpoint:
    """Car-side radio logic: status on change, heartbeat, alarm retransmission."""

    heartbeat_ticks: int = 25
    retransmit_ticks: int = 10
    last_status: str | None = None
    last_sent_tick: int = -(10 ** 9)
    pending_alarm: str | None = None
    pending_alarm_tick: int = 0
    alarm_episode: int = 0
    received_commands: list[str] = field(default_factory=list)
    stats: LinkStats = field(default_factory=LinkStats)

    def step(
        self,
        tick: int,
        status: str,
        slot_id: int | None,
        alarms: list[str],
        inbox: list[bytes],
    ) -> list[bytes]:
        """Process received frames and emit this tick's transmissions."""
        self.received_commands = []
        for frame in inbox:
            try:
                address, data = decode(frame)
            except FrameLengthError:
                self.stats.integrity_failures += 1
                continue
            except IntegrityError:
                self.stats.integrity_failures += 1
                continue
            if address != ADDR_CAR_CMD:
                self.stats.wrong_address += 1
                continue
            code = chr(data)
            if code == ACK:
                self.pending_alarm = None
            else:
                self.received_commands.append(code)

        out: list[bytes] = []
        for alarm in alarms:
            self.pending_alarm = alarm
            self.pending_alarm_tick = tick
            self.alarm_episode += 1
            out.append(code_packet(ADDR_CAR_STATUS, alarm))
        if self.pending_alarm is not None and not alarms:
            if tick - self.pending_alarm_tick >= self.retransmit_ticks:
                self.pending_alarm_tick = tick
                out.append(code_packet(ADDR_CAR_STATUS, self.pending_alarm))
        if status != self.last_status:
            self.last_status = status
            self.last_sent_tick = tick
            out.append(code_packet(ADDR_CAR_STATUS, status))
            if slot_id is not None:
                out.append(encode(ADDR_CAR_SLOT, slot_id))
        elif tick - self.last_sent_tick >= self.heartbeat_ticks:
            self.last_sent_tick = tick
            out.append(code_packet(ADDR_CAR_STATUS, status))
        self.stats.sent += len(out)
        return out


@dataclass
class GroundStation:
    """In-lot relay: decodes car frames for the control room and frames commands back.

    Alarms are acknowledged here so the car stops retransmitting once the
    control room has the message; duplicates within one alarm episode are
    suppressed before they reach the application.
    """

    active_alarms: set[str] = field(default_factory=set)
    stats: LinkStats = field(default_factory=LinkStats)

    def step(
        self,
        tick: int,
        inbox: list[bytes],
        commands: list[str],
    ) -> tuple[list[dict], list[bytes]]:
        """Return (application messages up, frames for the car down)."""
        upward: list[dict] = []
        downward: list[bytes] = []
        for frame in inbox:
            try:
                address, data = decode(frame)
            except ProtocolError:
                self.stats.integrity_failures += 1
                continue
            if address == ADDR_CAR_STATUS:
                code = chr(data)
                if code in ALARM_CODES:
                    downward.append(code_packet(ADDR_CAR_CMD, ACK))
                    if code in self.active_alarms:
                        continue  # duplicate within the episode
                    self.active_alarms.add(code)
                upward.append({"kind": "status", "code": code, "tick": tick})
                self.stats.delivered += 1
            elif address == ADDR_CAR_SLOT:
                upward.append({"kind": "slot", "slot_id": data, "tick": tick})
                self.stats.delivered += 1
            else:
                self.stats.wrong_address += 1
        for code in commands:
            if code in (CMD_RESUME, CMD_MANUAL):
                self.active_alarms.clear()  # operator handled the episode
            downward.append(code_packet(ADDR_CAR_CMD, code))
        return upward, downward
