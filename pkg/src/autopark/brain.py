"""Onboard decision logic: action modes, parking maneuvers, emergency handling.

The car runs a small hierarchy once per tick: operator commands feed the mode
state machine, the emergency monitor can veto motion or raise alarms, and the
active mode produces a drive command from the fuzzy controllers.  Everything
works from sensor readings (ranges, encoder travel, relative yaw); the brain
never sees ground-truth pose.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

from . import comms
from .control import (
    Direction,
    ParkAction,
    ParkingDecider,
    PostureController,
    SlotCandidate,
    SlotScanner,
    TurnController,
    steering_command,
)
from .geometry import normalize_angle
from .vehicle import DriveCommand
from .world import PARALLEL_ROW, VERTICAL_ROW, SensorFrame

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    SLEEP = "sleep"
    SEARCHING = "searching"
    PARKING = "parking"
    LEAVING = "leaving"
    EMERGENCY_HOLD = "emergency-hold"
    MANUAL_EXIT = "manual-exit"
    EXITED = "exited"


TERMINAL_MODES = (Mode.MANUAL_EXIT, Mode.EXITED)


class ManeuverKind(enum.Enum):
    PARALLEL = "parallel"
    VERTICAL = "vertical"


class EventKind(enum.Enum):
    PERMISSION_GRANTED = "permission-granted"
    PERMISSION_DENIED = "permission-denied"
    DECIDE_PARALLEL = "decide-parallel"
    DECIDE_VERTICAL = "decide-vertical"
    PARK_COMPLETE = "park-complete"
    LEAVE_COMMAND = "leave-command"
    EXIT_REACHED = "exit-reached"
    ALARM_RAISED = "alarm-raised"
    RESUME_COMMAND = "resume-command"
    MANUAL_COMMAND = "manual-command"
    OBSTACLE = "obstacle"


@dataclass(frozen=True)
class ModeState:
    mode: Mode = Mode.SLEEP
    maneuver: ManeuverKind | None = None
    step: int = 0
    prior: Mode | None = None
    parked: bool = False
    parked_row: str | None = None


def mode_transition(state: ModeState, event: EventKind) -> ModeState:
    """Total transition function; illegal events leave the state unchanged."""
    mode = state.mode
    if mode in TERMINAL_MODES:
        return state
    if event is EventKind.ALARM_RAISED:
        if mode is Mode.SLEEP or mode is Mode.EMERGENCY_HOLD:
            return state  # radio-only in sleep; a hold cannot re-hold
        return replace(state, mode=Mode.EMERGENCY_HOLD, prior=mode)
    if mode is Mode.SLEEP:
        if event is EventKind.PERMISSION_GRANTED and not state.parked:
            return replace(state, mode=Mode.SEARCHING)
        if event is EventKind.LEAVE_COMMAND and state.parked:
            return replace(state, mode=Mode.LEAVING)
    elif mode is Mode.SEARCHING:
        if event is EventKind.DECIDE_PARALLEL:
            return replace(state, mode=Mode.PARKING, maneuver=ManeuverKind.PARALLEL, step=1)
        if event is EventKind.DECIDE_VERTICAL:
            return replace(state, mode=Mode.PARKING, maneuver=ManeuverKind.VERTICAL, step=1)
    elif mode is Mode.PARKING:
        if event is EventKind.PARK_COMPLETE:
            row = PARALLEL_ROW if state.maneuver is ManeuverKind.PARALLEL else VERTICAL_ROW
            return ModeState(mode=Mode.SLEEP, parked=True, parked_row=row)
    elif mode is Mode.LEAVING:
        if event is EventKind.EXIT_REACHED:
            return replace(state, mode=Mode.EXITED)
    elif mode is Mode.EMERGENCY_HOLD:
        if event is EventKind.RESUME_COMMAND:
            return replace(state, mode=state.prior or Mode.SLEEP, prior=None)
        if event is EventKind.MANUAL_COMMAND:
            return replace(state, mode=Mode.MANUAL_EXIT, prior=None)
    if event not in (EventKind.OBSTACLE,):
        log.warning("ignoring event %s in mode %s", event.value, mode.value)
    return state


STATUS_BY_MODE = {
    Mode.SEARCHING: comms.STATUS_SEARCHING,
    Mode.LEAVING: comms.STATUS_LEAVING,
    Mode.MANUAL_EXIT: comms.CMD_MANUAL,
    Mode.EXITED: comms.STATUS_LEAVING,
}


@dataclass
class EmergencyConfig:
    stop_distance: float = 0.06
    congestion_timeout: float = 5.0

    def __post_init__(self) -> None:
        if self.congestion_timeout <= 0.0:
            raise ValueError("congestion timeout must be positive")


@dataclass
class EmergencyMonitor:
    """Obstacle stop with a congestion timer, plus the crash (shake) signal.

    A stop episode raises at most one congestion alarm; clearing the obstacle
    before the timeout resumes motion with no alarm at all.
    """

    config: EmergencyConfig
    stopped_since: float | None = None
    congestion_sent: bool = False

    def step(
        self, frame: SensorFrame, direction: Direction, now: float
    ) -> tuple[bool, list[str]]:
        """Return (hold motion, alarms raised this tick)."""
        alarms: list[str] = []
        if frame.shake_event:
            alarms.append(comms.STATUS_CRASH)
        look = frame["FC"] if direction is Direction.FORWARD else frame["BC"]
        if look < self.config.stop_distance:
            if self.stopped_since is None:
                self.stopped_since = now
                self.congestion_sent = False
            elif (now - self.stopped_since) >= self.config.congestion_timeout:
                if not self.congestion_sent:
                    self.congestion_sent = True
                    alarms.append(comms.STATUS_CONGESTION)
            return True, alarms
        self.stopped_since = None
        self.congestion_sent = False
        return bool(alarms), alarms

    def reset(self) -> None:
        self.stopped_since = None
        self.congestion_sent = False


@dataclass
class ManeuverConfig:
    search_speed: float = 0.10
    maneuver_speed: float = 0.10
    creep_speed: float = 0.05
    heading_tol: float = math.radians(2.0)
    parallel_entry_angle: float = math.radians(67.0)
    parallel_travel_offset: float = 0.475   # alignment distance past slot center
    vertical_travel_offset: float = 0.26    # alignment distance past slot center
    vertical_back_gap: float = 0.07         # BC reading that ends the final reverse
    center_tol: float = 0.015               # FC/BC balance for in-slot centering
    leave_back_gap: float = 0.05
    leave_exit_angle: float = math.radians(50.0)
    vertical_leave_turn_fc: float = 0.30    # FC reading that starts the exit turn
    exit_fc_threshold: float = 0.12         # FC reading that counts as "at the exit"
    turn_slow_error: float = math.radians(20.0)  # ease to creep speed near the target
    steer_hold: float = 0.0


@dataclass
class ManeuverState:
    kind: ManeuverKind
    phase: int = 0
    yaw_ref: float = 0.0
    align_travel: float = 0.0
    yaw_zeroed: bool = False


@dataclass
class BrainOutput:
    command: DriveCommand
    status: str
    alarms: list[str] = field(default_factory=list)
    park_completed: bool = False
    fuzzy_trace: dict | None = None


class CarBrain:
    """Everything between the sensor frame and the drive command."""

    def __init__(
        self,
        posture: PostureController,
        turn: TurnController,
        decider: ParkingDecider,
        scanner: SlotScanner,
        emergency: EmergencyMonitor,
        maneuver_cfg: ManeuverConfig,
        max_steer: float,
    ) -> None:
        self.posture = posture
        self.turn = turn
        self.decider = decider
        self.scanner = scanner
        self.emergency = emergency
        self.cfg = maneuver_cfg
        self.max_steer = max_steer
        self.state = ModeState()
        self.maneuver: ManeuverState | None = None
        self.leave_phase = 0
        self.leave_yaw_ref = 0.0
        self.last_yaw = 0.0
        self.last_decision: tuple[SlotCandidate, ParkAction] | None = None

    # -- command intake ----------------------------------------------------

    def apply_command(self, code: str) -> None:
        event = {
            comms.CMD_GRANT: EventKind.PERMISSION_GRANTED,
            comms.CMD_DENY: EventKind.PERMISSION_DENIED,
            comms.CMD_RESUME: EventKind.RESUME_COMMAND,
            comms.CMD_MANUAL: EventKind.MANUAL_COMMAND,
            comms.CMD_LEAVE: EventKind.LEAVE_COMMAND,
        }.get(code)
        if event is None:
            log.warning("unknown command code %r", code)
            return
        prev = self.state
        self.state = mode_transition(self.state, event)
        if prev.mode is not self.state.mode:
            if self.state.mode is Mode.LEAVING:
                self.leave_phase = 0
            if event is EventKind.RESUME_COMMAND:
                self.emergency.reset()

    # -- per-tick control ---------------------------------------------------

    def tick(self, frame: SensorFrame, travel: float, dt: float, now: float) -> BrainOutput:
        yaw_rate = normalize_angle(frame.yaw - self.last_yaw) / dt
        self.last_yaw = frame.yaw
        mode = self.state.mode

        if mode in (Mode.SLEEP, Mode.MANUAL_EXIT, Mode.EXITED, Mode.EMERGENCY_HOLD):
            return BrainOutput(DriveCommand(0.0, 0.0), self._status())

        direction = self._travel_direction(mode)
        hold = False
        alarms: list[str] = []
        if self._emergency_active(mode):
            hold, alarms = self.emergency.step(frame, direction, now)
            if alarms:
                self.state = mode_transition(self.state, EventKind.ALARM_RAISED)
                return BrainOutput(DriveCommand(0.0, 0.0), self._status(), alarms=alarms)
        if hold:
            return BrainOutput(DriveCommand(0.0, self.cfg.steer_hold), self._status())

        if mode is Mode.SEARCHING:
            return self._tick_searching(frame, travel)
        if mode is Mode.PARKING:
            return self._tick_parking(frame, travel, yaw_rate)
        if mode is Mode.LEAVING:
            return self._tick_leaving(frame, yaw_rate)
        return BrainOutput(DriveCommand(0.0, 0.0), self._status())

    def crash_stop(self) -> list[str]:
        """Collision response: stop immediately and raise the crash signal."""
        self.state = mode_transition(self.state, EventKind.ALARM_RAISED)
        return [comms.STATUS_CRASH]

    # -- mode handlers -------------------------------------------------------

    def _tick_searching(self, frame: SensorFrame, travel: float) -> BrainOutput:
        steer = self.posture.steer(frame, Direction.FORWARD)
        trace = {"controller": "posture", "inputs": [frame["FR"], frame["BR"]], "output": steer}
        candidate = self.scanner.update(frame["FL"], travel)
        if candidate is not None:
            action = self.decider.decide(candidate.depth, candidate.length)
            trace = {
                "controller": "decision",
                "inputs": [candidate.depth, candidate.length],
                "output": action.value,
            }
            if action is not ParkAction.CONTINUE:
                self.last_decision = (candidate, action)
                kind = (
                    ManeuverKind.PARALLEL
                    if action is ParkAction.PARALLEL
                    else ManeuverKind.VERTICAL
                )
                event = (
                    EventKind.DECIDE_PARALLEL
                    if action is ParkAction.PARALLEL
                    else EventKind.DECIDE_VERTICAL
                )
                self.state = mode_transition(self.state, event)
                self.maneuver = self._begin_maneuver(kind, candidate, travel)
                return BrainOutput(
                    DriveCommand(self.cfg.search_speed, steer), self._status(), fuzzy_trace=trace
                )
        return BrainOutput(
            DriveCommand(self.cfg.search_speed, steer), self._status(), fuzzy_trace=trace
        )

    def _begin_maneuver(
        self, kind: ManeuverKind, candidate: SlotCandidate, travel: float
    ) -> ManeuverState:
        offset = (
            self.cfg.parallel_travel_offset
            if kind is ManeuverKind.PARALLEL
            else self.cfg.vertical_travel_offset
        )
        # stop with the reference this far past the slot center; the sensor
        # sits ahead of the reference by its mount offset, which is folded
        # into the configured offset
        align = candidate.end_travel - candidate.length / 2.0 + offset
        return ManeuverState(kind=kind, align_travel=max(align, travel))

    def _tick_parking(self, frame: SensorFrame, travel: float, yaw_rate: float) -> BrainOutput:
        m = self.maneuver
        assert m is not None, "parking mode without a maneuver"
        cfg = self.cfg
        if m.phase == 0:  # adjust initial position: keep wall-following forward
            if travel >= m.align_travel:
                m.phase = 1
                m.yaw_ref = frame.yaw
                m.yaw_zeroed = True
                return BrainOutput(DriveCommand(0.0, 0.0), self._status())
            steer = self.posture.steer(frame, Direction.FORWARD)
            speed = cfg.maneuver_speed if m.align_travel - travel > 0.02 else cfg.creep_speed
            return BrainOutput(
                DriveCommand(speed, steer),
                self._status(),
                fuzzy_trace={"controller": "posture", "inputs": [frame["FR"], frame["BR"]], "output": steer},
            )
        rel_yaw = normalize_angle(frame.yaw - m.yaw_ref)
        if m.kind is ManeuverKind.PARALLEL:
            return self._tick_parallel(frame, rel_yaw, yaw_rate)
        return self._tick_vertical(frame, rel_yaw, yaw_rate)

    def _turn_command(
        self, target: float, rel_yaw: float, yaw_rate: float, direction: Direction, speed: float
    ) -> tuple[DriveCommand, dict]:
        steer = steering_command(
            self.turn, target, rel_yaw, yaw_rate, direction, self.max_steer
        )
        if abs(target - rel_yaw) <= self.cfg.turn_slow_error:
            speed = min(speed, self.cfg.creep_speed)
        trace = {
            "controller": "turn",
            "inputs": [target - rel_yaw, -yaw_rate],
            "output": steer,
        }
        return DriveCommand(speed * direction.value, steer), trace

    def _tick_parallel(self, frame: SensorFrame, rel_yaw: float, yaw_rate: float) -> BrainOutput:
        m = self.maneuver
        cfg = self.cfg
        if m.phase == 1:  # steer left, reverse to the entry angle
            target = -cfg.parallel_entry_angle
            if abs(rel_yaw - target) <= cfg.heading_tol:
                m.phase = 2
                return BrainOutput(DriveCommand(0.0, 0.0), self._status())
            cmd, trace = self._turn_command(
                target, rel_yaw, yaw_rate, Direction.BACKWARD, cfg.maneuver_speed
            )
            return BrainOutput(cmd, self._status(), fuzzy_trace=trace)
        if m.phase == 2:  # steer right, reverse until parallel again
            if abs(rel_yaw) <= cfg.heading_tol:
                m.phase = 3
                return BrainOutput(DriveCommand(0.0, 0.0), self._status())
            cmd, trace = self._turn_command(
                0.0, rel_yaw, yaw_rate, Direction.BACKWARD, cfg.maneuver_speed
            )
            return BrainOutput(cmd, self._status(), fuzzy_trace=trace)
        # phase 3: post-parking adjustment, balance the fore/aft gaps
        imbalance = frame["FC"] - frame["BC"]
        if abs(imbalance) <= cfg.center_tol:
            return self._complete_park()
        speed = cfg.creep_speed if imbalance > 0 else -cfg.creep_speed
        return BrainOutput(DriveCommand(speed, 0.0), self._status())

    def _tick_vertical(self, frame: SensorFrame, rel_yaw: float, yaw_rate: float) -> BrainOutput:
        m = self.maneuver
        cfg = self.cfg
        if m.phase == 1:  # backtracking 90 degree turn
            target = -math.pi / 2.0
            if abs(rel_yaw - target) <= cfg.heading_tol:
                m.phase = 2
                return BrainOutput(DriveCommand(0.0, 0.0), self._status())
            cmd, trace = self._turn_command(
                target, rel_yaw, yaw_rate, Direction.BACKWARD, cfg.maneuver_speed
            )
            return BrainOutput(cmd, self._status(), fuzzy_trace=trace)
        # phase 2: move backward straight into the slot
        if frame["BC"] <= cfg.vertical_back_gap:
            return self._complete_park()
        return BrainOutput(DriveCommand(-cfg.creep_speed, 0.0), self._status())

    def _complete_park(self) -> BrainOutput:
        self.state = mode_transition(self.state, EventKind.PARK_COMPLETE)
        self.maneuver = None
        return BrainOutput(
            DriveCommand(0.0, 0.0), self._status(), park_completed=True
        )

    def _tick_leaving(self, frame: SensorFrame, yaw_rate: float) -> BrainOutput:
        cfg = self.cfg
        if self.state.parked_row == VERTICAL_ROW:
            # nose already points at the lane: pull out, quarter turn left, follow the wall
            if self.leave_phase == 0:
                self.leave_yaw_ref = frame.yaw
                self.leave_phase = 1
            if self.leave_phase == 1:
                if frame["FC"] <= cfg.vertical_leave_turn_fc:
                    self.leave_phase = 2
                return BrainOutput(DriveCommand(cfg.maneuver_speed, 0.0), self._status())
            if self.leave_phase == 2:
                rel = normalize_angle(frame.yaw - self.leave_yaw_ref)
                target = math.pi / 2.0
                if abs(rel - target) <= cfg.heading_tol:
                    self.leave_phase = 3
                    return BrainOutput(DriveCommand(0.0, 0.0), self._status())
                cmd, trace = self._turn_command(
                    target, rel, yaw_rate, Direction.FORWARD, cfg.maneuver_speed
                )
                return BrainOutput(cmd, self._status(), fuzzy_trace=trace)
        else:
            # parallel slot: back up, swing the nose out, straighten
            if self.leave_phase == 0:
                self.leave_yaw_ref = frame.yaw
                self.leave_phase = 1
            if self.leave_phase == 1:
                if frame["BC"] <= cfg.leave_back_gap:
                    self.leave_phase = 2
                    return BrainOutput(DriveCommand(0.0, 0.0), self._status())
                return BrainOutput(DriveCommand(-cfg.creep_speed, 0.0), self._status())
            if self.leave_phase == 2:
                rel = normalize_angle(frame.yaw - self.leave_yaw_ref)
                target = -cfg.leave_exit_angle
                if abs(rel - target) <= cfg.heading_tol:
                    self.leave_phase = 3
                    return BrainOutput(DriveCommand(0.0, 0.0), self._status())
                cmd, trace = self._turn_command(
                    target, rel, yaw_rate, Direction.FORWARD, cfg.maneuver_speed
                )
                return BrainOutput(cmd, self._status(), fuzzy_trace=trace)
            if self.leave_phase == 3:
                rel = normalize_angle(frame.yaw - self.leave_yaw_ref)
                if abs(rel) <= cfg.heading_tol:
                    self.leave_phase = 4
                    return BrainOutput(DriveCommand(0.0, 0.0), self._status())
                cmd, trace = self._turn_command(
                    0.0, rel, yaw_rate, Direction.FORWARD, cfg.maneuver_speed
                )
                return BrainOutput(cmd, self._status(), fuzzy_trace=trace)

        # final stretch for both rows: wall-follow to the exit end of the lane
        if frame["FC"] <= cfg.exit_fc_threshold:
            self.state = mode_transition(self.state, EventKind.EXIT_REACHED)
            return BrainOutput(DriveCommand(0.0, 0.0), self._status())
        steer = self.posture.steer(frame, Direction.FORWARD)
        return BrainOutput(
            DriveCommand(cfg.search_speed, steer),
            self._status(),
            fuzzy_trace={"controller": "posture", "inputs": [frame["FR"], frame["BR"]], "output": steer},
        )

    # -- helpers --------------------------------------------------------------

    def _travel_direction(self, mode: Mode) -> Direction:
        if mode is Mode.PARKING and self.maneuver is not None and self.maneuver.phase > 0:
            return Direction.BACKWARD
        return Direction.FORWARD

    def _emergency_active(self, mode: Mode) -> bool:
        if mode is Mode.SEARCHING:
            return True
        if mode is Mode.LEAVING:
            # only on the wall-following stretch; the pull-out phases work
            # inside normal parking clearances
            if self.state.parked_row == VERTICAL_ROW:
                return self.leave_phase >= 3
            return self.leave_phase >= 4
        return False

    def _status(self) -> str:
        state = self.state
        if state.mode is Mode.SLEEP:
            return comms.STATUS_PARKED if state.parked else comms.STATUS_REQUEST
        if state.mode is Mode.PARKING:
            return (
                comms.STATUS_PARALLEL
                if state.maneuver is ManeuverKind.PARALLEL
                else comms.STATUS_VERTICAL
            )
        if state.mode is Mode.EMERGENCY_HOLD:
            prior = state.prior or Mode.SLEEP
            if prior is Mode.PARKING:
                return comms.STATUS_PARALLEL if state.maneuver is ManeuverKind.PARALLEL else comms.STATUS_VERTICAL
            return STATUS_BY_MODE.get(prior, comms.STATUS_REQUEST)
        return STATUS_BY_MODE.get(state.mode, comms.STATUS_REQUEST)
