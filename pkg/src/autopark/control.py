"""The car's three fuzzy controllers and the slot scanner.

* posture: keeps the car wall-following at a set gap using the two right-side
  range sensors (gap error and front/back skew in, steering angle out).
* turn: fuzzy PD controller that tracks a relative-yaw set point during the
  reversing turns of both parking maneuvers.
* decision: classifies a measured slot (depth, length) into parallel parking,
  vertical parking, or continue searching.

Rule tables and default breakpoints ship with the scenario configuration; the
builders here only assemble controllers from that configuration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .fuzzy import (
    FuzzyController,
    MembershipFamily,
    RuleTable,
    SingletonOutputs,
    evaluate,
    fuzzify,
)
from .vehicle import VehicleParams
from .world import SensorFrame

FIVE_TERMS = ("NL", "NS", "ZO", "PS", "PL")

# Steering angle per (gap error, skew) cell.  Both inputs positive-large means
# the car sits too far off the wall and keeps drifting away, so steer hard
# toward it (positive = right = wall side).
POSTURE_RULES: dict[str, dict[str, str]] = {
    "NL": {"NL": "NL", "NS": "NL", "ZO": "NS", "PS": "NS", "PL": "ZO"},
    "NS": {"NL": "NL", "NS": "NS", "ZO": "NS", "PS": "ZO", "PL": "PS"},
    "ZO": {"NL": "NS", "NS": "NS", "ZO": "ZO", "PS": "PS", "PL": "PS"},
    "PS": {"NL": "NS", "NS": "ZO", "ZO": "PS", "PS": "PS", "PL": "PL"},
    "PL": {"NL": "ZO", "NS": "PS", "ZO": "PS", "PS": "PL", "PL": "PL"},
}

# Steering command per (angle error, error rate) cell: a saturated PD surface.
TURN_RULES: dict[str, dict[str, str]] = {
    "NL": {"NL": "NL", "NS": "NL", "ZO": "NL", "PS": "NS", "PL": "ZO"},
    "NS": {"NL": "NL", "NS": "NL", "ZO": "NS", "PS": "ZO", "PL": "PS"},
    "ZO": {"NL": "NL", "NS": "NS", "ZO": "ZO", "PS": "PS", "PL": "PL"},
    "PS": {"NL": "NS", "NS": "ZO", "ZO": "PS", "PS": "PL", "PL": "PL"},
    "PL": {"NL": "ZO", "NS": "PS", "ZO": "PL", "PS": "PL", "PL": "PL"},
}

# Slot-fit terms: UNFIT (too small), PFIT (parallel-sized), VFIT (vertical-sized).
UNFIT, PFIT, VFIT = "UNFIT", "PFIT", "VFIT"

# Action per (depth term, length term) cell.  Depth ordering is
# UNFIT < PFIT < VFIT (a vertically parked car needs the deeper slot), while
# along-lane length orders UNFIT < VFIT < PFIT (parallel needs the longer one).
DECISION_RULES: dict[str, dict[str, str]] = {
    UNFIT: {UNFIT: "C", VFIT: "C", PFIT: "C"},
    PFIT: {UNFIT: "C", VFIT: "C", PFIT: "P"},
    VFIT: {UNFIT: "C", VFIT: "V", PFIT: "V"},
}


class ParkAction(enum.Enum):
    PARALLEL = "P"
    VERTICAL = "V"
    CONTINUE = "C"


class Direction(enum.Enum):
    FORWARD = 1
    BACKWARD = -1


def posture_errors(
    frame: SensorFrame, direction: Direction, target_gap: float
) -> tuple[float, float]:
    """Wall-gap error and front/back skew from the right-side sensors.

    The leading sensor (FR going forward, BR in reverse) defines the gap; the
    skew is leading minus trailing, positive when the nose points away from
    the wall.
    """
    if direction is Direction.FORWARD:
        return frame["FR"] - target_gap, frame["FR"] - frame["BR"]
    return frame["BR"] - target_gap, frame["BR"] - frame["FR"]


@dataclass(frozen=True)
class PostureController:
    controller: FuzzyController
    target_gap: float

    def steer(self, frame: SensorFrame, direction: Direction) -> float:
        gap_error, skew = posture_errors(frame, direction, self.target_gap)
        return evaluate(self.controller, gap_error, skew)


@dataclass(frozen=True)
class TurnController:
    """Tracks a relative-yaw set point while the car reverses.

    The second fuzzy input is the rate of change of the error; with a constant
    set point that is the negated yaw rate.  The table's surface is stabilising
    for reversing motion; callers negate the command for forward turns.
    """

    controller: FuzzyController

    def steer(self, set_point: float, yaw: float, yaw_rate: float) -> float:
        error = set_point - yaw
        return evaluate(self.controller, error, -yaw_rate)


def steering_command(
    turn: TurnController,
    set_point: float,
    yaw: float,
    yaw_rate: float,
    direction: Direction,
    max_steer: float,
) -> float:
    """Direction-aware turn command clamped to the steering range."""
    raw = turn.steer(set_point, yaw, yaw_rate)
    if direction is Direction.FORWARD:
        raw = -raw
    return max(-max_steer, min(max_steer, raw))


def slot_length(
    count_delta: int, params: VehicleParams, circumference_coeff: float = math.pi
) -> float:
    """Along-lane slot extent from an encoder count difference.

    The travelled distance per revolution is coeff * wheel_diameter; the
    default coefficient pi is the plain circumference.
    """
    if count_delta < 0:
        raise ValueError("encoder count delta cannot be negative")
    revolutions = count_delta / params.encoder_counts_per_rev
    return circumference_coeff * params.wheel_diameter * revolutions


@dataclass(frozen=True)
class ParkingDecider:
    depth_family: MembershipFamily
    length_family: MembershipFamily
    rules: RuleTable

    def decide(self, depth: float, length: float) -> ParkAction:
        """Argmax over rule activations; any tie falls back to continue searching."""
        mu_d = fuzzify(depth, self.depth_family)
        mu_l = fuzzify(length, self.length_family)
        activation = {"P": 0.0, "V": 0.0, "C": 0.0}
        for ld, wd in mu_d.items():
            if wd == 0.0:
                continue
            for ll, wl in mu_l.items():
                if wl == 0.0:
                    continue
                strength = min(wd, wl)
                action = self.rules.cells[(ld, ll)]
                activation[action] = max(activation[action], strength)
        best = max(activation.values())
        winners = [a for a, w in activation.items() if w == best]
        if len(winners) > 1 or best == 0.0:
            return ParkAction.CONTINUE
        return ParkAction(winners[0])


@dataclass(frozen=True)
class SlotCandidate:
    """One measured open stretch along the slot row."""

    depth: float
    length: float
    start_travel: float  # encoder distance at the opening edge
    end_travel: float    # encoder distance at the closing edge


@dataclass
class SlotScanner:
    """Edge detector over the front-left sensor while searching.

    An open stretch starts when the reading switches from small to large and
    ends on the opposite switch; the slot depth is the smallest open reading
    minus the configured lane offset and the length comes from the encoder
    travel between the two edges.  The stretch before the first small reading
    is ignored so open space at the lot entrance cannot masquerade as a slot.
    """

    edge_threshold: float
    hysteresis: float
    depth_offset: float
    open_: bool = False
    seen_closed: bool = False
    start_travel: float = 0.0
    min_open_reading: float = float("inf")

    def update(self, fl_reading: float, travel: float) -> SlotCandidate | None:
        if not self.open_:
            if fl_reading < self.edge_threshold - self.hysteresis:
                self.seen_closed = True
            elif fl_reading > self.edge_threshold + self.hysteresis and self.seen_closed:
                self.open_ = True
                self.start_travel = travel
                self.min_open_reading = fl_reading
            return None
        if fl_reading > self.edge_threshold + self.hysteresis:
            self.min_open_reading = min(self.min_open_reading, fl_reading)
            return None
        if fl_reading < self.edge_threshold - self.hysteresis:
            self.open_ = False
            candidate = SlotCandidate(
                depth=max(0.0, self.min_open_reading - self.depth_offset),
                length=travel - self.start_travel,
                start_travel=self.start_travel,
                end_travel=travel,
            )
            self.min_open_reading = float("inf")
            return candidate
        return None  # inside the hysteresis band; hold state


def make_five_term_controller(
    breakpoints_a: tuple[float, ...],
    universe_a: tuple[float, float],
    breakpoints_b: tuple[float, ...],
    universe_b: tuple[float, float],
    output_values: tuple[float, ...],
    rules: dict[str, dict[str, str]],
) -> FuzzyController:
    return FuzzyController(
        input_a=MembershipFamily(FIVE_TERMS, breakpoints_a, universe_a),
        input_b=MembershipFamily(FIVE_TERMS, breakpoints_b, universe_b),
        rules=RuleTable.from_rows(rules),
        outputs=SingletonOutputs(FIVE_TERMS, output_values),
    )
