"""Desk-scale simulator of a fuzzy-controlled self-parking car.

The package splits into the onboard stack (fuzzy, control, brain), the world
(vehicle, world, geometry), the radio link (comms), the control room (center),
and the harness (scenario, sim, service, cli).
"""

from .brain import CarBrain, EventKind, ManeuverKind, Mode, ModeState, mode_transition
from .comms import ChannelModel, Packet, decode, encode
from .control import (
    Direction,
    ParkAction,
    ParkingDecider,
    PostureController,
    SlotScanner,
    TurnController,
    posture_errors,
    slot_length,
)
from .fuzzy import (
    FuzzyController,
    InferenceError,
    MembershipFamily,
    RuleTable,
    SingletonOutputs,
    defuzzify,
    evaluate,
    fuzzify,
    infer,
)
from .scenario import Scenario, ScenarioError, bundled_names, load_scenario
from .sim import RunResult, Simulation, lifecycle_codes, run_scenario
from .vehicle import DriveCommand, VehicleParams, VehicleState, footprint, step
from .world import ParkingLot, SensorFrame, SensorRig, Slot, collision, raycast, sample_frame

__version__ = "0.1.0"

__all__ = [
    "CarBrain", "ChannelModel", "Direction", "DriveCommand", "EventKind",
    "FuzzyController", "InferenceError", "ManeuverKind", "MembershipFamily",
    "Mode", "ModeState", "Packet", "ParkAction", "ParkingDecider", "ParkingLot",
    "PostureController", "RuleTable", "RunResult", "Scenario", "ScenarioError",
    "SensorFrame", "SensorRig", "Simulation", "SingletonOutputs", "Slot",
    "SlotScanner", "TurnController", "VehicleParams", "VehicleState",
    "bundled_names", "collision", "decode", "defuzzify", "encode", "evaluate",
    "footprint", "fuzzify", "infer", "lifecycle_codes", "load_scenario",
    "mode_transition", "posture_errors", "raycast", "run_scenario",
    "sample_frame", "slot_length", "step",
]
