"""Kinematic bicycle model of the 1:14 model car.

Sign convention follows the controller design: positive steering turns the
front wheels to the right, so the heading rate is -(v / wheelbase) * tan(phi)
in a standard x-east / y-north world frame.  Position integrates with the
midpoint heading, which keeps constant-steer paths on exact circles and makes
forward/backward stepping time-reversible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import OrientedRect, normalize_angle


@dataclass(frozen=True)
class VehicleParams:
    body_length: float = 0.220
    body_width: float = 0.180
    wheelbase: float = 0.150  # not given by the prototype's specs; assumed
    max_steer: float = math.radians(30.0)
    max_speed: float = 0.25
    wheel_diameter: float = 0.050
    encoder_counts_per_rev: int = 512
    steer_rate: float = math.radians(90.0)  # rad/s toward the steering target
    accel: float = 0.5                      # m/s^2 toward the speed target

    def __post_init__(self) -> None:
        for name in ("body_length", "body_width", "wheelbase", "max_steer",
                     "max_speed", "wheel_diameter", "steer_rate", "accel"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.encoder_counts_per_rev <= 0:
            raise ValueError("encoder_counts_per_rev must be positive")
        if self.wheelbase >= self.body_length:
            raise ValueError("wheelbase must be shorter than the body")
        if self.max_steer >= math.pi / 2:
            raise ValueError("max_steer must stay below 90 degrees")

    @property
    def wheel_circumference(self) -> float:
        return math.pi * self.wheel_diameter


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    speed: float = 0.0       # signed, negative = reverse
    steer: float = 0.0       # positive = front wheels to the right


@dataclass(frozen=True)
class DriveCommand:
    target_speed: float = 0.0
    target_steer: float = 0.0


def _slew(current: float, target: float, rate: float, dt: float) -> float:
    step = rate * dt
    if target > current + step:
        return current + step
    if target < current - step:
        return current - step
    return target


def step(
    state: VehicleState,
    command: DriveCommand,
    params: VehicleParams,
    dt: float,
    rate_limits: bool = True,
) -> VehicleState:
    """Advance one fixed time step; actuators slew toward targets first."""
    if not (0.0 < dt <= 0.05):
        raise ValueError(f"dt must be in (0, 0.05] s, got {dt}")
    if not (math.isfinite(command.target_speed) and math.isfinite(command.target_steer)):
        raise ValueError("non-finite drive command")

    target_speed = max(-params.max_speed, min(params.max_speed, command.target_speed))
    target_steer = max(-params.max_steer, min(params.max_steer, command.target_steer))
    if rate_limits:
        speed = _slew(state.speed, target_speed, params.accel, dt)
        steer = _slew(state.steer, target_steer, params.steer_rate, dt)
    else:
        speed = target_speed
        steer = target_steer

    dtheta = -(speed / params.wheelbase) * math.tan(steer) * dt
    mid = state.heading + dtheta / 2.0
    x = state.x + speed * math.cos(mid) * dt
    y = state.y + speed * math.sin(mid) * dt
    heading = normalize_angle(state.heading + dtheta)
    return VehicleState(x=x, y=y, heading=heading, speed=speed, steer=steer)


def footprint(state: VehicleState, params: VehicleParams) -> OrientedRect:
    """Body rectangle centered on the kinematic reference point."""
    return OrientedRect(
        cx=state.x,
        cy=state.y,
        length=params.body_length,
        width=params.body_width,
        heading=state.heading,
    )


def stop(state: VehicleState) -> VehicleState:
    return replace(state, speed=0.0)
