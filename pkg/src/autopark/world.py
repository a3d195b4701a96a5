"""Parking-lot world model and the simulated sensor suite.

The lot is a set of wall segments, slot rectangles and box obstacles; parked
cars occupying slots are solid rectangles.  The car senses it through six
ray-cast range sensors (front/back center, front/back left, front/back right),
a wheel encoder, a yaw reading relative to the last reset, and a scripted
shake flag standing in for the motion sensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    OrientedRect,
    Rect,
    Segment,
    convex_overlap,
    normalize_angle,
    ray_segment_distance,
    rotate,
)
from .vehicle import VehicleParams, VehicleState, footprint

SENSOR_LABELS = ("FC", "BC", "FL", "BL", "FR", "BR")

PARALLEL_ROW = "parallel-row"
VERTICAL_ROW = "vertical-row"


@dataclass(frozen=True)
class Slot:
    slot_id: int
    rect: Rect
    row: str  # PARALLEL_ROW or VERTICAL_ROW
    occupied: bool = False

    def parked_car_rect(self, params: VehicleParams) -> OrientedRect:
        """Footprint of a car parked dead-center, oriented to match the row."""
        cx, cy = self.rect.center
        if self.row == VERTICAL_ROW:
            # nose toward the lane; body length runs along the slot depth
            return OrientedRect(cx, cy, params.body_length, params.body_width, -math.pi / 2)
        return OrientedRect(cx, cy, params.body_length, params.body_width, 0.0)


@dataclass(frozen=True)
class Obstacle:
    obstacle_id: str
    rect: Rect


@dataclass
class ParkingLot:
    size: tuple[float, float] = (3.0, 2.5)
    walls: list[Segment] = field(default_factory=list)
    slots: list[Slot] = field(default_factory=list)
    obstacles: list[Obstacle] = field(default_factory=list)
    entrance: tuple[float, float, float] = (0.25, 0.24, 0.0)
    exit_pose: tuple[float, float, float] = (2.80, 0.24, 0.0)
    lane_y: tuple[float, float] = (0.0, 0.45)

    def __post_init__(self) -> None:
        if not self.walls:
            w, h = self.size
            self.walls = [
                Segment(0.0, 0.0, w, 0.0),
                Segment(w, 0.0, w, h),
                Segment(w, h, 0.0, h),
                Segment(0.0, h, 0.0, 0.0),
            ]
        self.validate()

    def validate(self) -> None:
        w, h = self.size
        for label, pose in (("entrance", self.entrance), ("exit", self.exit_pose)):
            if not (0.0 <= pose[0] <= w and 0.0 <= pose[1] <= h):
                raise ValueError(f"{label} pose {pose[:2]} outside the lot bounds")
        for i, a in enumerate(self.slots):
            for b in self.slots[i + 1:]:
                if a.rect.overlaps(b.rect):
                    raise ValueError(f"slots {a.slot_id} and {b.slot_id} overlap")
        lane_top = self.lane_y[1]
        for s in self.slots:
            if s.rect.y_min < lane_top - 1e-9:
                raise ValueError(
                    f"slot {s.slot_id} is not on the left of the lane direction"
                )

    def slot_by_id(self, slot_id: int) -> Slot:
        for s in self.slots:
            if s.slot_id == slot_id:
                return s
        raise KeyError(f"no slot with id {slot_id}")

    def set_occupied(self, slot_id: int, occupied: bool) -> None:
        self.slots = [
            replace(s, occupied=occupied) if s.slot_id == slot_id else s
            for s in self.slots
        ]
        self._invalidate()

    def add_obstacle(self, obstacle: Obstacle) -> None:
        self.obstacles.append(obstacle)
        self._invalidate()

    def remove_obstacle(self, obstacle_id: str) -> None:
        self.obstacles = [o for o in self.obstacles if o.obstacle_id != obstacle_id]
        self._invalidate()

    def _invalidate(self) -> None:
        self._segment_cache = None
        self._polygon_cache = None

    def solid_segments(self, params: VehicleParams) -> list[Segment]:
        """Every segment a sensor ray can hit: walls, obstacles, parked cars."""
        cache = getattr(self, "_segment_cache", None)
        if cache is not None:
            return cache
        segs = list(self.walls)
        for o in self.obstacles:
            segs.extend(o.rect.edges())
        for s in self.slots:
            if s.occupied:
                segs.extend(s.parked_car_rect(params).edges())
        self._segment_cache = segs
        return segs

    def solid_polygons(self, params: VehicleParams) -> list[list[tuple[float, float]]]:
        cache = getattr(self, "_polygon_cache", None)
        if cache is not None:
            return cache
        polys = [o.rect.corners() for o in self.obstacles]
        polys.extend(
            s.parked_car_rect(params).corners() for s in self.slots if s.occupied
        )
        self._polygon_cache = polys
        return polys


@dataclass(frozen=True)
class SensorMount:
    label: str
    offset: tuple[float, float]  # body frame, x forward, y left
    direction: float             # ray bearing in the body frame


@dataclass(frozen=True)
class SensorRig:
    mounts: tuple[SensorMount, ...]
    max_range: float = 0.8
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        labels = tuple(m.label for m in self.mounts)
        if sorted(labels) != sorted(SENSOR_LABELS):
            raise ValueError(f"rig must mount exactly {SENSOR_LABELS}, got {labels}")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")


def default_rig(
    params: VehicleParams,
    max_range: float = 0.8,
    noise_sigma: float = 0.0,
    side_mount_x: float = 0.09,
) -> SensorRig:
    hl = params.body_length / 2.0
    hx = side_mount_x  # side sensors sit near the body corners
    hw = params.body_width / 2.0
    left, right = math.pi / 2, -math.pi / 2
    return SensorRig(
        mounts=(
            SensorMount("FC", (hl, 0.0), 0.0),
            SensorMount("BC", (-hl, 0.0), math.pi),
            SensorMount("FL", (hx, hw), left),
            SensorMount("BL", (-hx, hw), left),
            SensorMount("FR", (hx, -hw), right),
            SensorMount("BR", (-hx, -hw), right),
        ),
        max_range=max_range,
        noise_sigma=noise_sigma,
    )


@dataclass(frozen=True)
class SensorFrame:
    distances: dict[str, float]
    encoder_count: int
    yaw: float
    shake_event: bool = False

    def __getitem__(self, label: str) -> float:
        return self.distances[label]


@dataclass
class SensorState:
    """Mutable per-run sensor bookkeeping: encoder accumulator and yaw reference."""

    encoder_distance: float = 0.0
    yaw_reference: float = 0.0

    def advance(self, speed: float, dt: float) -> None:
        self.encoder_distance += abs(speed) * dt

    def reset_encoder(self) -> None:
        self.encoder_distance = 0.0

    def reset_yaw(self, heading: float) -> None:
        self.yaw_reference = heading

    def encoder_count(self, params: VehicleParams) -> int:
        revs = self.encoder_distance / params.wheel_circumference
        return int(math.floor(revs * params.encoder_counts_per_rev))


def raycast(
    lot: ParkingLot,
    params: VehicleParams,
    origin: tuple[float, float],
    direction: tuple[float, float],
    max_range: float,
    sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> float:
    """Distance to the nearest solid surface along a unit ray, capped at max_range."""
    best = max_range
    ox, oy = origin
    dx, dy = direction
    for seg in lot.solid_segments(params):
        d = ray_segment_distance(ox, oy, dx, dy, seg)
        if d is not None and d < best:
            best = d
    if sigma > 0.0 and rng is not None:
        best += sigma * rng.standard_normal()
        best = min(max(best, 1e-6), max_range)
    return best


def sample_frame(
    lot: ParkingLot,
    state: VehicleState,
    params: VehicleParams,
    rig: SensorRig,
    sensors: SensorState,
    rng: np.random.Generator | None = None,
    shake_event: bool = False,
) -> SensorFrame:
    """Cast all six rays from the current pose and read encoder/yaw."""
    distances: dict[str, float] = {}
    for mount in rig.mounts:
        off = rotate(mount.offset, state.heading)
        origin = (state.x + off[0], state.y + off[1])
        bearing = state.heading + mount.direction
        direction = (math.cos(bearing), math.sin(bearing))
        distances[mount.label] = raycast(
            lot, params, origin, direction, rig.max_range, rig.noise_sigma, rng
        )
    return SensorFrame(
        distances=distances,
        encoder_count=sensors.encoder_count(params),
        yaw=normalize_angle(state.heading - sensors.yaw_reference),
        shake_event=shake_event,
    )


def collision(lot: ParkingLot, params: VehicleParams, body: OrientedRect) -> bool:
    """True iff the body rectangle overlaps a wall, obstacle or parked car.

    Contact with zero overlap area does not count (separating-axis semantics).
    """
    corners = body.corners()
    w, h = lot.size
    for cx, cy in corners:
        if cx < 0.0 or cx > w or cy < 0.0 or cy > h:
            return True
    for seg in lot.walls:
        if _segment_crosses(body, seg):
            return True
    for poly in lot.solid_polygons(params):
        if convex_overlap(corners, poly):
            return True
    return False


def _segment_crosses(body: OrientedRect, seg: Segment) -> bool:
    # treat the wall segment as a degenerate polygon via midpoint containment
    # plus proper edge intersection against the body edges
    if body.contains_point(((seg.ax + seg.bx) / 2, (seg.ay + seg.by) / 2), slack=-1e-12):
        return True
    for edge in body.edges():
        if _segments_properly_intersect(edge, seg):
            return True
    return False


def _segments_properly_intersect(a: Segment, b: Segment) -> bool:
    def orient(px, py, qx, qy, rx, ry) -> float:
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    d1 = orient(b.ax, b.ay, b.bx, b.by, a.ax, a.ay)
    d2 = orient(b.ax, b.ay, b.bx, b.by, a.bx, a.by)
    d3 = orient(a.ax, a.ay, a.bx, a.by, b.ax, b.ay)
    d4 = orient(a.ax, a.ay, a.bx, a.by, b.bx, b.by)
    return ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    )


def vehicle_collides(lot: ParkingLot, params: VehicleParams, state: VehicleState) -> bool:
    return collision(lot, params, footprint(state, params))
