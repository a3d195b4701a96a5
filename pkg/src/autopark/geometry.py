"""Scalar 2D geometry helpers: segments, oriented rectangles, ray casting.

Everything here is pure and allocation-light; the simulation loop calls these
once per sensor per tick, so plain tuples beat numpy arrays at this scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float]


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def rotate(p: Point, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    return (p[0] * c - p[1] * s, p[0] * s + p[1] * c)


@dataclass(frozen=True)
class Segment:
    ax: float
    ay: float
    bx: float
    by: float

    def length(self) -> float:
        return math.hypot(self.bx - self.ax, self.by - self.ay)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, used for slots and box obstacles."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> Point:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def corners(self) -> list[Point]:
        return [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]

    def edges(self) -> list[Segment]:
        cs = self.corners()
        return [Segment(*cs[i], *cs[(i + 1) % 4]) for i in range(4)]

    def contains_point(self, p: Point, slack: float = 0.0) -> bool:
        return (
            self.x_min - slack <= p[0] <= self.x_max + slack
            and self.y_min - slack <= p[1] <= self.y_max + slack
        )

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.x_max <= other.x_min
            or other.x_max <= self.x_min
            or self.y_max <= other.y_min
            or other.y_max <= self.y_min
        )


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle of size length x width centered at (cx, cy), rotated by heading."""

    cx: float
    cy: float
    length: float
    width: float
    heading: float

    def corners(self) -> list[Point]:
        hl, hw = self.length / 2.0, self.width / 2.0
        out = []
        for lx, ly in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)):
            rx, ry = rotate((lx, ly), self.heading)
            out.append((self.cx + rx, self.cy + ry))
        return out

    def edges(self) -> list[Segment]:
        cs = self.corners()
        return [Segment(*cs[i], *cs[(i + 1) % 4]) for i in range(4)]

    def contains_point(self, p: Point, slack: float = 0.0) -> bool:
        lx, ly = rotate((p[0] - self.cx, p[1] - self.cy), -self.heading)
        return abs(lx) <= self.length / 2.0 + slack and abs(ly) <= self.width / 2.0 + slack


def ray_segment_distance(
    ox: float, oy: float, dx: float, dy: float, seg: Segment
) -> float | None:
    """Distance along the unit ray (dx, dy) from (ox, oy) to seg, or None if missed."""
    ex, ey = seg.bx - seg.ax, seg.by - seg.ay
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-15:
        return None  # parallel; grazing hits are ignored
    qx, qy = seg.ax - ox, seg.ay - oy
    t = (qx * ey - qy * ex) / denom
    s = (qx * dy - qy * dx) / denom
    if t >= 0.0 and 0.0 <= s <= 1.0:
        return t
    return None


def _project(corners: list[Point], ax: float, ay: float) -> tuple[float, float]:
    vals = [c[0] * ax + c[1] * ay for c in corners]
    return min(vals), max(vals)


def convex_overlap(a: list[Point], b: list[Point]) -> bool:
    """Separating-axis overlap test for two convex polygons.

    Touching contact (shared edge or corner, zero overlap area) counts as
    separated, so tangency is not a collision.
    """
    for poly in (a, b):
        n = len(poly)
        for i in range(n):
            px, py = poly[i]
            qx, qy = poly[(i + 1) % n]
            ax, ay = -(qy - py), qx - px
            a_lo, a_hi = _project(a, ax, ay)
            b_lo, b_hi = _project(b, ax, ay)
            if a_hi <= b_lo or b_hi <= a_lo:
                return False
    return True


def polygon_in_rect(poly: list[Point], rect: Rect, slack: float = 0.0) -> bool:
    return all(rect.contains_point(p, slack) for p in poly)
