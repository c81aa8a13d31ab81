"""Planar primitives shared by the world model and the planner.

Axis-aligned rectangles and disks only.  Containment is half-open
([x0, x1) x [y0, y1)) so that tilings assign every point to exactly
one cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def norm_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    theta = math.fmod(theta + math.pi, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    return theta - math.pi


@dataclass
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"degenerate rect {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, x: float, y: float) -> bool:
        # Half-open: low edges inclusive, high edges exclusive.
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def contains_closed(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def inset(self, d: float) -> Rect:
        """Shrink by d on every side; collapses to the center if too small."""
        if self.width < 2 * d or self.height < 2 * d:
            cx, cy = self.center
            return Rect(cx, cy, cx, cy)
        return Rect(self.x0 + d, self.y0 + d, self.x1 - d, self.y1 - d)

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, self.x0), self.x1), min(max(y, self.y0), self.y1))

    def distance_to(self, x: float, y: float) -> float:
        dx = max(self.x0 - x, 0.0, x - self.x1)
        dy = max(self.y0 - y, 0.0, y - self.y1)
        return math.hypot(dx, dy)

    def overlaps(self, other: Rect) -> bool:
        return (self.x0 < other.x1 and other.x0 < self.x1
                and self.y0 < other.y1 and other.y0 < self.y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def segment_crosses_rect(ax: float, ay: float, bx: float, by: float, r: Rect) -> bool:
    """True iff the open segment a-b passes through the interior of r.

    Liang-Barsky clipping against the closed box, then a strict-interior
    test on the clipped midpoint so that sliding along an edge or touching
    a corner does not count as crossing.
    """
    dx = bx - ax
    dy = by - ay
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, ax - r.x0), (dx, r.x1 - ax), (-dy, ay - r.y0), (dy, r.y1 - ay)):
        if p == 0.0:
            if q < 0.0:
                return False
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return False
            if t > t0:
                t0 = t
        else:
            if t < t0:
                return False
            if t < t1:
                t1 = t
    if t1 - t0 <= 1e-12:
        return False
    tm = 0.5 * (t0 + t1)
    mx = ax + tm * dx
    my = ay + tm * dy
    return r.x0 < mx < r.x1 and r.y0 < my < r.y1


def segment_point_distance(ax: float, ay: float, bx: float, by: float,
                           px: float, py: float) -> float:
    dx = bx - ax
    dy = by - ay
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / ll
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segment_crosses_disk(ax: float, ay: float, bx: float, by: float,
                         cx: float, cy: float, radius: float) -> bool:
    """True iff the segment passes strictly inside the disk (tangency is clear)."""
    return segment_point_distance(ax, ay, bx, by, cx, cy) < radius


def segment_rect_distance(ax: float, ay: float, bx: float, by: float, r: Rect) -> float:
    """Euclidean distance between a segment and a (closed) rectangle."""
    if segment_crosses_rect(ax, ay, bx, by, r):
        return 0.0
    if r.contains_closed(ax, ay) or r.contains_closed(bx, by):
        return 0.0
    best = math.inf
    corners = ((r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1))
    for i in range(4):
        cx0, cy0 = corners[i]
        cx1, cy1 = corners[(i + 1) % 4]
        d = _segment_segment_distance(ax, ay, bx, by, cx0, cy0, cx1, cy1)
        if d < best:
            best = d
    return best


def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    def orient(ox, oy, px, py, qx, qy):
        v = (px - ox) * (qy - oy) - (py - oy) * (qx - ox)
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1 = orient(ax, ay, bx, by, cx, cy)
    o2 = orient(ax, ay, bx, by, dx, dy)
    o3 = orient(cx, cy, dx, dy, ax, ay)
    o4 = orient(cx, cy, dx, dy, bx, by)
    return o1 != o2 and o3 != o4


def _segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    if _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return min(
        segment_point_distance(ax, ay, bx, by, cx, cy),
        segment_point_distance(ax, ay, bx, by, dx, dy),
        segment_point_distance(cx, cy, dx, dy, ax, ay),
        segment_point_distance(cx, cy, dx, dy, bx, by),
    )
