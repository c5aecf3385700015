"""Exact-sign geometric primitives shared by every other module.

Coordinates are plain ``(x, y)`` float tuples.  Orientation signs are exact:
a fast floating-point filter decides almost every call and the rest are
re-evaluated in rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

Coord = tuple[float, float]

# Shewchuk's static bound for the orient2d filter: (3 + 16 eps) eps.
_CCW_ERRBOUND = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


class GeometryError(ValueError):
    """Raised for invalid or degenerate geometric input."""


class Orientation(IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


class VertexClass(Enum):
    CONVEX = "convex"
    REFLEX = "reflex"


class Point(NamedTuple):
    x: float
    y: float

    @classmethod
    def of(cls, x: float, y: float) -> "Point":
        """Build a point, rejecting NaN and infinite coordinates."""
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite coordinate ({x}, {y})")
        return cls(x, y)


def check_finite(coords: Iterable[Sequence[float]]) -> list[Coord]:
    out = []
    for c in coords:
        x, y = float(c[0]), float(c[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite coordinate ({x}, {y})")
        out.append((x, y))
    return out


def orient2d(p: Sequence[float], q: Sequence[float], r: Sequence[float]) -> int:
    """Exact sign of the cross product (q - p) x (r - p)."""
    detleft = (q[0] - p[0]) * (r[1] - p[1])
    detright = (q[1] - p[1]) * (r[0] - p[0])
    det = detleft - detright
    bound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    px, py = Fraction(p[0]), Fraction(p[1])
    exact = (Fraction(q[0]) - px) * (Fraction(r[1]) - py) - (Fraction(q[1]) - py) * (
        Fraction(r[0]) - px
    )
    return (exact > 0) - (exact < 0)


def orientation(p: Sequence[float], q: Sequence[float], r: Sequence[float]) -> Orientation:
    return Orientation(orient2d(p, q, r))


def signed_area(ring: Sequence[Coord]) -> float:
    """Shoelace area, positive for counter-clockwise rings (ring not closed)."""
    n = len(ring)
    if n < 3:
        return 0.0
    x0, y0 = ring[0]
    terms = []
    for i in range(1, n - 1):
        ax, ay = ring[i][0] - x0, ring[i][1] - y0
        bx, by = ring[i + 1][0] - x0, ring[i + 1][1] - y0
        terms.append(ax * by - ay * bx)
    return 0.5 * math.fsum(terms)


def open_ring(coords: Sequence[Sequence[float]]) -> list[Coord]:
    """Drop the closing vertex and consecutive duplicates."""
    pts = [(float(c[0]), float(c[1])) for c in coords]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    out: list[Coord] = []
    for p in pts:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def path_length(path: Sequence[Coord]) -> float:
    return math.fsum(math.dist(path[i], path[i + 1]) for i in range(len(path) - 1))


def on_segment(p: Coord, a: Coord, b: Coord) -> bool:
    """True if p lies on the closed segment ab (exact)."""
    if orient2d(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(
        a[1], b[1]
    )


def strictly_inside_segment(p: Coord, a: Coord, b: Coord) -> bool:
    return p != a and p != b and on_segment(p, a, b)


class SegmentIntersection(NamedTuple):
    kind: str  # "empty", "point" or "overlap"
    geometry: tuple


EMPTY = SegmentIntersection("empty", ())


def segment_intersection(s1: Sequence[Coord], s2: Sequence[Coord]) -> SegmentIntersection:
    """Classify the intersection of two closed segments.

    The classification is exact; a crossing point of two properly crossing
    segments is computed in floating point.
    """
    a, b = s1
    c, d = s2
    o1 = orient2d(a, b, c)
    o2 = orient2d(a, b, d)
    o3 = orient2d(c, d, a)
    o4 = orient2d(c, d, b)
    if o1 == 0 and o2 == 0:
        # collinear: project onto the dominant axis
        axis = 0 if abs(b[0] - a[0]) >= abs(b[1] - a[1]) else 1
        if a == b:
            axis = 0 if abs(d[0] - c[0]) >= abs(d[1] - c[1]) else 1
        p1, p2 = sorted((a, b), key=lambda p: p[axis])
        q1, q2 = sorted((c, d), key=lambda p: p[axis])
        lo = p1 if p1[axis] >= q1[axis] else q1
        hi = p2 if p2[axis] <= q2[axis] else q2
        if lo[axis] > hi[axis]:
            return EMPTY
        if lo == hi or lo[axis] == hi[axis]:
            return SegmentIntersection("point", (lo,))
        return SegmentIntersection("overlap", (lo, hi))
    if o1 * o2 > 0 or o3 * o4 > 0:
        return EMPTY
    # touching at an endpoint
    if o1 == 0:
        return SegmentIntersection("point", (c,))
    if o2 == 0:
        return SegmentIntersection("point", (d,))
    if o3 == 0:
        return SegmentIntersection("point", (a,))
    if o4 == 0:
        return SegmentIntersection("point", (b,))
    return SegmentIntersection("point", (line_intersection(a, b, c, d),))


def line_intersection(a: Coord, b: Coord, c: Coord, d: Coord) -> Coord:
    """Intersection of the lines through ab and cd (not parallel)."""
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = d[0] - c[0], d[1] - c[1]
    denom = rx * sy - ry * sx
    if denom == 0.0:
        raise GeometryError("parallel lines have no unique intersection")
    t = ((c[0] - a[0]) * sy - (c[1] - a[1]) * sx) / denom
    return (a[0] + t * rx, a[1] + t * ry)


def segments_cross_properly(a: Coord, b: Coord, c: Coord, d: Coord) -> bool:
    o1 = orient2d(a, b, c)
    o2 = orient2d(a, b, d)
    if o1 * o2 >= 0:
        return False
    o3 = orient2d(c, d, a)
    o4 = orient2d(c, d, b)
    return o3 * o4 < 0


def point_segment_distance(p: Coord, a: Coord, b: Coord) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.dist(p, a)
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def segment_distance(a: Coord, b: Coord, c: Coord, d: Coord) -> float:
    if segment_intersection((a, b), (c, d)).kind != "empty":
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def interior_angle(ring: Sequence[Coord], k: int) -> float:
    """Interior angle at vertex k of a counter-clockwise ring, in (0, 2*pi)."""
    n = len(ring)
    v = ring[k]
    nxt = ring[(k + 1) % n]
    prv = ring[(k - 1) % n]
    a_next = math.atan2(nxt[1] - v[1], nxt[0] - v[0])
    a_prev = math.atan2(prv[1] - v[1], prv[0] - v[0])
    theta = (a_prev - a_next) % (2.0 * math.pi)
    if theta == 0.0:
        raise GeometryError(f"zero interior angle at vertex {k}")
    return theta


def classify_vertex(ring: Sequence[Coord], k: int) -> VertexClass:
    """Convex iff the interior angle is below pi; a straight angle is reflex."""
    n = len(ring)
    if not 0 <= k < n:
        raise IndexError(f"vertex {k} out of range for a ring of {n}")
    prv, v, nxt = ring[(k - 1) % n], ring[k], ring[(k + 1) % n]
    o = orient2d(prv, v, nxt)
    if o > 0:
        return VertexClass.CONVEX
    if o < 0:
        return VertexClass.REFLEX
    dot = (prv[0] - v[0]) * (nxt[0] - v[0]) + (prv[1] - v[1]) * (nxt[1] - v[1])
    if dot < 0:
        return VertexClass.REFLEX
    raise GeometryError(f"spike (zero angle) at vertex {k}")


def incenter(tri: Sequence[Coord]) -> Coord:
    """(a*A + b*B + c*C) / (a + b + c) with a, b, c the opposite side lengths."""
    A, B, C = tri
    a = math.dist(B, C)
    b = math.dist(A, C)
    c = math.dist(A, B)
    s = a + b + c
    if s == 0.0 or orient2d(A, B, C) == 0:
        raise GeometryError("degenerate triangle has no incenter")
    return ((a * A[0] + b * B[0] + c * C[0]) / s, (a * A[1] + b * B[1] + c * C[1]) / s)


def angle_bisector_ray(ring: Sequence[Coord], k: int) -> tuple[Coord, Coord]:
    """Origin and unit direction of the interior angle bisector at vertex k."""
    n = len(ring)
    v = ring[k]
    nxt = ring[(k + 1) % n]
    theta = interior_angle(ring, k)
    a_next = math.atan2(nxt[1] - v[1], nxt[0] - v[0])
    phi = a_next + 0.5 * theta
    return v, (math.cos(phi), math.sin(phi))


def is_simple_ring(ring: Sequence[Coord]) -> bool:
    """Exact O(n^2) simplicity test for an open ring."""
    n = len(ring)
    if n < 3 or len(set(ring)) != n:
        return False
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            inter = segment_intersection(edges[i], edges[j])
            if inter.kind == "empty":
                continue
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if not adjacent or inter.kind == "overlap":
                return False
            shared = edges[i][1] if j == i + 1 else edges[i][0]
            if inter.geometry[0] != shared:
                return False
    return signed_area(ring) != 0.0


@dataclass(frozen=True)
class Ring:
    """A validated simple ring, stored open and counter-clockwise."""

    coords: tuple[Coord, ...]

    def __post_init__(self) -> None:
        pts = open_ring(check_finite(self.coords))
        if len(pts) < 3:
            raise GeometryError("a ring needs at least 3 distinct vertices")
        if not is_simple_ring(pts):
            raise GeometryError("ring is not simple")
        if signed_area(pts) < 0:
            pts.reverse()
        object.__setattr__(self, "coords", tuple(pts))

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, k: int) -> Coord:
        return self.coords[k]

    @property
    def area(self) -> float:
        return signed_area(self.coords)
