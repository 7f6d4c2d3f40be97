"""Planar geometry primitives: local metric frame, polygon tests, loop cleanup.

All polygon vertices are (x, y) tuples in meters. Closed loops are stored
open (no repeated last vertex); counter-clockwise means signed area > 0.
"""

from __future__ import annotations

import math

# Meters per degree for the equirectangular local frame.
M_PER_DEG_LON_EQUATOR = 111_320.0
M_PER_DEG_LAT = 110_540.0

Point = tuple[float, float]


class LocalFrame:
    """Equirectangular projection anchored at (lon0, lat0).

    x points east, y points north, both in meters. Adequate below ~20 km
    extents; exactly invertible up to float rounding.
    """

    def __init__(self, lon0: float, lat0: float):
        self.lon0 = lon0
        self.lat0 = lat0
        self._mx = math.cos(math.radians(lat0)) * M_PER_DEG_LON_EQUATOR
        self._my = M_PER_DEG_LAT

    def to_local(self, lon: float, lat: float) -> Point:
        return ((lon - self.lon0) * self._mx, (lat - self.lat0) * self._my)

    def to_lonlat(self, x: float, y: float) -> Point:
        return (self.lon0 + x / self._mx, self.lat0 + y / self._my)


def signed_area(vertices: list[Point]) -> float:
    """Shoelace signed area; positive for counter-clockwise loops."""
    n = len(vertices)
    acc = 0.0
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return 0.5 * acc


def ensure_ccw(vertices: list[Point]) -> list[Point]:
    return vertices if signed_area(vertices) >= 0 else vertices[::-1]


def _on_segment(p: Point, a: Point, b: Point, eps: float = 1e-9) -> bool:
    """True if p lies on segment ab (inclusive), within eps of collinearity."""
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    scale = max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1]))
    if abs(cross) > eps * scale:
        return False
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def point_in_polygon(p: Point, vertices: list[Point]) -> bool:
    """Boundary-inclusive point-in-polygon (ray casting + edge test)."""
    n = len(vertices)
    if n < 3:
        return False
    for i in range(n):
        if _on_segment(p, vertices[i], vertices[(i + 1) % n]):
            return True
    px, py = p
    inside = False
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        if (y1 > py) != (y2 > py):
            x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < x_cross:
                inside = not inside
        x1, y1 = x2, y2
    return inside


def segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Point | None:
    """Proper-crossing intersection point of ab and cd, else None.

    Touching endpoints and collinear overlaps report no crossing; loop
    cleanup handles those through duplicate removal.
    """
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0.0:
        return None
    qp = (c[0] - a[0], c[1] - a[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if 0.0 < t < 1.0 and 0.0 < u < 1.0:
        return (a[0] + t * r[0], a[1] + t * r[1])
    return None


def is_simple(vertices: list[Point]) -> bool:
    """O(n^2) self-intersection check over non-adjacent segment pairs."""
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent through the wraparound
            c, d = vertices[j], vertices[(j + 1) % n]
            if segment_intersection(a, b, c, d) is not None:
                return False
    return True


def dedupe_vertices(vertices: list[Point], eps: float = 1e-9) -> list[Point]:
    """Drop consecutive (and wraparound) duplicate vertices."""
    out: list[Point] = []
    for v in vertices:
        if not out or abs(v[0] - out[-1][0]) > eps or abs(v[1] - out[-1][1]) > eps:
            out.append(v)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= eps and abs(out[0][1] - out[-1][1]) <= eps:
        out.pop()
    return out


def prune_loops(vertices: list[Point]) -> list[Point]:
    """Reduce a possibly self-intersecting loop to its largest simple sub-loop.

    Splits at each proper self-crossing, keeps the larger-area piece, and
    repeats until no crossing remains. Output is CCW with duplicate
    vertices removed; already-simple input passes through unchanged.
    """
    verts = dedupe_vertices(list(vertices))
    guard = 0
    while len(verts) > 3 and guard < 1000:
        guard += 1
        # Orient before scanning: proper-crossing tests are float-sensitive,
        # so the emitted orientation must be the one that was checked.
        verts = ensure_ccw(verts)
        crossing = None
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                c, d = verts[j], verts[(j + 1) % n]
                x = segment_intersection(a, b, c, d)
                if x is not None:
                    crossing = (i, j, x)
                    break
            if crossing:
                break
        if crossing is None:
            break
        i, j, x = crossing
        loop_a = [x] + verts[i + 1 : j + 1]
        loop_b = [x] + verts[j + 1 :] + verts[: i + 1]
        verts = loop_a if abs(signed_area(loop_a)) >= abs(signed_area(loop_b)) else loop_b
        verts = dedupe_vertices(verts)
    return ensure_ccw(verts)


def polygon_contains_all(inner: list[Point], outer: list[Point]) -> bool:
    """Every vertex of `inner` lies inside (or on) `outer`."""
    return all(point_in_polygon(v, outer) for v in inner)


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / seg2
    t = max(0.0, min(1.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def point_polygon_distance(p: Point, vertices: list[Point]) -> float:
    """Euclidean distance to a polygon; 0 inside or on the boundary."""
    if point_in_polygon(p, vertices):
        return 0.0
    n = len(vertices)
    return min(
        point_segment_distance(p, vertices[i], vertices[(i + 1) % n]) for i in range(n)
    )


def polyline_length(points: list[Point]) -> float:
    return sum(
        math.hypot(points[i + 1][0] - points[i][0], points[i + 1][1] - points[i][1])
        for i in range(len(points) - 1)
    )


def point_polyline_distance(p: Point, points: list[Point]) -> float:
    if len(points) == 1:
        return math.hypot(p[0] - points[0][0], p[1] - points[0][1])
    return min(
        point_segment_distance(p, points[i], points[i + 1]) for i in range(len(points) - 1)
    )


def compass_bearing(origin: Point, target: Point) -> float:
    """Bearing from origin to target: radians clockwise from north (+y)."""
    return math.atan2(target[0] - origin[0], target[1] - origin[1]) % (2.0 * math.pi)


def angular_difference(a: float, b: float) -> float:
    """Unsigned angle between two directions, in [0, pi]."""
    d = abs(a - b) % (2.0 * math.pi)
    return d if d <= math.pi else 2.0 * math.pi - d


def signed_turn(a: float, b: float) -> float:
    """Signed turn from heading a to heading b in (-pi, pi]; positive = clockwise."""
    d = (b - a) % (2.0 * math.pi)
    return d if d <= math.pi else d - 2.0 * math.pi
