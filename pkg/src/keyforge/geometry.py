"""Small 2D geometry toolkit shared by placement, routing and mesh code.

Everything works on plain tuples / numpy arrays in millimeters.  Polygons are
lists of (x, y) vertices; outer boundaries are counterclockwise.
"""

from __future__ import annotations

import math

Point = tuple[float, float]
Polygon = list[Point]


def rot2d(p: Point, deg: float) -> Point:
    """Rotate a point about the origin by `deg` degrees counterclockwise."""
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return (c * p[0] - s * p[1], s * p[0] + c * p[1])


def polygon_area(poly: Polygon) -> float:
    """Signed shoelace area; positive for counterclockwise winding."""
    a = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def is_ccw(poly: Polygon) -> bool:
    return polygon_area(poly) > 0.0


def rect_corners(cx: float, cy: float, w: float, d: float, rot_deg: float = 0.0) -> Polygon:
    """Corners of a w x d rectangle centered at (cx, cy), CCW order."""
    hw, hd = w / 2.0, d / 2.0
    base = [(-hw, -hd), (hw, -hd), (hw, hd), (-hw, hd)]
    out = []
    for p in base:
        rx, ry = rot2d(p, rot_deg) if rot_deg else p
        out.append((cx + rx, cy + ry))
    return out


def aabb(points: list[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs), min(ys), max(xs), max(ys))


def aabb_overlap(a, b, eps: float = 1e-9) -> bool:
    """Strict positive-area overlap of two (xmin, ymin, xmax, ymax) boxes."""
    return (a[0] < b[2] - eps and b[0] < a[2] - eps
            and a[1] < b[3] - eps and b[1] < a[3] - eps)


def convex_overlap(pa: Polygon, pb: Polygon, eps: float = 1e-9) -> bool:
    """Separating-axis test for two convex polygons.

    Returns True only for positive-area intersection; shared edges or corner
    touches do not count.
    """
    for poly in (pa, pb):
        n = len(poly)
        for i in range(n):
            ex = poly[(i + 1) % n][0] - poly[i][0]
            ey = poly[(i + 1) % n][1] - poly[i][1]
            # outward normal of the edge
            ax, ay = ey, -ex
            norm = math.hypot(ax, ay)
            if norm == 0.0:
                continue
            ax, ay = ax / norm, ay / norm
            amin = min(ax * p[0] + ay * p[1] for p in pa)
            amax = max(ax * p[0] + ay * p[1] for p in pa)
            bmin = min(ax * p[0] + ay * p[1] for p in pb)
            bmax = max(ax * p[0] + ay * p[1] for p in pb)
            if amax <= bmin + eps or bmax <= amin + eps:
                return False
    return True


def convex_hull(points: list[Point]) -> Polygon:
    """Andrew monotone-chain hull, CCW, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return list(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-12:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-12:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def offset_convex(poly: Polygon, margin: float) -> Polygon:
    """Offset a convex CCW polygon outward by `margin` with mitered corners."""
    n = len(poly)
    if n < 3:
        raise ValueError("need at least 3 vertices")
    lines = []
    for i in range(n):
        p0, p1 = poly[i], poly[(i + 1) % n]
        ex, ey = p1[0] - p0[0], p1[1] - p0[1]
        norm = math.hypot(ex, ey)
        # outward normal for CCW winding
        nx, ny = ey / norm, -ex / norm
        lines.append(((p0[0] + nx * margin, p0[1] + ny * margin), (ex, ey)))
    out: Polygon = []
    for i in range(n):
        (q0, d0) = lines[i - 1]
        (q1, d1) = lines[i]
        # intersect q0 + t*d0 with q1 + s*d1
        denom = d0[0] * d1[1] - d0[1] * d1[0]
        if abs(denom) < 1e-12:
            out.append(q1)
            continue
        t = ((q1[0] - q0[0]) * d1[1] - (q1[1] - q0[1]) * d1[0]) / denom
        out.append((q0[0] + t * d0[0], q0[1] + t * d0[1]))
    return out


def point_in_polygon(p: Point, poly: Polygon) -> bool:
    """Even-odd rule; points on the boundary count as inside."""
    x, y = p
    inside = False
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        # boundary check against the segment
        if _point_seg_distance(p, (x0, y0), (x1, y1)) < 1e-9:
            return True
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xi > x:
                inside = not inside
    return inside


def _point_seg_distance(p: Point, a: Point, b: Point) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_seg_distance(p: Point, a: Point, b: Point) -> float:
    return _point_seg_distance(p, a, b)


def seg_seg_distance(a0: Point, a1: Point, b0: Point, b1: Point) -> float:
    """Minimum distance between two 2D segments (0 if they intersect)."""
    if segments_intersect(a0, a1, b0, b1):
        return 0.0
    return min(
        _point_seg_distance(a0, b0, b1),
        _point_seg_distance(a1, b0, b1),
        _point_seg_distance(b0, a0, a1),
        _point_seg_distance(b1, a0, a1),
    )


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool:
    d1 = _orient(b0, b1, a0)
    d2 = _orient(b0, b1, a1)
    d3 = _orient(a0, a1, b0)
    d4 = _orient(a0, a1, b1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_seg(p, q, r):
        return (min(p[0], r[0]) - 1e-12 <= q[0] <= max(p[0], r[0]) + 1e-12
                and min(p[1], r[1]) - 1e-12 <= q[1] <= max(p[1], r[1]) + 1e-12)

    if abs(d1) < 1e-12 and on_seg(b0, a0, b1):
        return True
    if abs(d2) < 1e-12 and on_seg(b0, a1, b1):
        return True
    if abs(d3) < 1e-12 and on_seg(a0, b0, a1):
        return True
    if abs(d4) < 1e-12 and on_seg(a0, b1, a1):
        return True
    return False


def segment_intersection_point(a0: Point, a1: Point, b0: Point, b1: Point) -> Point | None:
    """Proper crossing point of two segments, or None if parallel/non-crossing."""
    r = (a1[0] - a0[0], a1[1] - a0[1])
    s = (b1[0] - b0[0], b1[1] - b0[1])
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) < 1e-12:
        return None
    qp = (b0[0] - a0[0], b0[1] - a0[1])
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if -1e-9 <= t <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
        return (a0[0] + t * r[0], a0[1] + t * r[1])
    return None


def polyline_length(pts: list[Point]) -> float:
    return sum(math.hypot(pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
               for i in range(len(pts) - 1))


def polygon_self_intersects(poly: Polygon) -> bool:
    """True if any two non-adjacent edges of the closed polygon cross."""
    n = len(poly)
    for i in range(n):
        a0, a1 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b0, b1 = poly[j], poly[(j + 1) % n]
            if segments_intersect(a0, a1, b0, b1):
                return True
    return False
