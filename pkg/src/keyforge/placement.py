"""Key placement, collision detection and shell outline construction.

Grid keys are placed at a pitch of keycap width + 3.3 mm within a row (the
3.3 mm joined-base gap is the fixed constant; the pitch follows the keycap).
Row index 0 sits at y = 0 and higher row indices step toward the user in -y;
the device rear is +y.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import parts
from .frontend import DeviceSpec, ExplicitPos, GridPos, KEY_GAP_MM, KeyInstance
from .geometry import (Polygon, aabb, convex_hull, convex_overlap, offset_convex,
                       point_in_polygon, rect_corners)

# wide enough that the trace router always finds a perimeter corridor of
# grid cells (grid pitch 3.81 mm) between key footprints and the shell edge
SHELL_MARGIN_MM = 6.0


@dataclass(frozen=True)
class PlacedKey:
    key: KeyInstance
    blueprint: parts.KeyBlueprint
    x_mm: float
    y_mm: float
    rotation_deg: float = 0.0
    row: int | None = None

    def footprint_polygon(self) -> Polygon:
        w, d = self.blueprint.footprint_mm
        return rect_corners(self.x_mm, self.y_mm, w, d, self.rotation_deg)


@dataclass(frozen=True)
class Placement:
    placed: tuple[PlacedKey, ...]
    rows: dict[int, tuple[PlacedKey, ...]]
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax


@dataclass(frozen=True)
class ShellOutline:
    polygon: Polygon  # counterclockwise
    height_mm: float


@dataclass(frozen=True)
class CollisionViolation:
    key_a: str
    key_b: str

    def __str__(self) -> str:
        return f"footprints of '{self.key_a}' and '{self.key_b}' overlap"


class PlacementError(Exception):
    pass


def place_keys(spec: DeviceSpec,
               blueprints: dict[str, parts.KeyBlueprint]) -> Placement:
    """Resolve every key position to millimeters.

    Grid keys: x = col * (keycap + 3.3) + row offset, y = -row * row pitch.
    Explicit keys pass through unchanged (rotation allowed there only).
    """
    pitch = spec.keycap_width_mm + KEY_GAP_MM
    row_pitch = spec.row_pitch_mm if spec.row_pitch_mm is not None else pitch
    placed: list[PlacedKey] = []
    rows: dict[int, list[PlacedKey]] = {}
    for k in spec.keys:
        bp = blueprints[k.id]
        if isinstance(k.position, GridPos):
            g = k.position
            pk = PlacedKey(key=k, blueprint=bp,
                           x_mm=g.col * pitch + g.offset_mm,
                           y_mm=-g.row * row_pitch, row=g.row)
            rows.setdefault(g.row, []).append(pk)
        elif isinstance(k.position, ExplicitPos):
            e = k.position
            pk = PlacedKey(key=k, blueprint=bp, x_mm=e.x_mm, y_mm=e.y_mm,
                           rotation_deg=e.rotation_deg, row=None)
        else:
            raise PlacementError(f"key '{k.id}' has no resolved position")
        placed.append(pk)

    pts = [p for pk in placed for p in pk.footprint_polygon()]
    return Placement(
        placed=tuple(placed),
        rows={r: tuple(v) for r, v in sorted(rows.items())},
        bounds=aabb(pts),
    )


def detect_collisions(p: Placement) -> list[CollisionViolation]:
    """All key pairs whose footprints intersect with positive area.

    Separating-axis test on the (possibly rotated) footprint rectangles;
    exactly-touching joined bases do not count as a collision.
    """
    out: list[CollisionViolation] = []
    polys = [(pk.key.id, pk.footprint_polygon()) for pk in p.placed]
    boxes = [aabb(poly) for _, poly in polys]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            bi, bj = boxes[i], boxes[j]
            if (bi[2] < bj[0] or bj[2] < bi[0] or bi[3] < bj[1] or bj[3] < bi[1]):
                continue
            if convex_overlap(polys[i][1], polys[j][1]):
                out.append(CollisionViolation(polys[i][0], polys[j][0]))
    return out


def build_shell(p: Placement, policy: str,
                margin_mm: float = SHELL_MARGIN_MM) -> ShellOutline:
    """Device outline per shell policy.

    rectangle: axis-aligned bounding rectangle of all footprints + margin.
    hull: convex hull of all footprint corners, offset outward by margin.
    none: union of the footprints themselves (must be contiguous).
    """
    corners = [pt for pk in p.placed for pt in pk.footprint_polygon()]
    height = max(pk.blueprint.base_height_mm for pk in p.placed)
    if policy == "rectangle":
        xmin, ymin, xmax, ymax = aabb(corners)
        poly = [(xmin - margin_mm, ymin - margin_mm),
                (xmax + margin_mm, ymin - margin_mm),
                (xmax + margin_mm, ymax + margin_mm),
                (xmin - margin_mm, ymax + margin_mm)]
        return ShellOutline(polygon=poly, height_mm=height)
    if policy == "hull":
        hull = convex_hull(corners)
        return ShellOutline(polygon=offset_convex(hull, margin_mm), height_mm=height)
    if policy == "none":
        return ShellOutline(polygon=_union_footprints(p), height_mm=height)
    raise PlacementError(f"unknown shell policy '{policy}'")


def _union_footprints(p: Placement) -> Polygon:
    import shapely.geometry
    import shapely.ops

    geoms = [shapely.geometry.Polygon(pk.footprint_polygon()) for pk in p.placed]
    merged = shapely.ops.unary_union(geoms)
    if merged.geom_type != "Polygon":
        raise PlacementError(
            "shell policy 'none' needs contiguous key footprints; "
            "the union is disconnected")
    ring = list(merged.exterior.coords)[:-1]
    # shapely may emit either winding; normalize to CCW
    from .geometry import is_ccw
    if not is_ccw(ring):
        ring.reverse()
    return [(float(x), float(y)) for x, y in ring]


def shell_contains(shell: ShellOutline, p: Placement) -> bool:
    """Every footprint corner lies inside (or on) the shell polygon."""
    return all(point_in_polygon(pt, shell.polygon)
               for pk in p.placed for pt in pk.footprint_polygon())
