"""Device assembly: instantiate every solid, split by material, and check
that conductive and structural bodies only ever touch, never interpenetrate.

Same-material overlaps are deliberate (slicers union shells that share an
extruder), so bodies are merged as multi-shell meshes without CSG.  The
cross-material check projects every body to its plan footprint plus a z
band; a positive-area overlap in both is an interpenetration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import shapely.affinity
import shapely.geometry
import shapely.ops

from . import parts
from .frontend import DeviceSpec
from .geometry import rect_corners, is_ccw
from .mesh import TriangleMesh, merge_meshes
from .placement import Placement, ShellOutline
from .router import RoutePlan
from .solids import cone, extrude_polygon, shape_mesh

FLOOR_BAND = parts.FLOOR_Z
RIDGE_BAND = parts.RIDGE_Z
SLAB_BAND = parts.BASE_Z

#: slab cut-out half-size around a conductor column, sized so any column
#: rotation (worst case 45 degrees) keeps 0.25 mm of air to the slab
COLUMN_HOLE_MM = parts.TRACE_SIZE_MM * math.sqrt(2.0) + 0.5


@dataclass
class Part:
    name: str
    material: str
    mesh: TriangleMesh
    footprint: object        # shapely geometry, device frame
    z0: float
    z1: float


@dataclass
class AssemblyResult:
    pla: TriangleMesh
    cpla: TriangleMesh
    parts: list[Part]
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Interpenetration:
    part_a: str
    part_b: str
    overlap_area_mm2: float

    def __str__(self) -> str:
        return (f"conductive body '{self.part_a}' interpenetrates "
                f"structural body '{self.part_b}' "
                f"({self.overlap_area_mm2:.2f} mm^2 of overlap)")


class AssemblyError(Exception):
    def __init__(self, violations: list[Interpenetration]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _shape_footprint(shape: dict):
    kind = shape["type"]
    if kind == "box":
        x0, x1 = shape["x"]
        y0, y1 = shape["y"]
        outer = shapely.geometry.Polygon(
            [(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            holes=shape.get("holes"))
        return outer
    if kind == "cylinder":
        return shapely.geometry.Point(shape["center"]).buffer(
            shape["diameter"] / 2.0, quad_segs=12)
    if kind == "sweep_rect":
        sx, sy, _ = shape["start"]
        ex, ey, _ = shape["end"]
        line = shapely.geometry.LineString([(sx, sy), (ex, ey)])
        return line.buffer(shape["width"] / 2.0, cap_style=3)
    if kind == "helix":
        r = shape["mean_diameter"] / 2.0 + shape["wire"] / 2.0
        return shapely.geometry.Point(shape["center"]).buffer(r, quad_segs=12)
    raise ValueError(f"unknown shape type '{kind}'")


def _shape_zband(shape: dict) -> tuple[float, float]:
    kind = shape["type"]
    if kind in ("box", "cylinder"):
        return shape["z"]
    if kind == "sweep_rect":
        t = shape["thickness"]
        sx, sy, sz = shape["start"]
        ex, ey, ez = shape["end"]
        length = math.sqrt((ex - sx) ** 2 + (ey - sy) ** 2 + (ez - sz) ** 2)
        # the section's vertical half-extent scales with the path's
        # horizontal direction component
        wh = math.hypot(ex - sx, ey - sy) / length if length else 1.0
        half = t / 2.0 * wh + 1e-9
        return (min(sz, ez) - half, max(sz, ez) + half)
    if kind == "helix":
        return (shape["z0"], shape["z0"] + shape["free_height"])
    raise ValueError(f"unknown shape type '{kind}'")


def _placed(geom, rotation_deg: float, dx: float, dy: float):
    if rotation_deg:
        geom = shapely.affinity.rotate(geom, rotation_deg, origin=(0, 0))
    return shapely.affinity.translate(geom, dx, dy)


def _segment_rect(a, b, width: float):
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    if length < 1e-9:
        return None
    mid = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
    ang = math.degrees(math.atan2(dy, dx))
    return rect_corners(mid[0], mid[1], length, width, ang)


def _square_hole(center, size: float):
    half = size / 2.0
    return shapely.geometry.box(center[0] - half, center[1] - half,
                                center[0] + half, center[1] + half)


def assemble_device_meshes(placement: Placement, shell: ShellOutline,
                           plan: RoutePlan, spec: DeviceSpec) -> AssemblyResult:
    """Build the two per-material print meshes for a routed device."""
    out: list[Part] = []
    warnings: list[str] = []

    # -- keys
    for pk in placement.placed:
        bp = pk.blueprint
        for i, body in enumerate(bp.bodies):
            mesh = shape_mesh(body.shape, body.material).transformed(
                pk.rotation_deg, (pk.x_mm, pk.y_mm, 0.0))
            z0, z1 = _shape_zband(body.shape)
            out.append(Part(
                name=f"key/{pk.key.id}/{i:02d}-{body.role}",
                material=body.material, mesh=mesh,
                footprint=_placed(_shape_footprint(body.shape),
                                  pk.rotation_deg, pk.x_mm, pk.y_mm),
                z0=z0, z1=z1))
        out.extend(_legend_parts(pk))

    # -- base slab: shell plus rear apron, with conductor cut-outs
    out.append(_slab_part(placement, shell, plan))

    # -- routed copper
    for t_i, tr in enumerate(plan.traces):
        if tr.intrinsic:
            continue
        z0, z1 = FLOOR_BAND if tr.layer == "floor" else RIDGE_BAND
        for s_i, (a, b) in enumerate(zip(tr.points, tr.points[1:])):
            rect = _segment_rect(a, b, tr.width_mm)
            if rect is None:
                continue
            mesh = extrude_polygon(rect, z1 - z0, z0=z0, material=parts.CPLA)
            out.append(Part(
                name=f"trace/{tr.net_id}/{t_i:03d}-{s_i:02d}",
                material=parts.CPLA, mesh=mesh,
                footprint=shapely.geometry.Polygon(rect), z0=z0, z1=z1))
    for rm in plan.resistors:
        z0, z1 = FLOOR_BAND
        for s_i, (a, b) in enumerate(zip(rm.points, rm.points[1:])):
            rect = _segment_rect(a, b, plan.rules.trace_size_mm)
            if rect is None:
                continue
            mesh = extrude_polygon(rect, z1 - z0, z0=z0, material=parts.CPLA)
            out.append(Part(
                name=f"resistor/{rm.id}/{s_i:02d}",
                material=parts.CPLA, mesh=mesh,
                footprint=shapely.geometry.Polygon(rect), z0=z0, z1=z1))

    # -- socket electrodes
    if plan.socket:
        sp = plan.socket
        for pad in sp.pads:
            material = parts.CPLA if pad.net_id else parts.PLA
            mesh = cone(pad.position, sp.cone_base_mm, sp.cone_tip_mm,
                        0.0, sp.cone_height_mm, material=material)
            out.append(Part(
                name=f"socket/{pad.pin}", material=material, mesh=mesh,
                footprint=shapely.geometry.Point(pad.position).buffer(
                    sp.cone_base_mm / 2.0, quad_segs=12),
                z0=0.0, z1=sp.cone_height_mm))

    _check_interpenetration(out)

    out.sort(key=lambda p: (p.material, p.name))
    pla = merge_meshes([p.mesh for p in out if p.material == parts.PLA],
                       parts.PLA)
    cpla = merge_meshes([p.mesh for p in out if p.material == parts.CPLA],
                        parts.CPLA)
    if cpla.triangle_count == 0:
        warnings.append("device has no conductive geometry at all")
    return AssemblyResult(pla=pla, cpla=cpla, parts=out, warnings=warnings)


def _legend_parts(pk) -> list[Part]:
    bp = pk.blueprint
    legend = bp.legend
    if legend is None or legend.mode == "blank":
        return []
    cap_tops = [body.shape["z"][1] for body in bp.bodies
                if body.role == "keycap" and body.shape["type"] == "box"]
    if not cap_tops:
        return []
    z0 = max(cap_tops)
    relief = legend.relief_height_mm or parts.TEXT_RELIEF_MM
    polys = parts.legend_polygons(legend, bp.keycap_width_mm)
    # piano keycaps sit forward of the key center
    cap = next(b for b in bp.bodies if b.role == "keycap")
    ccx = (cap.shape["x"][0] + cap.shape["x"][1]) / 2.0
    ccy = (cap.shape["y"][0] + cap.shape["y"][1]) / 2.0
    parts_out = []
    for i, poly in enumerate(polys):
        shifted = [(x + ccx, y + ccy) for (x, y) in poly]
        if not is_ccw(shifted):
            shifted.reverse()
        mesh = extrude_polygon(shifted, relief, z0=z0,
                               material=parts.PLA).transformed(
            pk.rotation_deg, (pk.x_mm, pk.y_mm, 0.0))
        parts_out.append(Part(
            name=f"legend/{pk.key.id}/{i:02d}", material=parts.PLA, mesh=mesh,
            footprint=_placed(shapely.geometry.Polygon(shifted),
                              pk.rotation_deg, pk.x_mm, pk.y_mm),
            z0=z0, z1=z0 + relief))
    return parts_out


def _slab_part(placement: Placement, shell: ShellOutline,
               plan: RoutePlan) -> Part:
    ax0, ay0, ax1, ay1 = plan.apron_mm
    pieces = [shapely.geometry.Polygon(shell.polygon),
              shapely.geometry.box(ax0, ay0, ax1, ay1)]
    if plan.front_apron_mm:
        fx0, fy0, fx1, fy1 = plan.front_apron_mm
        pieces.append(shapely.geometry.box(fx0, fy0, fx1, fy1))
    geom = shapely.ops.unary_union(pieces)

    holes = []
    for pk in placement.placed:
        for term in pk.blueprint.terminals:
            if term.net_role == "signal":
                continue
            lx, ly = term.position
            if pk.rotation_deg:
                a = math.radians(pk.rotation_deg)
                lx, ly = (lx * math.cos(a) - ly * math.sin(a),
                          lx * math.sin(a) + ly * math.cos(a))
            holes.append(_square_hole((pk.x_mm + lx, pk.y_mm + ly),
                                      COLUMN_HOLE_MM))
    if plan.socket:
        for pad in plan.socket.pads:
            holes.append(_square_hole(pad.position,
                                      plan.socket.cone_base_mm + 0.5))
    if holes:
        geom = geom.difference(shapely.ops.unary_union(holes))

    z0, z1 = SLAB_BAND
    meshes = []
    polys = list(geom.geoms) if geom.geom_type == "MultiPolygon" else [geom]
    for poly in polys:
        poly = shapely.geometry.polygon.orient(poly, sign=1.0)
        outer = [(float(x), float(y)) for x, y in poly.exterior.coords[:-1]]
        hs = [[(float(x), float(y)) for x, y in ring.coords[:-1]]
              for ring in poly.interiors]
        meshes.append(extrude_polygon(outer, z1 - z0, holes=hs, z0=z0,
                                      material=parts.PLA))
    return Part(name="slab/base", material=parts.PLA,
                mesh=merge_meshes(meshes, parts.PLA),
                footprint=geom, z0=z0, z1=z1)


def _check_interpenetration(all_parts: list[Part]) -> None:
    cond = [p for p in all_parts if p.material == parts.CPLA]
    struct = [p for p in all_parts if p.material == parts.PLA]
    violations: list[Interpenetration] = []
    eps_z = 1e-6
    eps_a = 1e-6
    for c in cond:
        cb = c.footprint.bounds
        for s in struct:
            if min(c.z1, s.z1) - max(c.z0, s.z0) <= eps_z:
                continue
            sb = s.footprint.bounds
            if (cb[2] <= sb[0] or sb[2] <= cb[0]
                    or cb[3] <= sb[1] or sb[3] <= cb[1]):
                continue
            inter = c.footprint.intersection(s.footprint)
            if inter.area > eps_a:
                violations.append(Interpenetration(
                    part_a=c.name, part_b=s.name,
                    overlap_area_mm2=float(inter.area)))
    if violations:
        raise AssemblyError(violations)
