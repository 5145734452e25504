"""Watertight solid constructors: prisms, sweeps, helical springs, boxes,
cylinders and cones.

All bodies are generated individually watertight and merged per material as
multi-shell meshes; there is no CSG.  Caps are triangulated by constrained
Delaunay, so prisms may carry holes (used for conductor ducts in base
slabs).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (Polygon, is_ccw, polygon_area, polygon_self_intersects)
from .mesh import TriangleMesh

CIRCLE_SEGMENTS = 48  # tessellation per full turn; deterministic


class GeometryError(Exception):
    pass


# ---------------------------------------------------------------------------
# cap triangulation

def _triangulate_simple(poly: list[tuple[float, float]],
                        idx: list[int]) -> list[tuple[int, int, int]]:
    """Ear-clipping triangulation of a simple CCW polygon.

    `idx` maps local positions to caller vertex indices; returned triangles
    use those indices.
    """
    n = len(poly)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    verts = list(range(n))
    tris: list[tuple[int, int, int]] = []

    def cross(o, a, b):
        return ((poly[a][0] - poly[o][0]) * (poly[b][1] - poly[o][1])
                - (poly[a][1] - poly[o][1]) * (poly[b][0] - poly[o][0]))

    def in_tri(p, a, b, c):
        d1 = (poly[p][0] - poly[b][0]) * (poly[a][1] - poly[b][1]) \
            - (poly[a][0] - poly[b][0]) * (poly[p][1] - poly[b][1])
        d2 = (poly[p][0] - poly[c][0]) * (poly[b][1] - poly[c][1]) \
            - (poly[b][0] - poly[c][0]) * (poly[p][1] - poly[c][1])
        d3 = (poly[p][0] - poly[a][0]) * (poly[c][1] - poly[a][1]) \
            - (poly[c][0] - poly[a][0]) * (poly[p][1] - poly[a][1])
        neg = (d1 < -1e-12) or (d2 < -1e-12) or (d3 < -1e-12)
        pos = (d1 > 1e-12) or (d2 > 1e-12) or (d3 > 1e-12)
        return not (neg and pos)

    guard = 0
    while len(verts) > 3:
        guard += 1
        if guard > 4 * n * n:
            raise GeometryError("ear clipping failed; polygon may self-intersect")
        m = len(verts)
        clipped = False
        for k in range(m):
            prev, cur, nxt = verts[(k - 1) % m], verts[k], verts[(k + 1) % m]
            if cross(prev, cur, nxt) <= 1e-12:
                continue  # reflex or collinear corner
            ok = True
            for other in verts:
                if other in (prev, cur, nxt):
                    continue
                # duplicated bridge vertices share coordinates; skip clones
                if poly[other] == poly[prev] or poly[other] == poly[cur] \
                        or poly[other] == poly[nxt]:
                    continue
                if in_tri(other, prev, cur, nxt):
                    ok = False
                    break
            if ok:
                tris.append((idx[prev], idx[cur], idx[nxt]))
                verts.pop(k)
                clipped = True
                break
        if not clipped:
            raise GeometryError("no ear found; polygon may self-intersect")
    a, b, c = verts
    tris.append((idx[a], idx[b], idx[c]))
    return tris


def triangulate_polygon(outer: Polygon,
                        holes: list[Polygon] | None = None,
                        index_offset: int = 0) -> list[tuple[int, int, int]]:
    """Triangulate a CCW polygon with CW holes.

    Triangle indices refer to the concatenated vertex order
    outer + hole0 + hole1 + ... starting at `index_offset`.  Backed by the
    GEOS constrained Delaunay triangulation, which introduces no new
    vertices, so every triangle corner maps back to an input vertex.
    """
    import shapely
    import shapely.geometry

    holes = holes or []
    if not is_ccw(outer):
        raise GeometryError("outer boundary must be counterclockwise")
    for h in holes:
        if is_ccw(h):
            raise GeometryError("holes must be clockwise")
    if polygon_self_intersects(outer):
        raise GeometryError("outer boundary self-intersects")

    index_of: dict[tuple[float, float], int] = {}
    for i, p in enumerate([*outer, *(p for h in holes for p in h)]):
        index_of.setdefault((float(p[0]), float(p[1])), index_offset + i)

    poly = shapely.geometry.Polygon(outer, holes)
    if not poly.is_valid:
        raise GeometryError("polygon is not simple (rings may intersect)")
    tris: list[tuple[int, int, int]] = []
    for tri in shapely.constrained_delaunay_triangles(poly).geoms:
        ring = list(tri.exterior.coords[:-1])
        if len(ring) != 3:
            raise GeometryError("triangulation returned a non-triangle")
        area2 = ((ring[1][0] - ring[0][0]) * (ring[2][1] - ring[0][1])
                 - (ring[1][1] - ring[0][1]) * (ring[2][0] - ring[0][0]))
        if area2 < 0:
            ring.reverse()
        try:
            tris.append(tuple(index_of[(x, y)] for x, y in ring))
        except KeyError as exc:
            raise GeometryError(
                f"triangulation vertex {exc} is not an input vertex")
    return tris


# ---------------------------------------------------------------------------
# solids

def extrude_polygon(outer: Polygon, height: float,
                    holes: list[Polygon] | None = None,
                    z0: float = 0.0, material: str = "PLA") -> TriangleMesh:
    """Watertight prism from a CCW profile (with optional CW holes)."""
    if height <= 0:
        raise GeometryError("extrusion height must be positive")
    holes = holes or []
    loops = [outer] + holes
    flat = [p for loop in loops for p in loop]
    n = len(flat)
    cap = triangulate_polygon(outer, holes)

    verts = np.zeros((2 * n, 3))
    for i, (x, y) in enumerate(flat):
        verts[i] = (x, y, z0)
        verts[n + i] = (x, y, z0 + height)

    tris: list[tuple[int, int, int]] = []
    # bottom cap faces -z: reverse winding
    tris.extend((a, c, b) for a, b, c in cap)
    # top cap faces +z
    tris.extend((n + a, n + b, n + c) for a, b, c in cap)
    # walls per boundary loop; loop winding gives outward normals
    start = 0
    for loop in loops:
        ln = len(loop)
        for i in range(ln):
            a = start + i
            b = start + (i + 1) % ln
            tris.append((a, b, n + b))
            tris.append((a, n + b, n + a))
        start += ln
    return TriangleMesh(vertices=verts,
                        triangles=np.array(tris, dtype=np.int32),
                        material=material)


def sweep_profile(profile: Polygon, start, end, material: str = "PLA") -> TriangleMesh:
    """Straight sweep of a CCW 2D profile along the segment start->end.

    The profile's local x axis maps to a direction perpendicular to the
    path (horizontal when possible) and local y to the other perpendicular;
    volume is profile area x path length.
    """
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    w = end - start
    length = float(np.linalg.norm(w))
    if length <= 0:
        raise GeometryError("sweep path must have positive length")
    if not is_ccw(profile):
        raise GeometryError("profile must be counterclockwise")
    if polygon_self_intersects(profile):
        raise GeometryError("profile self-intersects")
    w = w / length
    up = np.array([0.0, 0.0, 1.0])
    if abs(float(w @ up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    u = np.cross(up, w)
    u = u / np.linalg.norm(u)
    v = np.cross(w, u)

    n = len(profile)
    verts = np.zeros((2 * n, 3))
    for i, (x, y) in enumerate(profile):
        off = x * u + y * v
        verts[i] = start + off
        verts[n + i] = end + off

    cap = triangulate_polygon(profile)
    tris: list[tuple[int, int, int]] = []
    tris.extend((a, c, b) for a, b, c in cap)           # start cap faces -w
    tris.extend((n + a, n + b, n + c) for a, b, c in cap)  # end cap faces +w
    for i in range(n):
        a, b = i, (i + 1) % n
        tris.append((a, b, n + b))
        tris.append((a, n + b, n + a))
    return TriangleMesh(vertices=verts,
                        triangles=np.array(tris, dtype=np.int32),
                        material=material)


def sweep_rect(start, end, width: float, thickness: float,
               material: str = "cPLA") -> TriangleMesh:
    """Rectangular-section straight sweep (cantilever springs)."""
    profile = [(-width / 2, -thickness / 2), (width / 2, -thickness / 2),
               (width / 2, thickness / 2), (-width / 2, thickness / 2)]
    return sweep_profile(profile, start, end, material=material)


def helix_spring_mesh(mean_diameter: float, wire: float, turns: float,
                      free_height: float, z0: float = 0.0,
                      center=(0.0, 0.0), material: str = "PLA",
                      segments_per_turn: int = CIRCLE_SEGMENTS) -> TriangleMesh:
    """Square-wire helical coil with flat end pads, watertight.

    The helix centerline spans z0 + wire/2 .. z0 + free_height - wire/2;
    pitch below the wire thickness would self-intersect and is an error.
    """
    if turns < 1:
        raise GeometryError("coil needs at least one turn")
    height = free_height - wire
    pitch = height / turns
    if pitch < wire:
        raise GeometryError(
            f"coil pitch {pitch:.3f} mm below wire thickness {wire:.3f} mm; "
            "the coils would self-intersect")

    r = mean_diameter / 2.0
    steps = max(8, int(round(segments_per_turn * turns)))
    cx, cy = center
    half = wire / 2.0

    rings = []
    for k in range(steps + 1):
        t = k / steps
        theta = 2.0 * math.pi * turns * t
        z = z0 + half + height * t
        cxy = np.array([cx + r * math.cos(theta), cy + r * math.sin(theta), z])
        e_r = np.array([math.cos(theta), math.sin(theta), 0.0])
        # square section spanned by the radial and vertical directions
        e_z = np.array([0.0, 0.0, 1.0])
        ring = [cxy - half * e_r - half * e_z,
                cxy + half * e_r - half * e_z,
                cxy + half * e_r + half * e_z,
                cxy - half * e_r + half * e_z]
        rings.append(ring)

    verts = np.array([p for ring in rings for p in ring])
    tris: list[tuple[int, int, int]] = []
    for k in range(steps):
        a = 4 * k
        b = 4 * (k + 1)
        for i in range(4):
            j = (i + 1) % 4
            tris.append((a + i, b + i, b + j))
            tris.append((a + i, b + j, a + j))
    # end caps
    tris.append((0, 1, 2))
    tris.append((0, 2, 3))
    last = 4 * steps
    tris.append((last + 0, last + 2, last + 1))
    tris.append((last + 0, last + 3, last + 2))

    coil = TriangleMesh(vertices=verts, triangles=np.array(tris, dtype=np.int32),
                        material=material)
    # flat end pads closing the spring against its neighbors
    pad_r = r + half
    bottom = cylinder(center, pad_r * 2.0, z0, z0 + wire, material=material)
    top = cylinder(center, pad_r * 2.0, z0 + free_height - wire, z0 + free_height,
                   material=material)
    from .mesh import merge_meshes
    return merge_meshes([coil, bottom, top], material)


def box(x: tuple[float, float], y: tuple[float, float], z: tuple[float, float],
        material: str = "PLA") -> TriangleMesh:
    """Axis-aligned box as 12 triangles."""
    x0, x1 = x
    y0, y1 = y
    z0, z1 = z
    if not (x1 > x0 and y1 > y0 and z1 > z0):
        raise GeometryError("box extents must be positive")
    v = np.array([
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ])
    t = np.array([
        (0, 2, 1), (0, 3, 2),  # bottom (-z)
        (4, 5, 6), (4, 6, 7),  # top (+z)
        (0, 1, 5), (0, 5, 4),  # front (-y)
        (2, 3, 7), (2, 7, 6),  # back (+y)
        (1, 2, 6), (1, 6, 5),  # right (+x)
        (3, 0, 4), (3, 4, 7),  # left (-x)
    ], dtype=np.int32)
    return TriangleMesh(vertices=v, triangles=t, material=material)


def _circle_ccw(center, diameter, segments=CIRCLE_SEGMENTS) -> Polygon:
    cx, cy = center
    r = diameter / 2.0
    return [(cx + r * math.cos(2 * math.pi * i / segments),
             cy + r * math.sin(2 * math.pi * i / segments))
            for i in range(segments)]


def cylinder(center, diameter: float, z0: float, z1: float,
             material: str = "PLA", segments: int = CIRCLE_SEGMENTS) -> TriangleMesh:
    return extrude_polygon(_circle_ccw(center, diameter, segments), z1 - z0,
                           z0=z0, material=material)


def cone(center, base_diameter: float, tip_diameter: float,
         z0: float, z1: float, material: str = "cPLA",
         segments: int = CIRCLE_SEGMENTS) -> TriangleMesh:
    """Truncated cone (socket electrode), watertight."""
    if z1 <= z0:
        raise GeometryError("cone height must be positive")
    base = _circle_ccw(center, base_diameter, segments)
    top = _circle_ccw(center, tip_diameter, segments)
    n = segments
    verts = np.zeros((2 * n, 3))
    for i in range(n):
        verts[i] = (*base[i], z0)
        verts[n + i] = (*top[i], z1)
    idx = list(range(n))
    cap = _triangulate_simple(base, idx)
    tris: list[tuple[int, int, int]] = []
    tris.extend((a, c, b) for a, b, c in cap)
    tris.extend((n + a, n + b, n + c) for a, b, c in cap)
    for i in range(n):
        j = (i + 1) % n
        tris.append((i, j, n + j))
        tris.append((i, n + j, n + i))
    return TriangleMesh(vertices=verts, triangles=np.array(tris, dtype=np.int32),
                        material=material)


def shape_mesh(shape: dict, material: str) -> TriangleMesh:
    """Instantiate a blueprint shape record."""
    kind = shape["type"]
    if kind == "box":
        holes = shape.get("holes")
        if holes:
            x0, x1 = shape["x"]
            y0, y1 = shape["y"]
            z0, z1 = shape["z"]
            outer = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            return extrude_polygon(outer, z1 - z0, holes=holes, z0=z0,
                                   material=material)
        return box(shape["x"], shape["y"], shape["z"], material=material)
    if kind == "cylinder":
        z0, z1 = shape["z"]
        return cylinder(shape["center"], shape["diameter"], z0, z1,
                        material=material)
    if kind == "sweep_rect":
        return sweep_rect(shape["start"], shape["end"], shape["width"],
                          shape["thickness"], material=material)
    if kind == "helix":
        return helix_spring_mesh(shape["mean_diameter"], shape["wire"],
                                 shape["turns"], shape["free_height"],
                                 z0=shape["z0"], center=shape["center"],
                                 material=material)
    raise GeometryError(f"unknown shape type '{kind}'")
