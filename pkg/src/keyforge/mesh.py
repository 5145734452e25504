"""Triangle mesh container, watertightness checks, and binary STL I/O.

A mesh is a triangle soup with shared vertex indices: vertices (n, 3)
float64 millimeters, triangles (m, 3) int32 with counterclockwise outward
winding.  Devices are emitted as multi-shell meshes (one closed shell per
body); slicers union overlapping same-extruder shells.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int32
    material: str = "PLA"  # "PLA" | "cPLA"

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def signed_volume(self) -> float:
        """Divergence-theorem volume; positive for outward orientation."""
        if len(self.triangles) == 0:
            return 0.0
        v = self.vertices[self.triangles]
        return float(np.einsum("ij,ij->i", v[:, 0],
                               np.cross(v[:, 1], v[:, 2])).sum() / 6.0)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, rotation_deg: float = 0.0,
                    translation=(0.0, 0.0, 0.0)) -> "TriangleMesh":
        """Rotate about +z through the origin, then translate."""
        verts = self.vertices
        if rotation_deg:
            a = np.radians(rotation_deg)
            c, s = np.cos(a), np.sin(a)
            rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            verts = verts @ rot.T
        verts = verts + np.asarray(translation, dtype=np.float64)
        return TriangleMesh(vertices=verts, triangles=self.triangles.copy(),
                            material=self.material)


@dataclass
class WatertightReport:
    manifold: bool           # strict: every edge borders exactly two faces
    oriented: bool           # every directed edge is balanced by its reverse
    signed_volume: float
    degenerate_triangles: int
    bad_edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.oriented and self.signed_volume > 0
                and self.degenerate_triangles == 0)


def check_watertight(mesh: TriangleMesh, area_eps: float = 1e-9) -> WatertightReport:
    """Edge-use census over the directed triangle edges.

    Watertight (``ok``) means the surface is closed and consistently
    oriented: every directed edge is matched by an equal number of
    reversed uses.  Touching shells that share a face — the normal state
    of a multi-body print merged for one extruder — stay watertight under
    this census.  ``manifold`` additionally requires the strict one
    face pair per edge, which single solids satisfy.
    """
    if mesh.triangle_count == 0:
        return WatertightReport(manifold=True, oriented=True, signed_volume=0.0,
                                degenerate_triangles=0)
    directed: dict[tuple[int, int], int] = {}
    for tri in mesh.triangles:
        a, b, c = int(tri[0]), int(tri[1]), int(tri[2])
        for e in ((a, b), (b, c), (c, a)):
            directed[e] = directed.get(e, 0) + 1

    bad: list[tuple[int, int]] = []
    strict = True
    for (a, b), n in directed.items():
        if n != directed.get((b, a), 0):
            bad.append((a, b))
        elif n != 1:
            strict = False
    manifold = strict and not bad

    v = mesh.vertices[mesh.triangles]
    areas = 0.5 * np.linalg.norm(
        np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)
    degenerate = int(np.count_nonzero(areas < area_eps))
    return WatertightReport(manifold=manifold, oriented=not bad,
                            signed_volume=mesh.signed_volume(),
                            degenerate_triangles=degenerate,
                            bad_edges=sorted(set(bad))[:32])


def merge_meshes(meshes: list[TriangleMesh], material: str) -> TriangleMesh:
    """Concatenate shells into one mesh; indices are offset per body."""
    if not meshes:
        return TriangleMesh(vertices=np.zeros((0, 3)),
                            triangles=np.zeros((0, 3), dtype=np.int32),
                            material=material)
    verts = []
    tris = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        offset += len(m.vertices)
    return TriangleMesh(vertices=np.vstack(verts), triangles=np.vstack(tris),
                        material=material)


def write_stl(mesh: TriangleMesh, destination) -> int:
    """Binary little-endian STL in millimeters; returns bytes written.

    Layout: 80-byte header, uint32 triangle count, then 50 bytes per
    triangle (normal + 3 vertices as float32, 2-byte attribute of 0).
    Facet normals are recomputed from winding.
    """
    header = b"keyforge binary STL (mm)".ljust(80, b"\0")
    v = mesh.vertices[mesh.triangles].astype(np.float32) if mesh.triangle_count \
        else np.zeros((0, 3, 3), dtype=np.float32)
    if mesh.triangle_count:
        n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        norms = np.linalg.norm(n, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        n = (n / norms).astype(np.float32)
    body = bytearray()
    body += header
    body += struct.pack("<I", mesh.triangle_count)
    for i in range(mesh.triangle_count):
        body += n[i].tobytes()
        body += v[i].tobytes()
        body += b"\0\0"
    data = bytes(body)
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return len(data)


def read_stl(source) -> TriangleMesh:
    """Read back a binary STL (testing / round-trip support).

    Corners with bit-identical coordinates are welded back into shared
    vertices so edge topology survives the round trip.
    """
    if hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    count = struct.unpack_from("<I", data, 80)[0]
    corners = np.zeros((count * 3, 3), dtype=np.float64)
    for i in range(count):
        off = 84 + i * 50 + 12
        flat = np.frombuffer(data, dtype="<f4", count=9, offset=off)
        corners[i * 3:i * 3 + 3] = flat.reshape(3, 3)
    verts, inverse = np.unique(corners, axis=0, return_inverse=True)
    tris = inverse.astype(np.int32).reshape(-1, 3)
    return TriangleMesh(vertices=verts, triangles=tris)
