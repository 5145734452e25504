"""Placement, collision detection, and shell outlines.

Collision detection is cross-checked against shapely's polygon
intersection as an independent oracle, including randomized rotated
layouts.
"""

import math

import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import Polygon as ShapelyPolygon

from keyforge import parts
from keyforge.frontend import parse_device_spec
from keyforge.placement import (
    SHELL_MARGIN_MM,
    PlacedKey,
    Placement,
    PlacementError,
    build_shell,
    detect_collisions,
    place_keys,
    shell_contains,
)
from keyforge.geometry import aabb, polygon_area, rect_corners


def make_placement(source: str) -> Placement:
    spec, diags = parse_device_spec(source)
    assert spec is not None, [str(d) for d in diags]
    bps = {k.id: parts.blueprint_for(k) for k in spec.keys}
    return place_keys(spec, bps)


def synthetic_placement(keys: list[tuple[float, float, float]]) -> Placement:
    """Unit-square keys at (x, y, rotation) without going through a spec."""
    source = "device synth\n" + "\n".join(
        f"key K{i} at 0 0" for i in range(len(keys)))
    base = make_placement(source)
    placed = tuple(
        PlacedKey(key=pk.key, blueprint=pk.blueprint, x_mm=x, y_mm=y,
                  rotation_deg=rot)
        for pk, (x, y, rot) in zip(base.placed, keys))
    pts = [p for pk in placed for p in pk.footprint_polygon()]
    return Placement(placed=placed, rows={}, bounds=aabb(pts))


class TestPlaceKeys:
    def test_grid_pitch(self):
        p = make_placement("device d\nrow 0 offset 0 keys A B C\n")
        xs = [pk.x_mm for pk in p.placed]
        assert xs == pytest.approx([0.0, 18.8, 37.6])
        assert all(pk.y_mm == 0.0 for pk in p.placed)

    def test_rows_step_toward_user(self):
        p = make_placement("device d\nrow 0 offset 0 keys A\n"
                           "row 1 offset 4.7 keys B\n")
        a, b = p.placed
        assert b.y_mm == pytest.approx(a.y_mm - 18.8)
        assert b.x_mm == pytest.approx(4.7)

    def test_explicit_positions_pass_through(self):
        p = make_placement("device d\nkey A at 12.5 -3 rot 30\n")
        pk = p.placed[0]
        assert (pk.x_mm, pk.y_mm, pk.rotation_deg) == (12.5, -3.0, 30.0)

    def test_bounds_cover_all_footprints(self):
        p = make_placement("device d\nkey A at 0 0\nkey B at 50 40\n")
        xmin, ymin, xmax, ymax = p.bounds
        for pk in p.placed:
            for (x, y) in pk.footprint_polygon():
                assert xmin - 1e-9 <= x <= xmax + 1e-9
                assert ymin - 1e-9 <= y <= ymax + 1e-9


def shapely_collisions(p: Placement) -> set[frozenset[str]]:
    """Independent overlap oracle; positive-area intersections only."""
    out = set()
    polys = [(pk.key.id, ShapelyPolygon(pk.footprint_polygon()))
             for pk in p.placed]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if polys[i][1].intersection(polys[j][1]).area > 1e-9:
                out.add(frozenset((polys[i][0], polys[j][0])))
    return out


key_pose = st.tuples(
    st.floats(min_value=-40.0, max_value=40.0).map(lambda v: round(v, 1)),
    st.floats(min_value=-40.0, max_value=40.0).map(lambda v: round(v, 1)),
    st.floats(min_value=0.0, max_value=360.0).map(lambda v: round(v, 1)),
)


class TestCollisions:
    def test_touching_keys_do_not_collide(self):
        p = make_placement("device d\nrow 0 offset 0 keys A B\n")
        assert detect_collisions(p) == []

    def test_overlap_detected(self):
        p = make_placement("device d\nkey A at 0 0\nkey B at 10 0\n")
        names = {(c.key_a, c.key_b) for c in detect_collisions(p)}
        assert names == {("A", "B")}

    def test_rotated_diagonal_overlap(self):
        # corners of a 45-degree key reach into the gap between neighbors
        p = synthetic_placement([(0, 0, 0), (20, 0, 45)])
        assert {frozenset((c.key_a, c.key_b)) for c in detect_collisions(p)} \
            == shapely_collisions(p)

    @settings(max_examples=150, deadline=None)
    @given(poses=st.lists(key_pose, min_size=2, max_size=5))
    def test_matches_shapely_oracle(self, poses):
        p = synthetic_placement(poses)
        ours = {frozenset((c.key_a, c.key_b)) for c in detect_collisions(p)}
        oracle = shapely_collisions(p)
        # borderline contacts near the epsilon may differ; any disagreement
        # must be a near-zero-area touch, not a real overlap
        diff = ours ^ oracle
        for pair in diff:
            a, b = sorted(pair)
            pa = ShapelyPolygon(next(
                pk.footprint_polygon() for pk in p.placed if pk.key.id == a))
            pb = ShapelyPolygon(next(
                pk.footprint_polygon() for pk in p.placed if pk.key.id == b))
            assert pa.intersection(pb).area < 1e-6, (a, b)


class TestShell:
    def test_rectangle_margin(self):
        p = make_placement("device d\nrow 0 offset 0 keys A B\n")
        shell = build_shell(p, "rectangle")
        xmin, ymin, xmax, ymax = aabb(shell.polygon)
        bx0, by0, bx1, by1 = p.bounds
        assert (bx0 - xmin) == pytest.approx(SHELL_MARGIN_MM)
        assert (xmax - bx1) == pytest.approx(SHELL_MARGIN_MM)
        assert (by0 - ymin) == pytest.approx(SHELL_MARGIN_MM)
        assert (ymax - by1) == pytest.approx(SHELL_MARGIN_MM)

    def test_hull_contains_offset_corners(self):
        p = make_placement("device d\nkey A at 0 0\nkey B at 40 30 rot 45\n")
        shell = build_shell(p, "hull")
        assert shell_contains(shell, p)
        # hull area is at least the rectangle of the raw bounds
        assert polygon_area(shell.polygon) > 0

    def test_union_policy_requires_contiguous_keys(self):
        p = make_placement("device d\nkey A at 0 0\nkey B at 100 0\n")
        with pytest.raises(PlacementError):
            build_shell(p, "none")

    def test_union_policy_joined_row(self):
        p = make_placement("device d\nrow 0 offset 0 keys A B C\n")
        shell = build_shell(p, "none")
        assert shell_contains(shell, p)
        footprint_area = sum(
            ShapelyPolygon(pk.footprint_polygon()).area for pk in p.placed)
        assert polygon_area(shell.polygon) == pytest.approx(footprint_area)

    def test_unknown_policy_rejected(self):
        p = make_placement("device d\nkey A at 0 0\n")
        with pytest.raises(PlacementError):
            build_shell(p, "blob")

    @settings(max_examples=60, deadline=None)
    @given(poses=st.lists(key_pose, min_size=1, max_size=5))
    def test_shells_always_contain_keys(self, poses):
        p = synthetic_placement(poses)
        for policy in ("rectangle", "hull"):
            assert shell_contains(build_shell(p, policy), p)
