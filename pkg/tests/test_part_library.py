"""Key construction library: spring sizing, blueprints, and legends."""

import math

import pytest

from keyforge import parts
from keyforge.frontend import LegendSpec
from keyforge.parts import (
    analog_key_blueprint,
    blueprint_for,
    digital_key_blueprint,
    effective_spring_thickness,
    legend_polygons,
    piano_key_blueprint,
)


class TestSpringThickness:
    def test_three_line_value(self):
        assert effective_spring_thickness(3) == pytest.approx(0.8485, abs=5e-5)
        assert round(effective_spring_thickness(3), 2) == 0.85

    def test_four_line_value(self):
        assert effective_spring_thickness(4) == pytest.approx(1.1314, abs=5e-5)
        assert round(effective_spring_thickness(4), 2) == 1.13

    def test_projection_of_nominal_wall(self):
        # n lines of 0.4 mm printed at 45 degrees project to n*0.4/sqrt(2)
        for n in (2, 3, 4, 5):
            assert effective_spring_thickness(n) == pytest.approx(
                n * parts.LINE_WIDTH_MM / math.sqrt(2.0), rel=1e-12)


ALL_CLASSES = [(t, s) for t in ("short", "medium", "long")
               for s in ("low", "high")]


class TestDigitalBlueprint:
    @pytest.mark.parametrize("travel,stiff", ALL_CLASSES)
    def test_travel_and_lines(self, travel, stiff):
        bp = digital_key_blueprint(travel, stiff)
        assert bp.travel_mm == parts.DIGITAL_TRAVEL_MM[travel]
        assert bp.spring.line_count == parts.LINE_COUNT[stiff]
        assert bp.spring.effective_thickness_mm == pytest.approx(
            effective_spring_thickness(bp.spring.line_count))

    def test_has_signal_and_return_terminals(self):
        bp = digital_key_blueprint("short", "high")
        roles = sorted({t.net_role for t in bp.terminals})
        assert roles == ["return", "signal"]

    def test_conductive_parts_present(self):
        bp = digital_key_blueprint("short", "high")
        roles = {b.role for b in bp.bodies if b.material == parts.CPLA}
        assert "cantilever_spring" in roles
        assert "return_electrode" in roles

    def test_footprint_is_keycap_sized(self):
        bp = digital_key_blueprint("medium", "low")
        w, d = bp.footprint_mm
        assert w == d == pytest.approx(parts.DEFAULT_KEYCAP_WIDTH_MM + 3.3)


class TestAnalogBlueprint:
    @pytest.mark.parametrize("travel,stiff", ALL_CLASSES)
    def test_travel_table(self, travel, stiff):
        bp = analog_key_blueprint(travel, stiff)
        assert bp.travel_mm == parts.ANALOG_TRAVEL_MM[travel]

    def test_single_sense_terminal(self):
        bp = analog_key_blueprint("long", "low")
        assert [t.net_role for t in bp.terminals] == ["capacitive"]

    def test_sense_plate_is_conductive(self):
        bp = analog_key_blueprint("long", "low")
        assert any(b.role == "plate_electrode" and b.material == parts.CPLA
                   for b in bp.bodies)


class TestPianoBlueprint:
    def test_hinge_dimensions(self):
        bp = piano_key_blueprint(parts.PIANO_LENGTH_MM["medium"], "low")
        hinges = [b for b in bp.bodies if b.role == "hinge"]
        assert hinges
        for h in hinges:
            z0, z1 = h.shape["z"]
            assert z1 - z0 == pytest.approx(parts.PIANO_HINGE_THICKNESS_MM)

    def test_lever_length_sets_footprint(self):
        short = piano_key_blueprint(parts.PIANO_LENGTH_MM["short"], "low")
        long_ = piano_key_blueprint(parts.PIANO_LENGTH_MM["long"], "low")
        assert long_.footprint_mm[1] > short.footprint_mm[1]


class TestBlueprintDispatch:
    def test_every_kind_builds(self, device_sources):
        from keyforge.frontend import parse_device_spec
        for source in device_sources.values():
            spec, _ = parse_device_spec(source)
            for key in spec.keys:
                bp = blueprint_for(key)
                assert bp.bodies
                assert bp.travel_mm > 0


class TestLegends:
    def test_braille_cell_dot_count(self):
        # braille 'y' raises dots 1, 3, 4, 5, 6
        polys = legend_polygons(LegendSpec(mode="braille", payload="y",
                                           relief_height_mm=0.6))
        assert len(polys) == 5

    def test_text_glyph_fits_keycap(self):
        half = parts.DEFAULT_KEYCAP_WIDTH_MM / 2.0
        for ch in "ABCXYZ019":
            for poly in legend_polygons(LegendSpec(
                    mode="text_glyph", payload=ch, relief_height_mm=0.6)):
                for (x, y) in poly:
                    assert abs(x) <= half and abs(y) <= half

    def test_blank_legend_is_empty(self):
        assert legend_polygons(LegendSpec(mode="blank")) == []

    def test_unknown_braille_char_rejected(self):
        with pytest.raises(Exception):
            legend_polygons(LegendSpec(mode="braille", payload="!",
                                       relief_height_mm=0.6))
