"""Layout language: parsing, defaults, validation, and serialization."""

import pytest

from keyforge.frontend import (
    DEFAULT_KEYCAP_WIDTH_MM,
    ExplicitPos,
    GridPos,
    KEY_GAP_MM,
    parse_device_spec,
    resolve_defaults,
    serialize_device_spec,
    validate_spec,
)

MINIMAL = """\
device demo
key A at 0 0
key B at 18.8 0
"""


def parse_ok(source):
    spec, diags = parse_device_spec(source)
    assert spec is not None, [str(d) for d in diags]
    assert not any(d.severity == "error" for d in diags)
    return spec


class TestParsing:
    def test_minimal_layout(self):
        spec = parse_ok(MINIMAL)
        assert spec.name == "demo"
        assert [k.id for k in spec.keys] == ["A", "B"]
        assert spec.controller.board
        assert spec.shell_policy == "rectangle"

    def test_grid_rows_resolve_to_pitch(self):
        spec = parse_ok("device g\nrow 0 offset 0 keys A B C\n")
        pitch = DEFAULT_KEYCAP_WIDTH_MM + KEY_GAP_MM
        assert pitch == pytest.approx(18.8)
        positions = [k.position for k in spec.keys]
        assert all(isinstance(p, GridPos) for p in positions)
        assert [p.col for p in positions] == [0, 1, 2]

    def test_explicit_position_with_rotation(self):
        spec = parse_ok("device r\nkey A at 10 -5.5 rot 45\n")
        pos = spec.keys[0].position
        assert isinstance(pos, ExplicitPos)
        assert (pos.x_mm, pos.y_mm, pos.rotation_deg) == (10.0, -5.5, 45.0)

    def test_defaults_and_overrides(self):
        spec = parse_ok(
            "device d\n"
            "default kind digital travel short stiffness high\n"
            "key A at 0 0\n"
            "key B at 40 0 kind analog travel long stiffness low\n")
        a, b = spec.keys
        assert (a.kind, a.travel_class, a.stiffness_class) == ("digital", "short", "high")
        assert (b.kind, b.travel_class, b.stiffness_class) == ("analog", "long", "low")

    def test_comments_and_blank_lines_ignored(self):
        spec = parse_ok("# heading\n\ndevice c\n# note\nkey A at 0 0\n")
        assert len(spec.keys) == 1

    @pytest.mark.parametrize("source", [
        "",                               # no device, no keys
        "device x\n",                     # no keys
        "device x\nkey A at 0\n",         # missing coordinate
        "device x\nkey A at a b\n",       # non-numeric coordinate
        "device x\nkey A at 0 0 kind warp\n",
        "device x\nrow 0 offset 0 keys A A\n",  # duplicate id in a row
        "frobnicate\n",                   # unknown statement
    ])
    def test_errors_reject_spec(self, source):
        spec, diags = parse_device_spec(source)
        assert spec is None
        assert any(d.severity == "error" for d in diags)

    def test_diagnostics_carry_line_numbers(self):
        spec, diags = parse_device_spec("device x\nkey A at 0 0\nbogus line\n")
        assert spec is None
        errors = [d for d in diags if d.severity == "error"]
        assert errors and errors[0].line == 3


class TestDefaults:
    def test_single_letter_key_gets_glyph_legend(self):
        spec = parse_ok("device d\nkey Q at 0 0\n")
        legend = spec.keys[0].legend
        assert legend.mode == "text_glyph"
        assert legend.payload == "Q"
        assert legend.relief_height_mm > 0

    def test_multi_letter_key_defaults_blank(self):
        spec = parse_ok("device d\nkey SPACE at 0 0\n")
        assert spec.keys[0].legend.mode == "blank"

    def test_resolve_defaults_idempotent(self):
        spec = parse_ok(MINIMAL)
        assert resolve_defaults(spec) == spec


class TestValidation:
    def test_overlapping_footprints_flagged(self):
        spec = parse_ok("device d\nkey A at 0 0\nkey B at 5 0\n")
        diags = validate_spec(spec)
        assert any("overlap" in d.message for d in diags)

    def test_repeated_key_statement_refines(self):
        spec = parse_ok("device d\nrow 0 offset 0 keys A B\n"
                        "key A ladder bank\nkey B ladder bank\n")
        assert [k.ladder_group for k in spec.keys] == ["bank", "bank"]

    def test_pin_budget_enforced(self):
        keys = "\n".join(f"key K{i} at {i * 19} 0" for i in range(40))
        spec = parse_ok(f"device big\ncontroller flora\n{keys}\n")
        diags = validate_spec(spec)
        assert any("budget" in d.message for d in diags)

    def test_ladder_lifts_pin_budget(self):
        keys = "\n".join(f"key K{i} at {i * 19} 0 ladder bank"
                         for i in range(8))
        spec = parse_ok(f"device big\ncontroller flora\n{keys}\n")
        assert all(k.ladder_group == "bank" for k in spec.keys)

    def test_ladder_restricted_to_digital_keys(self):
        spec = parse_ok("device d\nkey A at 0 0 kind analog ladder bank\n")
        diags = validate_spec(spec)
        assert any("ladder" in d.message for d in diags)


class TestSerialization:
    @pytest.mark.parametrize("source", [
        MINIMAL,
        "device g\ncontroller flora socket\nshell hull\n"
        "row 0 offset 4.7 keys A B C\n"
        "key Z at 60 0 rot 30 kind analog travel long stiffness low "
        "legend braille z\n",
    ])
    def test_round_trip_fixed_point(self, source):
        spec = parse_ok(source)
        text = serialize_device_spec(spec)
        again = parse_ok(text)
        assert again == spec
        assert serialize_device_spec(again) == text

    def test_bundled_layouts_round_trip(self, device_sources):
        for name, source in device_sources.items():
            spec = parse_ok(source)
            assert parse_ok(serialize_device_spec(spec)) == spec, name
