"""End-to-end pipeline behavior: artifacts, determinism, atomicity, CLI."""

import json

import pytest

from keyforge import mesh, pipeline
from keyforge.cli import main
from keyforge.pipeline import (
    CompileError,
    EXIT_OK,
    EXIT_SPEC_ERROR,
    compile_device,
    compile_to_directory,
    output_names,
)

GOOD = """\
device tiny
controller uno
key A at 0 0
key B at 18.8 0
"""

BAD_SYNTAX = "device broken\nkey A at\n"
BAD_OVERLAP = "device broken\nkey A at 0 0\nkey B at 3 0\n"


class TestCompileDevice:
    def test_produces_all_sections(self):
        result = compile_device(GOOD)
        rep = result.report
        assert rep["device"] == "tiny"
        assert rep["key_count"] == 2
        assert rep["meshes"]["PLA"]["watertight"]
        assert rep["meshes"]["cPLA"]["watertight"]
        assert result.verification.ok

    @pytest.mark.parametrize("source,code", [
        (BAD_SYNTAX, EXIT_SPEC_ERROR),
        (BAD_OVERLAP, EXIT_SPEC_ERROR),
    ])
    def test_spec_errors_carry_exit_code(self, source, code):
        with pytest.raises(CompileError) as err:
            compile_device(source)
        assert err.value.exit_code == code


class TestArtifacts:
    def test_output_naming(self):
        names = output_names("tiny")
        assert names == {
            "pla": "tiny_pla.stl",
            "cpla": "tiny_cpla.stl",
            "report": "tiny_report.json",
            "svg": "tiny_preview.svg",
        }

    def test_compile_to_directory_writes_artifact_set(self, tmp_path):
        result = compile_to_directory(GOOD, tmp_path)
        files = sorted(p.name for p in tmp_path.iterdir())
        assert files == ["tiny_cpla.stl", "tiny_pla.stl",
                        "tiny_preview.svg", "tiny_report.json"]
        assert set(result.outputs) == set(files)

    def test_stl_files_read_back(self, tmp_path):
        compile_to_directory(GOOD, tmp_path)
        for stem in ("tiny_pla.stl", "tiny_cpla.stl"):
            m = mesh.read_stl(tmp_path / stem)
            assert m.triangle_count > 0
            assert (tmp_path / stem).stat().st_size == \
                84 + 50 * m.triangle_count

    def test_report_is_valid_json(self, tmp_path):
        compile_to_directory(GOOD, tmp_path)
        rep = json.loads((tmp_path / "tiny_report.json").read_text())
        assert rep["key_count"] == 2
        assert [k["id"] for k in rep["keys"]] == ["A", "B"]

    def test_svg_preview_is_wellformed(self, tmp_path):
        import xml.etree.ElementTree as ET
        compile_to_directory(GOOD, tmp_path)
        root = ET.parse(tmp_path / "tiny_preview.svg").getroot()
        assert root.tag.endswith("svg")


class TestDeterminism:
    def test_repeated_compiles_byte_identical(self, tmp_path, device_sources):
        source = device_sources["gamepad"]
        a, b = tmp_path / "a", tmp_path / "b"
        compile_to_directory(source, a)
        compile_to_directory(source, b)
        for f in sorted(p.name for p in a.iterdir()):
            assert (a / f).read_bytes() == (b / f).read_bytes(), f


class TestAtomicity:
    def test_invalid_spec_writes_nothing(self, tmp_path):
        out = tmp_path / "out"
        with pytest.raises(CompileError):
            compile_to_directory(BAD_OVERLAP, out)
        assert not out.exists() or list(out.iterdir()) == []

    def test_failure_mid_write_leaves_no_artifacts(self, tmp_path, monkeypatch):
        calls = {"n": 0}
        real = pipeline.write_stl

        def flaky(m, destination):
            calls["n"] += 1
            if calls["n"] == 2:
                raise OSError("disk full")
            return real(m, destination)

        monkeypatch.setattr(pipeline, "write_stl", flaky)
        with pytest.raises(OSError):
            compile_to_directory(GOOD, tmp_path)
        assert list(tmp_path.iterdir()) == []

    def test_existing_files_untouched_by_failed_compile(self, tmp_path):
        keep = tmp_path / "keep.txt"
        keep.write_text("precious")
        with pytest.raises(CompileError):
            compile_to_directory(BAD_SYNTAX, tmp_path)
        assert keep.read_text() == "precious"


class TestCli:
    def write_spec(self, tmp_path, text):
        p = tmp_path / "layout.device"
        p.write_text(text)
        return str(p)

    def test_compile_verb(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path, GOOD)
        out = tmp_path / "out"
        assert main(["compile", spec, "--out", str(out)]) == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "tiny_cpla.stl", "tiny_pla.stl", "tiny_preview.svg",
            "tiny_report.json"]
        assert "wrote" in capsys.readouterr().out

    def test_compile_verb_failure(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path, BAD_SYNTAX)
        assert main(["compile", spec, "--out", str(tmp_path)]) == EXIT_SPEC_ERROR
        assert "error" in capsys.readouterr().err

    def test_validate_verb(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path, GOOD)
        assert main(["validate", spec]) == EXIT_OK
        assert "ok: tiny (2 keys)" in capsys.readouterr().out

    def test_validate_verb_rejects(self, tmp_path, capsys):
        spec = self.write_spec(tmp_path, BAD_OVERLAP)
        assert main(["validate", spec]) == EXIT_SPEC_ERROR
        assert "invalid" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["validate", str(tmp_path / "nope.device")])
        assert exc.value.code == EXIT_SPEC_ERROR

    def test_parts_list_verb(self, capsys):
        assert main(["parts", "list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "digital" in out and "analog" in out and "piano" in out

    def test_version_verb(self, capsys):
        assert main(["version"]) == EXIT_OK
        assert capsys.readouterr().out.strip()

    def test_bundled_layouts_validate(self, tmp_path, device_sources):
        for name, source in device_sources.items():
            spec = self.write_spec(tmp_path, source)
            assert main(["validate", spec]) == EXIT_OK, name
