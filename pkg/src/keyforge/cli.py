"""Command line front end.

Subcommands:
  compile <spec> --out <dir>   build STL pair, report JSON, SVG preview
  validate <spec>              parse + validate, print diagnostics
  parts list                   enumerate the key construction library
  version                      print the package version
"""

from __future__ import annotations

import argparse
import sys
from importlib import metadata
from pathlib import Path

from . import parts
from .frontend import Diagnostic, parse_device_spec, resolve_defaults, validate_spec
from .pipeline import (EXIT_BUILD_ERROR, EXIT_OK, EXIT_SPEC_ERROR,
                       CompileError, compile_to_directory)


def _read_source(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read '{path}': {exc}", file=sys.stderr)
        raise SystemExit(EXIT_SPEC_ERROR)


def _print_diagnostics(diags: list[Diagnostic], stream=sys.stderr) -> None:
    for d in sorted(diags, key=lambda d: (d.line, d.severity, d.message)):
        print(f"{d.severity}: line {d.line}: {d.message}", file=stream)


def cmd_compile(args) -> int:
    source = _read_source(args.spec)
    try:
        result = compile_to_directory(
            source, args.out, svg=args.svg, report=not args.no_report,
            force_unwatertight=args.force_unwatertight)
    except CompileError as exc:
        _print_diagnostics(exc.diagnostics)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    _print_diagnostics(result.diagnostics)
    for name in sorted(result.outputs):
        print(f"wrote {result.outputs[name]}")
    return EXIT_OK


def cmd_validate(args) -> int:
    source = _read_source(args.spec)
    spec, diags = parse_device_spec(source)
    if spec is not None:
        diags = diags + validate_spec(resolve_defaults(spec))
    _print_diagnostics(diags)
    if spec is None or any(d.severity == "error" for d in diags):
        print("invalid", file=sys.stderr)
        return EXIT_SPEC_ERROR
    print(f"ok: {spec.name} ({len(spec.keys)} keys)")
    return EXIT_OK


def cmd_parts(args) -> int:
    if args.action != "list":
        print(f"error: unknown parts action '{args.action}'", file=sys.stderr)
        return EXIT_SPEC_ERROR
    print("digital (cantilever snap key)")
    for travel, mm in sorted(parts.DIGITAL_TRAVEL_MM.items(), key=lambda i: i[1]):
        for stiff, lines in sorted(parts.LINE_COUNT.items()):
            t = parts.effective_spring_thickness(lines)
            print(f"  {travel}/{stiff}: travel {mm} mm, {lines} lines, "
                  f"effective thickness {t:.3f} mm")
    print("analog (coil spring, capacitive)")
    for travel, mm in sorted(parts.ANALOG_TRAVEL_MM.items(), key=lambda i: i[1]):
        for stiff, wire in sorted(parts.COIL_THICKNESS_MM.items()):
            print(f"  {travel}/{stiff}: travel {mm} mm, wire {wire} mm")
    print("piano (hinged lever)")
    for travel, mm in sorted(parts.PIANO_LENGTH_MM.items(), key=lambda i: i[1]):
        print(f"  {travel}: lever length {mm} mm")
    return EXIT_OK


def cmd_version(args) -> int:
    try:
        print(metadata.version("keyforge"))
    except metadata.PackageNotFoundError:
        print("unknown")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="keyforge",
        description="Compile tactile input device layouts into dual-material "
                    "print files")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a layout to print artifacts")
    c.add_argument("spec", help="layout file")
    c.add_argument("--out", default=".", help="output directory")
    c.add_argument("--svg", action="store_true", default=True,
                   help="emit the SVG preview (default on)")
    c.add_argument("--no-svg", dest="svg", action="store_false")
    c.add_argument("--no-report", action="store_true",
                   help="skip the JSON engineering report")
    c.add_argument("--force-unwatertight", action="store_true",
                   help="write meshes even if the watertight check fails")
    c.set_defaults(func=cmd_compile)

    v = sub.add_parser("validate", help="check a layout without compiling")
    v.add_argument("spec", help="layout file")
    v.set_defaults(func=cmd_validate)

    pl = sub.add_parser("parts", help="inspect the key construction library")
    pl.add_argument("action", choices=["list"])
    pl.set_defaults(func=cmd_parts)

    ver = sub.add_parser("version", help="print the package version")
    ver.set_defaults(func=cmd_version)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
