"""End-to-end compilation: layout text in, printable artifacts out.

Stages run in a fixed order -- parse, validate, place, shell, netlist,
route, verify, assemble, report -- and every stage is deterministic, so
compiling the same source twice yields byte-identical outputs.  Files are
written to a scratch directory first and moved into place at the end, so
a failed compile never leaves a partial output set behind.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import parts
from .assemble import AssemblyError, AssemblyResult, assemble_device_meshes
from .frontend import (DeviceSpec, Diagnostic, parse_device_spec,
                       resolve_defaults, validate_spec)
from .mesh import check_watertight, write_stl
from .netlist import NetlistError, build_netlist
from .placement import (Placement, PlacementError, ShellOutline, build_shell,
                        detect_collisions, place_keys, shell_contains)
from .report import build_report, emit_svg_preview, report_json
from .router import RoutePlan, RoutingError, route_nets
from .verify import VerificationReport, verify_routes

# exit codes for the command line front end
EXIT_OK = 0
EXIT_SPEC_ERROR = 1      # the input layout is invalid
EXIT_BUILD_ERROR = 2     # the layout is valid but could not be realized


class CompileError(Exception):
    def __init__(self, message: str, exit_code: int,
                 diagnostics: list[Diagnostic] | None = None):
        super().__init__(message)
        self.exit_code = exit_code
        self.diagnostics = diagnostics or []


@dataclass
class CompileResult:
    spec: DeviceSpec
    placement: Placement
    shell: ShellOutline
    netlist: object
    plan: RoutePlan
    verification: VerificationReport
    assembly: AssemblyResult
    report: dict
    diagnostics: list[Diagnostic] = field(default_factory=list)
    outputs: dict[str, Path] = field(default_factory=dict)


def load_and_validate(source: str) -> tuple[DeviceSpec, list[Diagnostic]]:
    """Parse + whole-document validation; raises CompileError on errors."""
    spec, diags = parse_device_spec(source)
    if spec is None:
        raise CompileError("layout has syntax errors", EXIT_SPEC_ERROR, diags)
    spec = resolve_defaults(spec)
    diags = diags + validate_spec(spec)
    if any(d.severity == "error" for d in diags):
        raise CompileError("layout failed validation", EXIT_SPEC_ERROR, diags)
    return spec, diags


def compile_device(source: str,
                   force_unwatertight: bool = False) -> CompileResult:
    """Run the whole pipeline in memory; no files are written."""
    spec, diags = load_and_validate(source)

    blueprints = {k.id: parts.blueprint_for(k) for k in spec.keys}
    placement = place_keys(spec, blueprints)
    collisions = detect_collisions(placement)
    if collisions:
        raise CompileError(
            "key footprints overlap: "
            + "; ".join(str(c) for c in collisions), EXIT_SPEC_ERROR,
            [Diagnostic("error", 0, str(c)) for c in collisions])
    shell = build_shell(placement, spec.shell_policy)
    if not shell_contains(shell, placement):
        raise CompileError("shell outline does not contain every key",
                           EXIT_BUILD_ERROR)

    try:
        netlist = build_netlist(placement, spec)
        plan = route_nets(netlist, placement, shell, spec)
    except (NetlistError, RoutingError, PlacementError) as exc:
        raise CompileError(str(exc), EXIT_BUILD_ERROR) from exc

    verification = verify_routes(plan, netlist)
    if not verification.ok:
        lines = ([str(v) for v in verification.violations]
                 + verification.problems
                 + [f"net '{n}' does not reach terminal at "
                    f"({p[0]:.1f}, {p[1]:.1f})"
                    for n, p in verification.unreached_terminals]
                 + [f"net '{n}' is not fully connected"
                    for n, okc in sorted(verification.connected.items())
                    if not okc])
        raise CompileError("routing verification failed: "
                           + "; ".join(lines), EXIT_BUILD_ERROR)

    try:
        assembly = assemble_device_meshes(placement, shell, plan, spec)
    except AssemblyError as exc:
        raise CompileError(str(exc), EXIT_BUILD_ERROR) from exc

    warnings: list[str] = []
    for mesh in (assembly.pla, assembly.cpla):
        wt = check_watertight(mesh)
        if not wt.ok and mesh.triangle_count:
            msg = (f"{mesh.material} mesh is not watertight "
                   f"({len(wt.bad_edges)} bad edges, "
                   f"{wt.degenerate_triangles} degenerate triangles)")
            if not force_unwatertight:
                raise CompileError(msg, EXIT_BUILD_ERROR)
            warnings.append(msg)

    rep = build_report(spec, placement, shell, netlist, plan, assembly,
                       warnings=warnings)
    return CompileResult(spec=spec, placement=placement, shell=shell,
                         netlist=netlist, plan=plan,
                         verification=verification, assembly=assembly,
                         report=rep, diagnostics=diags)


def output_names(device_name: str) -> dict[str, str]:
    return {
        "pla": f"{device_name}_pla.stl",
        "cpla": f"{device_name}_cpla.stl",
        "report": f"{device_name}_report.json",
        "svg": f"{device_name}_preview.svg",
    }


def compile_to_directory(source: str, out_dir: str | os.PathLike,
                         svg: bool = True, report: bool = True,
                         force_unwatertight: bool = False) -> CompileResult:
    """Compile and write the artifact set atomically into ``out_dir``."""
    result = compile_device(source, force_unwatertight=force_unwatertight)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = output_names(result.spec.name)

    with tempfile.TemporaryDirectory(dir=out) as tmp:
        staged: list[tuple[Path, Path]] = []

        def stage(kind: str) -> Path:
            p = Path(tmp) / names[kind]
            staged.append((p, out / names[kind]))
            return p

        write_stl(result.assembly.pla, stage("pla"))
        write_stl(result.assembly.cpla, stage("cpla"))
        if report:
            stage("report").write_text(report_json(result.report))
        if svg:
            stage("svg").write_text(emit_svg_preview(
                result.spec, result.placement, result.shell, result.plan))
        for src, dst in staged:
            os.replace(src, dst)
            result.outputs[dst.name] = dst
    return result
