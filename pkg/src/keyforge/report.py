"""Engineering report (JSON) and SVG preview generation.

The report is fully deterministic: dictionaries are emitted with sorted
keys and every float is rounded to at most 9 significant digits, so two
runs over the same input are byte-identical.
"""

from __future__ import annotations

import json
import math

from . import electrical, mechanics, parts
from .assemble import AssemblyResult
from .frontend import DeviceSpec
from .geometry import rect_corners
from .mesh import check_watertight
from .netlist import Netlist
from .placement import Placement, ShellOutline
from .router import RoutePlan

SLICER_SETTINGS = {
    "layer_height_mm": 0.2,
    "infill_percent": 90,
    "materials": {
        "structural": "PLA",
        "conductive": "cPLA (carbon-filled, ~200 ohm-cm)",
    },
}

CAPACITANCE_CURVE_POINTS = 9


def _sig(x):
    """Round floats to 9 significant digits, recursively."""
    if isinstance(x, float):
        if math.isfinite(x):
            return float(f"{x:.9g}")
        return None
    if isinstance(x, dict):
        return {k: _sig(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_sig(v) for v in x]
    return x


def _key_mechanics(pk) -> dict:
    bp = pk.blueprint
    k = pk.key
    if bp.kind == "digital":
        est = mechanics.preset_activation_force(k.travel_class, k.stiffness_class)
        strain = mechanics.preset_strain(k.travel_class, k.stiffness_class)
        return {
            "source": est.source,
            "force_newtons": est.mean_newtons,
            "force_tolerance_newtons": est.tol_newtons,
            "force_lbf": est.mean_lbf,
            "force_tolerance_lbf": est.tol_lbf,
            "root_strain": strain,
            "strain_limit": mechanics.STRAIN_LIMIT,
            "strain_ok": strain <= mechanics.STRAIN_LIMIT,
        }
    if bp.kind == "analog":
        p = mechanics.CoilParams(
            shear_modulus_mpa=mechanics.DEFAULT_SHEAR_MODULUS_MPA,
            wire_thickness_mm=bp.spring.coil_thickness_mm,
            mean_diameter_mm=bp.spring.mean_diameter_mm,
            active_turns=bp.spring.turns)
        rate = mechanics.coil_spring_rate(p)
        return {
            "source": "coil-model",
            "spring_rate_n_per_mm": rate,
            "force_newtons": rate * bp.travel_mm,
            "note": "analytic model; printed-material stiffness varies",
        }
    # piano: living-hinge bending model
    p = mechanics.BeamParams(
        elastic_modulus_mpa=mechanics.DEFAULT_MODULUS_MPA,
        length_mm=bp.spring.length_mm,
        width_mm=bp.spring.width_mm,
        thickness_mm=bp.spring.effective_thickness_mm,
        deflection_mm=bp.travel_mm)
    return {
        "source": "beam-model",
        "force_newtons": mechanics.beam_activation_force(p),
        "root_strain": mechanics.max_bending_strain(p),
        "strain_limit": mechanics.STRAIN_LIMIT,
        "note": "analytic model; printed-material stiffness varies",
    }


def _capacitance_entry(pk) -> dict:
    bp = pk.blueprint
    area = math.pi * (parts.PLATE_DIAMETER_MM / 2.0) ** 2
    gap_free = bp.travel_mm + electrical.CONTACT_OFFSET_MM
    model = electrical.calibrate_capacitance_model(area, gap_free)
    curve = []
    for i in range(CAPACITANCE_CURVE_POINTS):
        t = i / (CAPACITANCE_CURVE_POINTS - 1)
        gap = gap_free + (electrical.CONTACT_OFFSET_MM - gap_free) * t
        curve.append({
            "gap_mm": gap,
            "capacitance_farads": electrical.plate_capacitance(area, gap),
        })
    return {
        "electrode_area_mm2": area,
        "gap_free_mm": gap_free,
        "thresholds_farads": list(model.thresholds),
        "classes": ["none", "hover", "partial", "full"],
        "curve": curve,
    }


def build_report(spec: DeviceSpec, placement: Placement, shell: ShellOutline,
                 netlist: Netlist, plan: RoutePlan, assembly: AssemblyResult,
                 warnings: list[str] | None = None) -> dict:
    keys = []
    for pk in placement.placed:
        k = pk.key
        bp = pk.blueprint
        entry = {
            "id": k.id,
            "kind": bp.kind,
            "travel_class": k.travel_class,
            "stiffness_class": k.stiffness_class,
            "travel_mm": bp.travel_mm,
            "position_mm": {"x": pk.x_mm, "y": pk.y_mm,
                            "rotation_deg": pk.rotation_deg},
            "footprint_mm": list(bp.footprint_mm),
            "legend": {"mode": k.legend.mode, "payload": str(k.legend.payload)}
            if k.legend else {"mode": "blank", "payload": ""},
            "ladder_group": k.ladder_group,
            "mechanics": _key_mechanics(pk),
        }
        if bp.spring.kind == "cantilever" and bp.kind == "digital":
            entry["spring"] = {
                "kind": "cantilever",
                "line_count": bp.spring.line_count,
                "nominal_thickness_mm": bp.spring.nominal_thickness_mm,
                "effective_thickness_mm": bp.spring.effective_thickness_mm,
                "print_angle_deg": bp.spring.print_angle_deg,
                "contact_gap_mm": bp.spring.gap_mm,
            }
        elif bp.kind == "analog":
            entry["spring"] = {
                "kind": "coil",
                "wire_thickness_mm": bp.spring.coil_thickness_mm,
                "mean_diameter_mm": bp.spring.mean_diameter_mm,
                "turns": bp.spring.turns,
                "free_height_mm": bp.spring.free_height_mm,
            }
            entry["capacitance"] = _capacitance_entry(pk)
        keys.append(entry)

    cross_section = plan.rules.trace_size_mm ** 2
    nets = []
    for net in netlist.nets:
        length = plan.net_lengths.get(net.id, 0.0)
        nets.append({
            "id": net.id,
            "class": net.net_class,
            "pin": netlist.pin_assignments.get(net.id),
            "terminals": len(net.terminals),
            "trace_length_mm": length,
            "resistance_ohms": electrical.trace_resistance(length, cross_section),
        })

    ladders = {}
    for group, (design, members) in sorted(plan.ladders.items()):
        ladders[group] = {
            "vcc_volts": design.vcc_volts,
            "pulldown_ohms": design.pulldown_ohms,
            "adc_bits": design.adc_bits,
            "min_separation_counts": design.min_separation_counts,
            "designed": [{
                "key": e.key_id,
                "trace_length_mm": e.trace_length_mm,
                "resistance_ohms": e.resistance_ohms,
                "predicted_counts": e.predicted_counts,
            } for e in design.entries],
            "realized": [{
                "key": m.key_id,
                "escape_mm": m.escape_mm,
                "meander_mm": m.meander_mm,
                "total_mm": m.total_mm,
                "resistance_ohms": m.resistance_ohms,
                "predicted_counts": m.predicted_counts,
            } for m in members],
        }

    resistors = [{
        "id": rm.id,
        "net": rm.net_id,
        "bridges": list(rm.bridges) if rm.bridges else None,
        "target_ohms": rm.target_ohms,
        "realized_ohms": rm.realized_ohms,
        "length_mm": rm.length_mm,
    } for rm in plan.resistors]

    meshes = {}
    for mesh in (assembly.pla, assembly.cpla):
        wt = check_watertight(mesh)
        meshes[mesh.material] = {
            "triangles": mesh.triangle_count,
            "volume_mm3": wt.signed_volume,
            "watertight": wt.ok,
        }

    all_warnings = list(plan.warnings) + list(assembly.warnings)
    if warnings:
        all_warnings += list(warnings)

    report = {
        "device": spec.name,
        "controller": {"board": spec.controller.board,
                       "socket": spec.controller.socket},
        "shell_policy": spec.shell_policy,
        "key_count": len(placement.placed),
        "keys": keys,
        "nets": nets,
        "pin_map": dict(sorted(netlist.pin_assignments.items())),
        "ladders": ladders,
        "printed_resistors": resistors,
        "trace_cross_section_mm2": cross_section,
        "resistivity_ohm_cm": electrical.DEFAULT_RESISTIVITY_OHM_CM,
        "meshes": meshes,
        "slicer": SLICER_SETTINGS,
        "warnings": sorted(all_warnings),
    }
    return _sig(report)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# SVG preview

_LAYER_COLORS = {"floor": "#1565c0", "ridge": "#c62828"}


def emit_svg_preview(spec: DeviceSpec, placement: Placement,
                     shell: ShellOutline, plan: RoutePlan) -> str:
    """Plan-view preview, one SVG unit per millimeter.

    Ridge traces draw red, floor traces blue; resistor meanders green.
    The y axis is flipped so +y (device rear) points up.
    """
    xs = [pt[0] for pt in shell.polygon] + [plan.apron_mm[0], plan.apron_mm[2]]
    ys = [pt[1] for pt in shell.polygon] + [plan.apron_mm[1], plan.apron_mm[3]]
    if plan.front_apron_mm:
        xs += [plan.front_apron_mm[0], plan.front_apron_mm[2]]
        ys += [plan.front_apron_mm[1], plan.front_apron_mm[3]]
    pad = 5.0
    x0, x1 = min(xs) - pad, max(xs) + pad
    y0, y1 = min(ys) - pad, max(ys) + pad
    w, h = x1 - x0, y1 - y0

    def pts_attr(points):
        return " ".join(f"{px:.3f},{py:.3f}" for px, py in points)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}mm" '
        f'height="{h:.1f}mm" viewBox="{x0:.3f} {-y1:.3f} {w:.3f} {h:.3f}">',
        f'<g transform="scale(1,-1)">',
        f'<title>{spec.name}</title>',
    ]
    aprons = [plan.apron_mm]
    if plan.front_apron_mm:
        aprons.append(plan.front_apron_mm)
    for ax0, ay0, ax1, ay1 in aprons:
        out.append(f'<rect x="{ax0:.3f}" y="{ay0:.3f}" width="{ax1 - ax0:.3f}" '
                   f'height="{ay1 - ay0:.3f}" fill="#f4f4f4" stroke="#bbbbbb" '
                   'stroke-width="0.3"/>')
    out.append(f'<polygon points="{pts_attr(shell.polygon)}" fill="#fafafa" '
               'stroke="#444444" stroke-width="0.5"/>')

    for pk in placement.placed:
        foot = pk.footprint_polygon()
        cap = rect_corners(pk.x_mm, pk.y_mm, pk.blueprint.keycap_width_mm,
                           pk.blueprint.keycap_width_mm, pk.rotation_deg)
        out.append(f'<g id="key-{pk.key.id}">')
        out.append(f'<polygon points="{pts_attr(foot)}" fill="#e8eef7" '
                   'stroke="#6688aa" stroke-width="0.3"/>')
        out.append(f'<polygon points="{pts_attr(cap)}" fill="#ffffff" '
                   'stroke="#99aabb" stroke-width="0.3"/>')
        out.append(f'<text x="{pk.x_mm:.2f}" y="{-pk.y_mm:.2f}" '
                   'transform="scale(1,-1)" font-size="4" fill="#335577" '
                   f'text-anchor="middle" dominant-baseline="middle">'
                   f'{pk.key.id}</text>')
        out.append('</g>')

    for tr in plan.traces:
        color = _LAYER_COLORS[tr.layer]
        out.append(f'<polyline points="{pts_attr(tr.points)}" fill="none" '
                   f'stroke="{color}" stroke-width="{tr.width_mm:.2f}" '
                   'stroke-opacity="0.55" stroke-linejoin="round" '
                   'stroke-linecap="round"/>')
    for rm in plan.resistors:
        out.append(f'<polyline points="{pts_attr(rm.points)}" fill="none" '
                   f'stroke="#2e7d32" stroke-width="{plan.rules.trace_size_mm:.2f}" '
                   'stroke-opacity="0.55" stroke-linejoin="round" '
                   'stroke-linecap="round"/>')

    if plan.socket:
        sp = plan.socket
        out.append(f'<circle cx="{sp.center[0]:.3f}" cy="{sp.center[1]:.3f}" '
                   f'r="{sp.ring_diameter_mm / 2:.3f}" fill="none" '
                   'stroke="#888888" stroke-width="0.4" stroke-dasharray="2,2"/>')
        for pad_ in sp.pads:
            fill = "#c62828" if pad_.net_id else "#aaaaaa"
            out.append(f'<circle cx="{pad_.position[0]:.3f}" '
                       f'cy="{pad_.position[1]:.3f}" '
                       f'r="{sp.cone_base_mm / 2:.3f}" fill="{fill}" '
                       'fill-opacity="0.7"/>')

    for nid, (ex, ey) in sorted(plan.exit_points.items()):
        out.append(f'<circle cx="{ex:.3f}" cy="{ey:.3f}" r="1.6" '
                   'fill="none" stroke="#555555" stroke-width="0.3"/>')

    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
