"""Parametric blueprints for the three key kinds.

Each blueprint is a fully dimensioned, deterministic description of one key
in its local frame: origin at the footprint center, +x to the right, +y
toward the device rear, +z up.  Bodies carry a shape record that the mesh
stage instantiates directly; no geometry is generated here.

Fixed dimensions follow the published design (keycap 15.5 mm, joined-base
gap 3.3 mm, 0.4 mm extrusion lines, 45 deg cantilever, travel presets);
everything the source design leaves open is a documented default below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .frontend import KEY_GAP_MM, DEFAULT_KEYCAP_WIDTH_MM, LegendSpec
from .geometry import Polygon, rect_corners

# ---------------------------------------------------------------------------
# constants

LINE_WIDTH_MM = 0.4             # FDM nozzle line width
PRINT_ANGLE_DEG = 45.0          # cantilever print angle (support-free)

DIGITAL_TRAVEL_MM = {"short": 0.5, "medium": 1.0, "long": 1.5}
ANALOG_TRAVEL_MM = {"short": 3.6, "medium": 8.64, "long": 13.72}
LINE_COUNT = {"low": 3, "high": 4}

# defaults the source design does not dimension
CANTILEVER_LENGTH_MM = 12.0
CANTILEVER_WIDTH_MM = 8.0
RETURN_BLOCK_MM = (8.0, 4.0, 6.0)      # x, y, z
BASE_HEIGHT_MM = 6.0
PLATE_DIAMETER_MM = 12.0
COIL_MEAN_DIAMETER_MM = 10.0
COIL_TURNS = 4
COIL_THICKNESS_MM = {"low": 1.2, "high": 1.6}
PIANO_HINGE_THICKNESS_MM = 0.8
PIANO_HINGE_LENGTH_MM = 4.0
PIANO_LENGTH_MM = {"short": 60.0, "medium": 100.0, "long": 160.0}

BRAILLE_DOT_DIAMETER_MM = 1.5
BRAILLE_DOT_PITCH_MM = 2.5
BRAILLE_RELIEF_MM = 0.6
TEXT_RELIEF_MM = 0.6
LEGEND_INSET_MM = 0.5
STROKE_WIDTH_MM = 0.8

TRACE_SIZE_MM = 2.54            # square conductive trace cross-section
FLOOR_Z = (0.0, 2.54)           # floor routing layer band
BASE_Z = (3.74, 6.0)            # non-conductive base slab band
RIDGE_Z = (6.0, 8.54)           # ridge routing layer band (top of base)

PLA = "PLA"
CPLA = "cPLA"

BODY_ROLES = ("keycap", "base", "cantilever_spring", "return_electrode",
              "coil_spring", "plate_electrode", "hinge", "contact_electrode")


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class BodyDef:
    role: str
    material: str
    shape: dict  # deterministic shape record consumed by meshgen


@dataclass(frozen=True)
class Terminal:
    net_role: str              # "signal" | "return" | "capacitive"
    position: tuple[float, float]
    layer_hint: str            # "ridge" | "floor"


@dataclass(frozen=True)
class SpringParams:
    kind: str
    gap_mm: float | None = None
    line_count: int | None = None
    nominal_thickness_mm: float | None = None
    effective_thickness_mm: float | None = None
    print_angle_deg: float | None = None
    length_mm: float | None = None
    width_mm: float | None = None
    free_height_mm: float | None = None
    coil_thickness_mm: float | None = None
    mean_diameter_mm: float | None = None
    turns: int | None = None


@dataclass(frozen=True)
class KeyBlueprint:
    kind: str
    footprint_mm: tuple[float, float]
    keycap_width_mm: float
    base_height_mm: float
    bodies: tuple[BodyDef, ...]
    terminals: tuple[Terminal, ...]
    spring: SpringParams
    travel_mm: float
    legend: LegendSpec = field(default_factory=LegendSpec)
    column_xy: tuple[float, float] = (0.0, 0.0)  # vertical conductor position
    bus_y_mm: float | None = None                # ridge bus centerline, local y


def effective_spring_thickness(line_count: int) -> float:
    """Physical bending thickness of a spring printed at 45 degrees.

    Nominal thickness is line_count x 0.4 mm; the inclined print foreshortens
    it by cos(45 deg): 3 lines -> 0.8485 mm, 4 lines -> 1.1314 mm.
    """
    if line_count < 1:
        raise ValueError("line_count must be >= 1")
    return line_count * LINE_WIDTH_MM * math.cos(math.radians(PRINT_ANGLE_DEG))


def _box(role: str, material: str, x0, x1, y0, y1, z0, z1) -> BodyDef:
    return BodyDef(role=role, material=material, shape={
        "type": "box", "x": (x0, x1), "y": (y0, y1), "z": (z0, z1)})


def digital_key_blueprint(travel_class: str, stiffness_class: str,
                          legend: LegendSpec | None = None,
                          keycap_width_mm: float = DEFAULT_KEYCAP_WIDTH_MM) -> KeyBlueprint:
    """Cantilever-spring digital key.

    The conductive part is a ridge bus bar spanning the full key width (the
    signal electrode, continuous across a row of joined keys) with the
    cantilever rising from it at 45 degrees, plus a rigid return electrode
    block under the spring tip with the travel-class gap between them.
    """
    legend = legend or LegendSpec()
    gap = DIGITAL_TRAVEL_MM[travel_class]
    lines = LINE_COUNT[stiffness_class]
    t_eff = effective_spring_thickness(lines)
    fp = keycap_width_mm + KEY_GAP_MM
    half = fp / 2.0

    bus_y = -half + 1.67 + TRACE_SIZE_MM / 2.0  # bus bar near the front edge
    spring_len = CANTILEVER_LENGTH_MM
    rise = spring_len * math.sin(math.radians(PRINT_ANGLE_DEG))
    run = spring_len * math.cos(math.radians(PRINT_ANGLE_DEG))
    anchor = (0.0, bus_y, RIDGE_Z[1] - 0.5)
    tip = (0.0, bus_y + run, anchor[2] + rise)
    tip_under_z = tip[2] - t_eff / math.cos(math.radians(45)) / 2.0

    block_top = tip_under_z - gap
    bx, by, bz = RETURN_BLOCK_MM
    block_cy = tip[1] + 1.0
    column_xy = (0.0, block_cy)

    bodies = [
        _box("base", PLA, -half, half, -half, half, *BASE_Z),
        _box("return_electrode", CPLA, -bx / 2, bx / 2,
             block_cy - by / 2, block_cy + by / 2, block_top - bz, block_top),
        # vertical conductor joining the return block to the floor layer
        _box("return_electrode", CPLA,
             column_xy[0] - TRACE_SIZE_MM / 2, column_xy[0] + TRACE_SIZE_MM / 2,
             column_xy[1] - TRACE_SIZE_MM / 2, column_xy[1] + TRACE_SIZE_MM / 2,
             0.0, block_top - bz + 1.0),
        # signal bus bar spanning the key at the ridge layer
        _box("cantilever_spring", CPLA, -half, half,
             bus_y - TRACE_SIZE_MM / 2, bus_y + TRACE_SIZE_MM / 2, *RIDGE_Z),
        BodyDef(role="cantilever_spring", material=CPLA, shape={
            "type": "sweep_rect",
            "start": anchor, "end": tip,
            "width": CANTILEVER_WIDTH_MM, "thickness": t_eff,
        }),
        _box("keycap", PLA, -keycap_width_mm / 2, keycap_width_mm / 2,
             -keycap_width_mm / 2, keycap_width_mm / 2,
             tip[2] + 1.0, tip[2] + 5.0),
    ]
    base = bodies[0]
    base.shape["holes"] = [_hole_rect(column_xy, TRACE_SIZE_MM + 0.5)]

    terminals = (
        Terminal("signal", (-half, bus_y), "ridge"),
        Terminal("signal", (half, bus_y), "ridge"),
        Terminal("return", column_xy, "floor"),
    )
    spring = SpringParams(
        kind="cantilever", gap_mm=gap, line_count=lines,
        nominal_thickness_mm=lines * LINE_WIDTH_MM,
        effective_thickness_mm=t_eff, print_angle_deg=PRINT_ANGLE_DEG,
        length_mm=spring_len, width_mm=CANTILEVER_WIDTH_MM,
    )
    return KeyBlueprint(
        kind="digital", footprint_mm=(fp, fp), keycap_width_mm=keycap_width_mm,
        base_height_mm=BASE_HEIGHT_MM, bodies=tuple(bodies),
        terminals=terminals, spring=spring, travel_mm=gap, legend=legend,
        column_xy=column_xy, bus_y_mm=bus_y,
    )


def analog_key_blueprint(travel_class: str, stiffness_class: str,
                         legend: LegendSpec | None = None,
                         keycap_width_mm: float = DEFAULT_KEYCAP_WIDTH_MM) -> KeyBlueprint:
    """Coil-spring analog key over a flat circular electrode.

    The electrode extends to the bottom of the key through a conductive stem
    and is read capacitively; travel is set by the coil free height.
    """
    legend = legend or LegendSpec()
    travel = ANALOG_TRAVEL_MM[travel_class]
    wire = COIL_THICKNESS_MM[stiffness_class]
    turns = COIL_TURNS
    solid = (turns + 1) * wire
    free = travel + solid
    fp = keycap_width_mm + KEY_GAP_MM
    half = fp / 2.0
    plate_top = RIDGE_Z[1]
    spring_z0 = plate_top

    bodies = [
        _box("base", PLA, -half, half, -half, half, *BASE_Z),
        # conductive stem from the floor layer up into the plate
        _box("plate_electrode", CPLA,
             -TRACE_SIZE_MM / 2, TRACE_SIZE_MM / 2,
             -TRACE_SIZE_MM / 2, TRACE_SIZE_MM / 2, 0.0, RIDGE_Z[0] + 0.5),
        BodyDef(role="plate_electrode", material=CPLA, shape={
            "type": "cylinder", "center": (0.0, 0.0),
            "diameter": PLATE_DIAMETER_MM, "z": (RIDGE_Z[0], plate_top)}),
        BodyDef(role="coil_spring", material=PLA, shape={
            "type": "helix", "center": (0.0, 0.0),
            "mean_diameter": COIL_MEAN_DIAMETER_MM, "wire": wire,
            "turns": turns, "free_height": free, "z0": spring_z0}),
        _box("keycap", PLA, -keycap_width_mm / 2, keycap_width_mm / 2,
             -keycap_width_mm / 2, keycap_width_mm / 2,
             spring_z0 + free, spring_z0 + free + 4.0),
    ]
    bodies[0].shape["holes"] = [_hole_rect((0.0, 0.0), TRACE_SIZE_MM + 0.5)]

    terminals = (Terminal("capacitive", (0.0, 0.0), "floor"),)
    spring = SpringParams(
        kind="coil", free_height_mm=free, coil_thickness_mm=wire,
        mean_diameter_mm=COIL_MEAN_DIAMETER_MM, turns=turns,
    )
    return KeyBlueprint(
        kind="analog", footprint_mm=(fp, fp), keycap_width_mm=keycap_width_mm,
        base_height_mm=BASE_HEIGHT_MM, bodies=tuple(bodies),
        terminals=terminals, spring=spring, travel_mm=travel, legend=legend,
        column_xy=(0.0, 0.0),
    )


def piano_key_blueprint(key_length_mm: float, stiffness_class: str,
                        legend: LegendSpec | None = None,
                        keycap_width_mm: float = DEFAULT_KEYCAP_WIDTH_MM) -> KeyBlueprint:
    """Compliant piano key: a lever on a rear living hinge.

    Three contact electrodes close the circuit at full depression: two signal
    pads fed from the front ridge bus and a bridge pad riding under the
    lever, wired over the hinge to the return path.
    """
    if not (40.0 <= key_length_mm <= 160.0):
        raise ValueError(f"piano key length {key_length_mm} mm outside [40, 160]")
    legend = legend or LegendSpec()
    fp_w = keycap_width_mm + KEY_GAP_MM
    half_w = fp_w / 2.0
    half_l = key_length_mm / 2.0
    gap = 0.6  # bridge-to-pad contact gap at rest
    hinge_t = PIANO_HINGE_THICKNESS_MM
    hinge_l = PIANO_HINGE_LENGTH_MM

    bus_y = -half_l + TRACE_SIZE_MM / 2.0
    pad_y = -half_l + 5.5
    col_y = half_l - 2.0
    lever_z = (8.4, 10.4)
    strip = TRACE_SIZE_MM / 2.0

    bodies = [
        _box("base", PLA, -half_w, half_w, -half_l, half_l, *BASE_Z),
        # rear anchor the hinge grows from; stops short of the return riser
        _box("base", PLA, -half_w, half_w, half_l - 6.0, half_l - 4.0, 6.0, lever_z[0]),
        _box("hinge", PLA, -half_w, half_w,
             half_l - 6.0 - hinge_l, half_l - 4.5, lever_z[0], lever_z[0] + hinge_t),
        # lever body, with a duct for the return riser near the front
        _box("base", PLA, -half_w, half_w, -half_l, half_l - 6.0 - hinge_l, *lever_z),
        # front ridge bus (signal), like the digital key row bus
        _box("contact_electrode", CPLA, -half_w, half_w,
             bus_y - TRACE_SIZE_MM / 2, bus_y + TRACE_SIZE_MM / 2,
             RIDGE_Z[0], 6.8),
        # two signal pads fed from the bus (they overlap its rear edge)
        _box("contact_electrode", CPLA, -7.0, -3.0, pad_y - 3.0, pad_y + 3.0, 6.0, 6.8),
        _box("contact_electrode", CPLA, 3.0, 7.0, pad_y - 3.0, pad_y + 3.0, 6.0, 6.8),
        # bridge electrode under the lever front
        _box("contact_electrode", CPLA, -7.0, 7.0,
             pad_y - 3.0, pad_y + 3.0, 6.8 + gap, lever_z[0]),
        # return path: riser through the lever duct, strip along the lever
        # top over the hinge, then down the rear riser to the floor layer
        _box("contact_electrode", CPLA, -strip, strip,
             pad_y - strip, pad_y + strip, 6.8 + gap, lever_z[1] + 0.4),
        _box("contact_electrode", CPLA, -strip, strip,
             pad_y - strip, col_y + strip, lever_z[1], lever_z[1] + 0.4),
        _box("contact_electrode", CPLA, -strip, strip,
             col_y - strip, col_y + strip, 0.0, lever_z[1] + 0.4),
        _box("keycap", PLA, -keycap_width_mm / 2, keycap_width_mm / 2,
             -half_l + 1.0, -half_l + 1.0 + keycap_width_mm,
             lever_z[1] + 0.4, lever_z[1] + 1.6),
    ]
    bodies[0].shape["holes"] = [_hole_rect((0.0, col_y), TRACE_SIZE_MM + 0.5)]
    bodies[3].shape["holes"] = [_hole_rect((0.0, pad_y), TRACE_SIZE_MM + 0.5)]

    terminals = (
        Terminal("signal", (-half_w, bus_y), "ridge"),
        Terminal("signal", (half_w, bus_y), "ridge"),
        Terminal("return", (0.0, col_y), "floor"),
    )
    spring = SpringParams(
        kind="cantilever", gap_mm=gap, line_count=2,
        nominal_thickness_mm=hinge_t, effective_thickness_mm=hinge_t,
        length_mm=hinge_l, width_mm=fp_w,
    )
    return KeyBlueprint(
        kind="piano", footprint_mm=(fp_w, key_length_mm),
        keycap_width_mm=keycap_width_mm, base_height_mm=BASE_HEIGHT_MM,
        bodies=tuple(bodies), terminals=terminals, spring=spring,
        travel_mm=gap, legend=legend, column_xy=(0.0, col_y), bus_y_mm=bus_y,
    )


def blueprint_for(key) -> KeyBlueprint:
    """Blueprint for a resolved KeyInstance."""
    if key.kind == "digital":
        return digital_key_blueprint(key.travel_class, key.stiffness_class, key.legend)
    if key.kind == "analog":
        return analog_key_blueprint(key.travel_class, key.stiffness_class, key.legend)
    if key.kind == "piano":
        return piano_key_blueprint(PIANO_LENGTH_MM[key.travel_class],
                                   key.stiffness_class, key.legend)
    raise ValueError(f"unknown key kind '{key.kind}'")


def _hole_rect(center: tuple[float, float], size: float) -> Polygon:
    # clockwise winding marks the polygon as a hole
    return list(reversed(rect_corners(center[0], center[1], size, size)))


# ---------------------------------------------------------------------------
# legends

# Standard six-dot braille cell, dots 1-3 down the left column, 4-6 right.
BRAILLE_DOTS = {
    "a": (1,), "b": (1, 2), "c": (1, 4), "d": (1, 4, 5), "e": (1, 5),
    "f": (1, 2, 4), "g": (1, 2, 4, 5), "h": (1, 2, 5), "i": (2, 4),
    "j": (2, 4, 5), "k": (1, 3), "l": (1, 2, 3), "m": (1, 3, 4),
    "n": (1, 3, 4, 5), "o": (1, 3, 5), "p": (1, 2, 3, 4),
    "q": (1, 2, 3, 4, 5), "r": (1, 2, 3, 5), "s": (2, 3, 4),
    "t": (2, 3, 4, 5), "u": (1, 3, 6), "v": (1, 2, 3, 6),
    "w": (2, 4, 5, 6), "x": (1, 3, 4, 6), "y": (1, 3, 4, 5, 6),
    "z": (1, 3, 5, 6),
}

# Stroke alphabet on a unit cell, (0,0) bottom-left.  Each glyph is a list of
# polylines; strokes are widened into rectangles when polygons are produced.
STROKE_FONT: dict[str, list[list[tuple[float, float]]]] = {
    "A": [[(0, 0), (0.5, 1), (1, 0)], [(0.2, 0.4), (0.8, 0.4)]],
    "B": [[(0, 0), (0, 1), (0.8, 0.85), (0, 0.5)], [(0, 0.5), (0.9, 0.2), (0, 0)]],
    "C": [[(1, 0.85), (0.4, 1), (0, 0.5), (0.4, 0), (1, 0.15)]],
    "D": [[(0, 0), (0, 1), (0.8, 0.75), (0.8, 0.25), (0, 0)]],
    "E": [[(1, 1), (0, 1), (0, 0), (1, 0)], [(0, 0.5), (0.7, 0.5)]],
    "F": [[(1, 1), (0, 1), (0, 0)], [(0, 0.5), (0.7, 0.5)]],
    "G": [[(1, 0.85), (0.4, 1), (0, 0.5), (0.4, 0), (1, 0.1), (1, 0.45), (0.6, 0.45)]],
    "H": [[(0, 0), (0, 1)], [(1, 0), (1, 1)], [(0, 0.5), (1, 0.5)]],
    "I": [[(0.5, 0), (0.5, 1)], [(0.2, 0), (0.8, 0)], [(0.2, 1), (0.8, 1)]],
    "J": [[(1, 1), (1, 0.2), (0.6, 0), (0.2, 0.2)]],
    "K": [[(0, 0), (0, 1)], [(1, 1), (0, 0.5), (1, 0)]],
    "L": [[(0, 1), (0, 0), (1, 0)]],
    "M": [[(0, 0), (0, 1), (0.5, 0.4), (1, 1), (1, 0)]],
    "N": [[(0, 0), (0, 1), (1, 0), (1, 1)]],
    "O": [[(0.5, 0), (0, 0.3), (0, 0.7), (0.5, 1), (1, 0.7), (1, 0.3), (0.5, 0)]],
    "P": [[(0, 0), (0, 1), (0.9, 0.85), (0, 0.55)]],
    "Q": [[(0.5, 0), (0, 0.3), (0, 0.7), (0.5, 1), (1, 0.7), (1, 0.3), (0.5, 0)],
          [(0.6, 0.3), (1, 0)]],
    "R": [[(0, 0), (0, 1), (0.9, 0.85), (0, 0.55)], [(0.3, 0.55), (1, 0)]],
    "S": [[(1, 0.9), (0.3, 1), (0, 0.75), (1, 0.3), (0.7, 0), (0, 0.1)]],
    "T": [[(0, 1), (1, 1)], [(0.5, 1), (0.5, 0)]],
    "U": [[(0, 1), (0, 0.25), (0.5, 0), (1, 0.25), (1, 1)]],
    "V": [[(0, 1), (0.5, 0), (1, 1)]],
    "W": [[(0, 1), (0.25, 0), (0.5, 0.6), (0.75, 0), (1, 1)]],
    "X": [[(0, 0), (1, 1)], [(0, 1), (1, 0)]],
    "Y": [[(0, 1), (0.5, 0.5), (1, 1)], [(0.5, 0.5), (0.5, 0)]],
    "Z": [[(0, 1), (1, 1), (0, 0), (1, 0)]],
    "0": [[(0.5, 0), (0, 0.25), (0, 0.75), (0.5, 1), (1, 0.75), (1, 0.25), (0.5, 0)]],
    "1": [[(0.3, 0.8), (0.5, 1), (0.5, 0)], [(0.2, 0), (0.8, 0)]],
    "2": [[(0, 0.8), (0.5, 1), (1, 0.8), (0, 0), (1, 0)]],
    "3": [[(0, 0.9), (0.6, 1), (1, 0.75), (0.4, 0.5), (1, 0.25), (0.6, 0), (0, 0.1)]],
    "4": [[(0.7, 0), (0.7, 1), (0, 0.3), (1, 0.3)]],
    "5": [[(1, 1), (0, 1), (0, 0.55), (0.7, 0.55), (1, 0.3), (0.7, 0), (0, 0.1)]],
    "6": [[(0.8, 1), (0.2, 0.7), (0, 0.3), (0.5, 0), (1, 0.3), (0.5, 0.5), (0, 0.3)]],
    "7": [[(0, 1), (1, 1), (0.4, 0)]],
    "8": [[(0.5, 0.5), (0.1, 0.75), (0.5, 1), (0.9, 0.75), (0.5, 0.5),
           (0.1, 0.25), (0.5, 0), (0.9, 0.25), (0.5, 0.5)]],
    "9": [[(0.2, 0), (0.8, 0.3), (1, 0.7), (0.5, 1), (0, 0.7), (0.5, 0.5), (1, 0.7)]],
}


def legend_polygons(legend: LegendSpec,
                    keycap_width_mm: float = DEFAULT_KEYCAP_WIDTH_MM) -> list[Polygon]:
    """Planar CCW polygons for a keycap legend, centered on the cap.

    All polygons fit inside the cap footprint inset by LEGEND_INSET_MM and
    are extruded upward by the legend's relief height elsewhere.
    """
    if legend.mode == "blank":
        return []
    if legend.mode == "raw_polygons":
        _check_fit(legend.payload, keycap_width_mm)
        return list(legend.payload)
    if legend.mode == "braille":
        ch = str(legend.payload).lower()
        if ch not in BRAILLE_DOTS:
            raise ValueError(f"no braille cell for character '{legend.payload}'")
        r = BRAILLE_DOT_DIAMETER_MM / 2.0
        p = BRAILLE_DOT_PITCH_MM
        polys = []
        for dot in BRAILLE_DOTS[ch]:
            col = 0 if dot <= 3 else 1
            rowi = (dot - 1) % 3
            cx = (col - 0.5) * p
            cy = (1 - rowi) * p
            polys.append(_circle(cx, cy, r))
        _check_fit(polys, keycap_width_mm)
        return polys
    if legend.mode == "text_glyph":
        ch = str(legend.payload).upper()
        if ch not in STROKE_FONT:
            raise ValueError(f"no stroke glyph for character '{legend.payload}'")
        cell = 8.0
        polys = []
        for poly_line in STROKE_FONT[ch]:
            for i in range(len(poly_line) - 1):
                a, b = poly_line[i], poly_line[i + 1]
                polys.append(_stroke_rect(
                    ((a[0] - 0.5) * cell, (a[1] - 0.5) * cell),
                    ((b[0] - 0.5) * cell, (b[1] - 0.5) * cell),
                    STROKE_WIDTH_MM))
        _check_fit(polys, keycap_width_mm)
        return polys
    raise ValueError(f"unknown legend mode '{legend.mode}'")


def _check_fit(polys: list[Polygon], keycap_width_mm: float) -> None:
    limit = keycap_width_mm / 2.0 - LEGEND_INSET_MM
    for poly in polys:
        for (x, y) in poly:
            if abs(x) > limit or abs(y) > limit:
                raise ValueError("legend polygon exceeds the keycap footprint inset")


def _circle(cx: float, cy: float, r: float, segments: int = 24) -> Polygon:
    return [(cx + r * math.cos(2 * math.pi * i / segments),
             cy + r * math.sin(2 * math.pi * i / segments))
            for i in range(segments)]


def _stroke_rect(a, b, width: float) -> Polygon:
    dx, dy = b[0] - a[0], b[1] - a[1]
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    nx, ny = -uy * width / 2.0, ux * width / 2.0
    # extend the stroke by half a width so consecutive strokes join
    ex, ey = ux * width / 2.0, uy * width / 2.0
    a = (a[0] - ex, a[1] - ey)
    b = (b[0] + ex, b[1] + ey)
    return [(a[0] + nx, a[1] + ny), (a[0] - nx, a[1] - ny),
            (b[0] - nx, b[1] - ny), (b[0] + nx, b[1] + ny)]
