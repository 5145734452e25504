"""Layout language frontend.

Parses the line-oriented device description into a normalized
:class:`DeviceSpec`, validates it, and resolves every optional field to a
concrete value.  The grammar (one directive per line, ``#`` starts a
comment)::

    device <name>
    controller <flora|mega|uno> [socket]
    shell <rectangle|hull|none>
    default kind <digital|analog|piano> travel <short|medium|long> stiffness <low|high>
    row <int> offset <float-mm> keys <ID> <ID> ...
    key <ID> [kind k] [travel t] [stiffness s]
             [legend text <char> | legend braille <char> | legend blank]
             [at <x> <y> [rot <deg>]] [ladder <group>]

A ``key`` line naming an identifier already declared by a ``row`` line
refines that key's attributes instead of declaring a new key.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

KINDS = ("digital", "analog", "piano")
TRAVEL_CLASSES = ("short", "medium", "long")
STIFFNESS_CLASSES = ("low", "high")
SHELL_POLICIES = ("rectangle", "hull", "none")
LEGEND_MODES = ("text_glyph", "braille", "raw_polygons", "blank")

#: digital/analog pin budgets per controller board
CONTROLLER_BOARDS = {
    "flora": {"digital": 8, "analog": 4},
    "uno": {"digital": 12, "analog": 6},
    "mega": {"digital": 54, "analog": 16},
}

DEFAULT_KEYCAP_WIDTH_MM = 15.5
KEY_GAP_MM = 3.3  # joined-base spacing between adjacent keycaps

_IDENT_RE = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int      # 1-based; 0 for whole-document checks
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: line {self.line}: {self.message}"


@dataclass(frozen=True)
class LegendSpec:
    mode: str = "blank"
    payload: str | list = ""
    relief_height_mm: float | None = None


@dataclass(frozen=True)
class GridPos:
    row: int
    col: int
    offset_mm: float = 0.0


@dataclass(frozen=True)
class ExplicitPos:
    x_mm: float
    y_mm: float
    rotation_deg: float = 0.0


@dataclass(frozen=True)
class KeyInstance:
    id: str
    kind: str | None = None
    travel_class: str | None = None
    stiffness_class: str | None = None
    legend: LegendSpec | None = None
    position: GridPos | ExplicitPos | None = None
    ladder_group: str | None = None


@dataclass(frozen=True)
class ControllerTarget:
    board: str = "uno"
    socket: bool = False

    @property
    def digital_budget(self) -> int:
        return CONTROLLER_BOARDS[self.board]["digital"]

    @property
    def analog_budget(self) -> int:
        return CONTROLLER_BOARDS[self.board]["analog"]


@dataclass(frozen=True)
class DeviceSpec:
    name: str = "device"
    keys: tuple[KeyInstance, ...] = ()
    controller: ControllerTarget = field(default_factory=ControllerTarget)
    shell_policy: str = "rectangle"
    row_pitch_mm: float | None = None
    keycap_width_mm: float = DEFAULT_KEYCAP_WIDTH_MM


class SpecError(Exception):
    """Raised by pipeline stages on unrecoverable spec problems."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


def _num(tok: str) -> float:
    if not re.match(r"^-?\d+(\.\d+)?$", tok):
        raise ValueError(tok)
    return float(tok)


class _Parser:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []
        self.name: str | None = None
        self.controller: ControllerTarget | None = None
        self.shell: str | None = None
        self.defaults = {"kind": "digital", "travel": "short", "stiffness": "high"}
        self.keys: dict[str, KeyInstance] = {}
        self.row_next_col: dict[int, int] = {}

    def err(self, line: int, msg: str) -> None:
        self.diags.append(Diagnostic("error", line, msg))

    def warn(self, line: int, msg: str) -> None:
        self.diags.append(Diagnostic("warning", line, msg))

    def _enum(self, line: int, what: str, tok: str, allowed: tuple[str, ...]) -> str | None:
        if tok not in allowed:
            self.err(line, f"invalid {what} '{tok}'; expected one of {{{', '.join(allowed)}}}")
            return None
        return tok

    def parse(self, source: str) -> None:
        for lineno, raw in enumerate(source.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            head, rest = toks[0], toks[1:]
            handler = getattr(self, f"_d_{head}", None)
            if handler is None:
                self.err(lineno, f"unknown directive '{head}'")
                continue
            handler(lineno, rest)

    def _d_device(self, lineno: int, rest: list[str]) -> None:
        if self.name is not None:
            self.err(lineno, "duplicate 'device' directive")
            return
        if len(rest) != 1 or not _IDENT_RE.match(rest[0]):
            self.err(lineno, "usage: device <name>")
            return
        self.name = rest[0]

    def _d_controller(self, lineno: int, rest: list[str]) -> None:
        if self.controller is not None:
            self.err(lineno, "duplicate 'controller' directive")
            return
        if not rest or rest[0] not in CONTROLLER_BOARDS:
            self._enum(lineno, "controller board", rest[0] if rest else "",
                       tuple(CONTROLLER_BOARDS))
            return
        socket = False
        for tok in rest[1:]:
            if tok == "socket":
                socket = True
            else:
                self.warn(lineno, f"unknown controller attribute '{tok}' ignored")
        self.controller = ControllerTarget(board=rest[0], socket=socket)

    def _d_shell(self, lineno: int, rest: list[str]) -> None:
        if self.shell is not None:
            self.err(lineno, "duplicate 'shell' directive")
            return
        if len(rest) != 1:
            self.err(lineno, "usage: shell <rectangle|hull|none>")
            return
        pol = self._enum(lineno, "shell policy", rest[0], SHELL_POLICIES)
        if pol:
            self.shell = pol

    def _d_default(self, lineno: int, rest: list[str]) -> None:
        i = 0
        while i < len(rest):
            attr = rest[i]
            if attr not in ("kind", "travel", "stiffness"):
                self.warn(lineno, f"unknown default attribute '{attr}' ignored")
                i += 1
                continue
            if i + 1 >= len(rest):
                self.err(lineno, f"default '{attr}' needs a value")
                return
            val = rest[i + 1]
            allowed = {"kind": KINDS, "travel": TRAVEL_CLASSES,
                       "stiffness": STIFFNESS_CLASSES}[attr]
            got = self._enum(lineno, attr, val, allowed)
            if got:
                self.defaults[attr] = got
            i += 2

    def _d_row(self, lineno: int, rest: list[str]) -> None:
        try:
            if len(rest) < 4 or rest[1] != "offset" or rest[3] != "keys":
                raise ValueError
            row = int(rest[0])
            offset = _num(rest[2])
            ids = rest[4:]
            if not ids:
                raise ValueError
        except ValueError:
            self.err(lineno, "usage: row <int> offset <float-mm> keys <ID> ...")
            return
        col = self.row_next_col.get(row, 0)
        for kid in ids:
            if not _IDENT_RE.match(kid):
                self.err(lineno, f"invalid key identifier '{kid}'")
                continue
            if kid in self.keys:
                self.err(lineno, f"duplicate key id '{kid}'")
                continue
            self.keys[kid] = KeyInstance(
                id=kid,
                kind=self.defaults["kind"],
                travel_class=self.defaults["travel"],
                stiffness_class=self.defaults["stiffness"],
                position=GridPos(row=row, col=col, offset_mm=offset),
            )
            col += 1
        self.row_next_col[row] = col

    def _d_key(self, lineno: int, rest: list[str]) -> None:
        if not rest or not _IDENT_RE.match(rest[0]):
            self.err(lineno, "usage: key <ID> [attributes...]")
            return
        kid = rest[0]
        existing = self.keys.get(kid)
        attrs: dict = {}
        i = 1
        while i < len(rest):
            tok = rest[i]
            try:
                if tok == "kind":
                    attrs["kind"] = self._enum(lineno, "kind", rest[i + 1], KINDS)
                    i += 2
                elif tok == "travel":
                    attrs["travel_class"] = self._enum(
                        lineno, "travel", rest[i + 1], TRAVEL_CLASSES)
                    i += 2
                elif tok == "stiffness":
                    attrs["stiffness_class"] = self._enum(
                        lineno, "stiffness", rest[i + 1], STIFFNESS_CLASSES)
                    i += 2
                elif tok == "legend":
                    mode = rest[i + 1]
                    if mode == "blank":
                        attrs["legend"] = LegendSpec(mode="blank")
                        i += 2
                    elif mode in ("text", "braille"):
                        payload = rest[i + 2]
                        if len(payload) != 1:
                            self.err(lineno, f"legend {mode} payload must be one character")
                            i += 3
                            continue
                        attrs["legend"] = LegendSpec(
                            mode="text_glyph" if mode == "text" else "braille",
                            payload=payload)
                        i += 3
                    else:
                        self.err(lineno, f"invalid legend mode '{mode}'; "
                                         "expected one of {text, braille, blank}")
                        i += 2
                elif tok == "at":
                    x = _num(rest[i + 1])
                    y = _num(rest[i + 2])
                    rot = 0.0
                    i += 3
                    if i < len(rest) and rest[i] == "rot":
                        rot = _num(rest[i + 1])
                        i += 2
                    if not (0.0 <= rot < 360.0):
                        self.err(lineno, f"rotation {rot} out of range [0, 360)")
                        rot = rot % 360.0
                    attrs["position"] = ExplicitPos(x_mm=x, y_mm=y, rotation_deg=rot)
                elif tok == "ladder":
                    if not _IDENT_RE.match(rest[i + 1]):
                        self.err(lineno, f"invalid ladder group '{rest[i + 1]}'")
                    else:
                        attrs["ladder_group"] = rest[i + 1]
                    i += 2
                else:
                    self.warn(lineno, f"unknown key attribute '{tok}' ignored")
                    i += 1
            except IndexError:
                self.err(lineno, f"attribute '{tok}' is missing its value")
                return
            except ValueError as exc:
                self.err(lineno, f"malformed number '{exc.args[0]}'")
                return

        attrs = {k: v for k, v in attrs.items() if v is not None}
        if existing is not None:
            if "position" in attrs and isinstance(existing.position, GridPos):
                self.err(lineno, f"key '{kid}' is grid-placed by a row directive; "
                                 "'at' would mix grid and explicit placement")
                attrs.pop("position")
            self.keys[kid] = replace(existing, **attrs)
        else:
            if "position" not in attrs:
                self.err(lineno, f"key '{kid}' has no position; use 'at <x> <y>' "
                                 "or declare it in a row")
                return
            self.keys[kid] = KeyInstance(
                id=kid,
                kind=attrs.get("kind", self.defaults["kind"]),
                travel_class=attrs.get("travel_class", self.defaults["travel"]),
                stiffness_class=attrs.get("stiffness_class", self.defaults["stiffness"]),
                legend=attrs.get("legend"),
                position=attrs["position"],
                ladder_group=attrs.get("ladder_group"),
            )


def parse_device_spec(source: str) -> tuple[DeviceSpec | None, list[Diagnostic]]:
    """Parse the layout language.

    Returns ``(spec, diagnostics)``.  ``spec`` is None when any error
    diagnostic was produced; warnings alone do not block parsing.
    """
    p = _Parser()
    p.parse(source)
    if not p.keys and not any(d.severity == "error" for d in p.diags):
        p.err(0, "device declares no keys")
    diags = sorted(p.diags, key=lambda d: (d.line, 0 if d.severity == "error" else 1))
    if any(d.severity == "error" for d in diags):
        return None, diags
    spec = DeviceSpec(
        name=p.name or "device",
        keys=tuple(p.keys.values()),
        controller=p.controller or ControllerTarget(),
        shell_policy=p.shell or "rectangle",
    )
    return resolve_defaults(spec), diags


def resolve_defaults(spec: DeviceSpec) -> DeviceSpec:
    """Fill every optional field with its concrete default.  Idempotent."""
    from . import parts  # legend fit data lives with the part library

    pitch = spec.keycap_width_mm + KEY_GAP_MM
    keys = []
    for k in spec.keys:
        legend = k.legend
        if legend is None:
            if (len(k.id) == 1 and (k.id.upper() in parts.STROKE_FONT)):
                legend = LegendSpec(mode="text_glyph", payload=k.id.upper())
            else:
                legend = LegendSpec(mode="blank")
        if legend.mode != "blank" and legend.relief_height_mm is None:
            relief = (parts.BRAILLE_RELIEF_MM if legend.mode == "braille"
                      else parts.TEXT_RELIEF_MM)
            legend = replace(legend, relief_height_mm=relief)
        keys.append(replace(
            k,
            kind=k.kind or "digital",
            travel_class=k.travel_class or "short",
            stiffness_class=k.stiffness_class or "high",
            legend=legend,
        ))
    return replace(
        spec,
        keys=tuple(keys),
        row_pitch_mm=spec.row_pitch_mm if spec.row_pitch_mm is not None else pitch,
    )


def validate_spec(spec: DeviceSpec) -> list[Diagnostic]:
    """Whole-document checks; empty result means the spec is compilable."""
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for k in spec.keys:
        if k.id in seen:
            diags.append(Diagnostic("error", 0, f"duplicate key id '{k.id}'"))
        seen.add(k.id)
        if k.kind not in KINDS:
            diags.append(Diagnostic("error", 0, f"key '{k.id}': invalid kind '{k.kind}'"))
        if k.travel_class not in TRAVEL_CLASSES:
            diags.append(Diagnostic(
                "error", 0, f"key '{k.id}': invalid travel class '{k.travel_class}'"))
        if k.stiffness_class not in STIFFNESS_CLASSES:
            diags.append(Diagnostic(
                "error", 0, f"key '{k.id}': invalid stiffness class '{k.stiffness_class}'"))
        if k.legend is not None and k.legend.mode != "blank":
            if k.legend.relief_height_mm is not None and k.legend.relief_height_mm <= 0:
                diags.append(Diagnostic(
                    "error", 0, f"key '{k.id}': legend relief height must be positive"))

    if not spec.keys:
        diags.append(Diagnostic("error", 0, "device declares no keys"))

    # pin budget: digital keys outside ladder groups each need a digital pin
    ladders: set[str] = {k.ladder_group for k in spec.keys if k.ladder_group}
    digital_pins = sum(1 for k in spec.keys
                       if k.kind in ("digital", "piano") and not k.ladder_group)
    if digital_pins > spec.controller.digital_budget and not ladders:
        diags.append(Diagnostic(
            "error", 0,
            f"{digital_pins} digital inputs exceed the {spec.controller.board} "
            f"budget of {spec.controller.digital_budget}; declare an analog ladder "
            "or pick a larger controller"))
    if len(ladders) > spec.controller.analog_budget:
        diags.append(Diagnostic(
            "error", 0,
            f"{len(ladders)} ladder groups exceed the {spec.controller.board} "
            f"analog budget of {spec.controller.analog_budget}"))
    for k in spec.keys:
        if k.ladder_group and k.kind != "digital":
            diags.append(Diagnostic(
                "error", 0, f"key '{k.id}': only digital keys may join a ladder group"))

    # explicit-position footprint overlap, axis-aligned check for unrotated keys
    from .geometry import aabb_overlap
    pitch = spec.keycap_width_mm + KEY_GAP_MM
    half = pitch / 2.0
    boxes = []
    for k in spec.keys:
        if isinstance(k.position, ExplicitPos) and k.position.rotation_deg == 0.0:
            x, y = k.position.x_mm, k.position.y_mm
            boxes.append((k.id, (x - half, y - half, x + half, y + half)))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if aabb_overlap(boxes[i][1], boxes[j][1]):
                diags.append(Diagnostic(
                    "error", 0,
                    f"keys '{boxes[i][0]}' and '{boxes[j][0]}' have overlapping footprints"))
    return sorted(diags, key=lambda d: d.line)


def serialize_device_spec(spec: DeviceSpec) -> str:
    """Canonical text form; ``parse(serialize(parse(s)))`` is a fixed point."""
    lines = [f"device {spec.name}"]
    ctrl = f"controller {spec.controller.board}"
    if spec.controller.socket:
        ctrl += " socket"
    lines.append(ctrl)
    lines.append(f"shell {spec.shell_policy}")

    # grid keys grouped by (row, offset) in declaration order
    grid_groups: list[tuple[int, float, list[str]]] = []
    for k in spec.keys:
        if isinstance(k.position, GridPos):
            g = k.position
            if grid_groups and grid_groups[-1][0] == g.row and grid_groups[-1][1] == g.offset_mm:
                grid_groups[-1][2].append(k.id)
            else:
                grid_groups.append((g.row, g.offset_mm, [k.id]))
    for row, offset, ids in grid_groups:
        lines.append(f"row {row} offset {_fmt(offset)} keys {' '.join(ids)}")

    for k in spec.keys:
        attrs = [f"kind {k.kind}", f"travel {k.travel_class}", f"stiffness {k.stiffness_class}"]
        if k.legend is not None:
            if k.legend.mode == "text_glyph":
                attrs.append(f"legend text {k.legend.payload}")
            elif k.legend.mode == "braille":
                attrs.append(f"legend braille {k.legend.payload}")
            else:
                attrs.append("legend blank")
        if isinstance(k.position, ExplicitPos):
            pos = k.position
            at = f"at {_fmt(pos.x_mm)} {_fmt(pos.y_mm)}"
            if pos.rotation_deg:
                at += f" rot {_fmt(pos.rotation_deg)}"
            attrs.append(at)
        if k.ladder_group:
            attrs.append(f"ladder {k.ladder_group}")
        lines.append(f"key {k.id} {' '.join(attrs)}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return s if "." in s or "-" in s or s.isdigit() else s + "0"
