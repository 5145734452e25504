"""Two-layer maze routing of the conductive nets.

Traces occupy two z bands: the floor layer (under the base slab) and the
ridge layer (on top of it).  The ridge carries only the signal bus; every
other net routes on the floor, so cross-layer crossings are always legal.

Routing happens on a uniform grid whose pitch (3.81 mm) exceeds trace
width + clearance (2.54 + 1.2 mm), so any two traces in distinct cells
clear each other by construction.  Off-grid joints (key terminals, socket
pad centers) get an exclusion disk large enough that the short stub from
the joint to its grid cell also keeps clearance.

Printed resistors are exact-length serpentine meanders in exclusive strips
behind the device: ladder groups realize one resistive path per member key,
and pull-down taps bridge each input net to the ground rail when a
controller socket is printed.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import electrical
from .frontend import DeviceSpec
from .geometry import point_in_polygon, point_seg_distance, polyline_length, rot2d
from .netlist import FLORA_PAD_RING, Net, Netlist, pad_wrap_rank
from .placement import Placement, ShellOutline

FLOOR = 0
RIDGE = 1
LAYER_NAMES = ("floor", "ridge")

_FREE = -1
_BLOCK = -2

SOCKET_RING_DIAMETER_MM = 50.8
SOCKET_CONE_BASE_MM = 5.0
SOCKET_CONE_TIP_MM = 2.0
SOCKET_CONE_HEIGHT_MM = 10.0


@dataclass(frozen=True)
class RoutingRules:
    grid_pitch_mm: float = 3.81
    trace_size_mm: float = 2.54
    clearance_mm: float = 1.2

    def __post_init__(self):
        if self.grid_pitch_mm < self.trace_size_mm + self.clearance_mm:
            raise ValueError(
                f"grid pitch {self.grid_pitch_mm} mm cannot guarantee "
                f"{self.clearance_mm} mm clearance between "
                f"{self.trace_size_mm} mm traces")
        if self.clearance_mm <= 0 or self.trace_size_mm <= 0:
            raise ValueError("trace size and clearance must be positive")


@dataclass(frozen=True)
class TraceSegment:
    net_id: str
    layer: str                      # "floor" | "ridge"
    points: tuple[tuple[float, float], ...]
    width_mm: float
    intrinsic: bool = False         # already part of a key body; not re-meshed


@dataclass(frozen=True)
class ResistorMeander:
    id: str
    net_id: str                     # net the meander belongs to
    bridges: tuple[str, str] | None  # set for pull-down taps
    target_ohms: float
    realized_ohms: float
    length_mm: float
    points: tuple[tuple[float, float], ...]
    region: tuple[float, float, float, float]
    layer: str = "floor"


@dataclass(frozen=True)
class SocketPad:
    pin: str
    position: tuple[float, float]
    net_id: str | None


@dataclass(frozen=True)
class SocketPlan:
    center: tuple[float, float]
    ring_diameter_mm: float
    pads: tuple[SocketPad, ...]
    cone_base_mm: float = SOCKET_CONE_BASE_MM
    cone_tip_mm: float = SOCKET_CONE_TIP_MM
    cone_height_mm: float = SOCKET_CONE_HEIGHT_MM


@dataclass(frozen=True)
class LadderMember:
    key_id: str
    escape_mm: float
    meander_mm: float
    total_mm: float
    resistance_ohms: float
    predicted_counts: int


@dataclass
class RoutePlan:
    traces: list[TraceSegment]
    resistors: list[ResistorMeander]
    socket: SocketPlan | None
    apron_mm: tuple[float, float, float, float]
    exit_points: dict[str, tuple[float, float]]
    net_lengths: dict[str, float]
    ladders: dict[str, tuple[electrical.LadderDesign, tuple[LadderMember, ...]]]
    rules: RoutingRules
    warnings: list[str] = field(default_factory=list)
    # printed base extension in front of the shell holding the resistor
    # strips on socket devices
    front_apron_mm: tuple[float, float, float, float] | None = None


class RoutingError(Exception):
    pass


# ---------------------------------------------------------------------------
# resistor meander synthesis

def synthesize_resistor_meander(
        target_length_mm: float,
        region: tuple[float, float, float, float],
        rules: RoutingRules) -> list[tuple[float, float]]:
    """Serpentine polyline of exactly ``target_length_mm`` inside ``region``.

    The path enters at the south edge and exits at the north edge; vertical
    legs sit one grid pitch apart, which keeps the meander self-clearing.
    Raises :class:`RoutingError` when the region cannot hold the length.
    """
    x0, y0, x1, y1 = region
    d = y1 - y0
    w = x1 - x0
    p = rules.grid_pitch_mm
    if d <= 0 or w < p:
        raise RoutingError(f"resistor region {region} is degenerate")
    if target_length_mm < d - 1e-9:
        raise RoutingError(
            f"resistor needs {target_length_mm:.2f} mm but the region is "
            f"already {d:.2f} mm deep; shallower region required")
    xs = x0 + p / 2.0
    extra = target_length_mm - d
    if extra < 1e-9:
        return [(xs, y0), (xs, y1)]
    if d < p:
        # folding needs at least one grid pitch of depth for the cross rung
        raise RoutingError(
            f"resistor needs {target_length_mm:.2f} mm but the {d:.2f} mm "
            f"deep region cannot hold a fold; deepen the region")

    # single-detour form for lengths barely above the region depth
    if extra / 2.0 + p <= w and extra / 2.0 < 2.0 * (1.0 + p):
        e = extra / 2.0
        ym = y0 + (d - p) / 2.0
        pts = [(xs, y0), (xs, ym), (xs + e, ym), (xs + e, ym + p),
               (xs, ym + p), (xs, y1)]
        return pts

    l_max = d - p
    k = 3
    while (target_length_mm - d) / (k - 1) - p > l_max:
        k += 2
    leg = (target_length_mm - d) / (k - 1) - p
    if leg < 0.5:
        raise RoutingError(
            f"resistor length {target_length_mm:.2f} mm leaves legs of "
            f"{leg:.2f} mm; region {region} is too deep for a serpentine")
    need_w = (k - 1) * p + p
    if need_w > w + 1e-9:
        raise RoutingError(
            f"resistor needs {need_w:.2f} mm of strip width but only "
            f"{w:.2f} mm is available")
    pts: list[tuple[float, float]] = [(xs, y0)]
    y_lo, y_hi = y0, y0 + leg
    for j in range(k):
        x = xs + j * p
        if j % 2 == 0:
            pts.append((x, y_hi))
            if j + 1 < k:
                pts.append((x + p, y_hi))
        else:
            pts.append((x, y_lo))
            if j + 1 < k:
                pts.append((x + p, y_lo))
    pts.append((xs + (k - 1) * p, y1))
    assert abs(polyline_length(pts) - target_length_mm) < 1e-6
    return pts


def _legs_needed(target: float, depth: float, pitch: float) -> int:
    if target <= depth:
        return 1
    k = 3
    while (target - depth) / (k - 1) - pitch > depth - pitch:
        k += 2
    return k


# ---------------------------------------------------------------------------
# router

def _simplify(points: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    if len(points) <= 2:
        return tuple(points)
    out = [points[0]]
    for pt in points[1:-1]:
        ax, ay = out[-1]
        nx, ny = pt
        # keep only direction changes
        if len(out) >= 2:
            px, py = out[-2]
        else:
            px = py = None
        out.append(pt)
        if px is not None:
            v1 = (ax - px, ay - py)
            v2 = (nx - ax, ny - ay)
            if abs(v1[0] * v2[1] - v1[1] * v2[0]) < 1e-9:
                out.pop(-2)
    # check the final corner
    if len(out) >= 2:
        ax, ay = out[-1]
        px, py = out[-2]
        lx, ly = points[-1]
        if abs((ax - px) * (ly - ay) - (ay - py) * (lx - ax)) < 1e-9:
            out.pop()
    out.append(points[-1])
    return tuple(out)


class _Joint:
    """An off-grid attachment point with an exclusion disk around it."""

    def __init__(self, net_idx: int, point: tuple[float, float], layer: int):
        self.net_idx = net_idx
        self.point = point
        self.layer = layer
        self.anchor: tuple[int, int, int] | None = None  # (layer, ix, iy)


class _Router:
    def __init__(self, netlist: Netlist, placement: Placement,
                 shell: ShellOutline, spec: DeviceSpec, rules: RoutingRules):
        self.netlist = netlist
        self.placement = placement
        self.shell = shell
        self.spec = spec
        self.rules = rules
        self.p = rules.grid_pitch_mm
        self.warnings: list[str] = []
        self.traces: list[TraceSegment] = []
        self.resistors: list[ResistorMeander] = []
        self.exit_points: dict[str, tuple[float, float]] = {}
        self.ladder_out: dict[str, tuple[electrical.LadderDesign,
                                         tuple[LadderMember, ...]]] = {}

        self.nets = netlist.nets
        self.idx_of = {n.id: i for i, n in enumerate(self.nets)}
        self.signal_idx = self.idx_of["signal"]
        # pseudo indices keep ladder members electrically distinct while
        # routing even though they share one net id
        self.pseudo_net: dict[int, str] = {}
        self.joints: list[_Joint] = []
        self.covered: dict[int, set[tuple[int, int, int]]] = {}
        # cells pre-connected by an off-grid conductor (e.g. a bus bar)
        self.cell_groups: dict[tuple[int, int, int],
                               set[tuple[int, int, int]]] = {}
        # per net: anchor cells of its key-terminal joints (escape sources)
        self.term_anchor: dict[int, list[tuple[int, int]]] = {}
        self.lane_cells: dict[str, tuple[int, int]] = {}
        self.polys_of: dict[int, list[tuple[str, tuple]]] = {}
        self.intrinsics: dict[int, list[tuple[tuple[float, float],
                                              tuple[float, float]]]] = {}

    # -- grid helpers ------------------------------------------------------

    def _build_grid(self, x_lo, y_lo, x_hi, y_hi) -> None:
        p = self.p
        self.gx0 = x_lo
        self.gy0 = y_lo
        self.nx = int(math.ceil((x_hi - x_lo) / p)) + 1
        self.ny = int(math.ceil((y_hi - y_lo) / p)) + 1
        self.owner = np.full((2, self.ny, self.nx), _BLOCK, dtype=np.int32)

    def center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.gx0 + (ix + 0.5) * self.p, self.gy0 + (iy + 0.5) * self.p)

    def cell(self, x: float, y: float) -> tuple[int, int]:
        return (int((x - self.gx0) // self.p), int((y - self.gy0) // self.p))

    def snap(self, x: float, y: float) -> tuple[float, float]:
        return self.center(*self.cell(x, y))

    def _cells_near(self, x: float, y: float, radius: float):
        p = self.p
        i0, j0 = self.cell(x - radius, y - radius)
        i1, j1 = self.cell(x + radius, y + radius)
        for j in range(max(j0, 0), min(j1, self.ny - 1) + 1):
            for i in range(max(i0, 0), min(i1, self.nx - 1) + 1):
                cx, cy = self.center(i, j)
                if (cx - x) ** 2 + (cy - y) ** 2 <= radius * radius:
                    yield i, j

    # -- planning ----------------------------------------------------------

    def run(self) -> RoutePlan:
        spec, rules, p = self.spec, self.rules, self.p
        bxmin, bymin, bxmax, bymax = self.placement.bounds
        sx = [pt[0] for pt in self.shell.polygon]
        sy = [pt[1] for pt in self.shell.polygon]
        sxmin, sxmax, symin, symax = min(sx), max(sx), min(sy), max(sy)
        cx_dev = (sxmin + sxmax) / 2.0

        has_socket = spec.controller.socket
        ladder_nets = [n for n in self.nets
                       if n.net_class == "return" and n.ladder_group]
        tap_nets = [n for n in self.nets if n.net_class == "resistor_tap"]
        return_nets = [n for n in self.nets
                       if n.net_class == "return" and not n.ladder_group]
        cap_nets = [n for n in self.nets if n.net_class == "capacitive"]

        # -- ladder designs from escape-length upper bounds
        socket_r = SOCKET_RING_DIAMETER_MM / 2.0
        # resistor strips sit in front of the shell on socket devices (the
        # rear belongs to the socket fan-out) and behind it otherwise
        y_strip0_est = (symin - 3 * p) if has_socket else symax + 3 * p
        designs: dict[str, electrical.LadderDesign] = {}
        member_esc_est: dict[str, dict[str, float]] = {}
        for net in ladder_nets:
            ests = {}
            for t in sorted(net.terminals, key=lambda t: t.position):
                ests[t.key_id] = 1.3 * (abs(t.position[1] - y_strip0_est)
                                        + 0.5 * abs(t.position[0] - cx_dev)) + 10.0
            member_esc_est[net.id] = ests
            order = sorted(ests, key=lambda k: (ests[k], k))
            designs[net.ladder_group] = electrical.design_analog_ladder(
                order, min_length_mm=max(electrical.MIN_LADDER_LENGTH_MM,
                                         max(ests.values()) + 14.0))

        # -- strip budget (meander lower bounds decide the strip depth)
        meander_lowers: list[float] = []
        strip_specs: list[dict] = []  # per meander: net, member, cols, target
        for net in ladder_nets:
            design = designs[net.ladder_group]
            for entry in design.entries:
                low = entry.trace_length_mm - member_esc_est[net.id][entry.key_id]
                meander_lowers.append(low)
                strip_specs.append({
                    "net": net, "member": entry.key_id,
                    "upper": entry.trace_length_mm})
        tap_len = {}
        for net in tap_nets:
            tap_len[net.id] = electrical.length_for_resistance(
                net.target_ohms, rules.trace_size_mm ** 2)
            meander_lowers.append(tap_len[net.id])
            strip_specs.append({"net": net, "member": None,
                                "upper": tap_len[net.id]})

        # member strips line up under the keys they serve, so every escape
        # drops more or less straight down; tap strips stay together at the
        # east end because their shared ground rail must not cross the
        # ladder rails
        def _strip_x(s: dict) -> tuple[float, str]:
            net = s["net"]
            xs = [t.position[0] for t in net.terminals
                  if t.key_id == s["member"]]
            return (min(xs), s["member"])

        strip_specs = (sorted([s for s in strip_specs
                               if s["member"] is not None], key=_strip_x)
                       + [s for s in strip_specs if s["member"] is None])

        if strip_specs:
            depth_mm = min(min(meander_lowers) - 4.0, 40.0)
            if depth_mm < 2 * p:
                raise RoutingError(
                    "printed resistors shorter than the minimum strip depth; "
                    f"shortest meander is {min(meander_lowers):.1f} mm")
            d_cells = max(2, int(depth_mm // p))
            for s in strip_specs:
                s["cols"] = _legs_needed(s["upper"], d_cells * p, p) + 2
        else:
            d_cells = 0

        strip_cols_total = sum(s["cols"] + 2 for s in strip_specs)

        # -- exit slots (no socket): one per externally wired net
        slot_nets = [] if has_socket else \
            [self.nets[self.signal_idx]] + return_nets + ladder_nets + cap_nets
        slots_w = len(slot_nets) * 2 * p

        # -- grid extents, generously sized
        half_w = max((sxmax - sxmin) / 2.0 + 4 * p,
                     slots_w / 2.0 + 4 * p,
                     strip_cols_total * p / 2.0 + 4 * p,
                     # generous flanks: every net whose pad sits high on the
                     # ring needs its own corridor lane past the socket
                     (socket_r + 14 * p) if has_socket else 0.0)
        rear_extent = symax + 4 * p
        if has_socket:
            rear_extent += 8 * p + 2 * socket_r + 10.0
        if strip_specs and not has_socket:
            rear_extent += (d_cells + 6) * p
        rear_extent += 4 * p
        front_extent = symin - 2 * p
        if strip_specs and has_socket:
            front_extent = symin - (d_cells + 6) * p
        self._build_grid(cx_dev - half_w, front_extent,
                         cx_dev + half_w, rear_extent)

        # -- rear-zone placement in grid coordinates
        jtop = self.cell(cx_dev, symax)[1] + 1  # first full row behind shell
        socket_plan = None
        if has_socket:
            # the gap in front of the ring is the fan-out band where every
            # net sorts itself onto its flank
            scx, scy = self.snap(cx_dev, symax + 8 * p + socket_r)
            j_after_socket = self.cell(scx, scy + socket_r)[1] + 3
            socket_plan = self._plan_socket((scx, scy))
        else:
            j_after_socket = jtop + 2

        strips: list[dict] = []
        rear_j = j_after_socket + 2
        if strip_specs:
            i_cursor = self.cell(cx_dev - strip_cols_total * p / 2.0, 0)[0]
            if has_socket:
                # meander block in front of the shell, entries facing the
                # keys, shared rail along the front edge
                j_strip0 = self.cell(cx_dev, symin)[1] - 1 - d_cells
                rail_j = j_strip0 - 1
                flip = True
            else:
                j_strip0 = j_after_socket + 1
                rail_j = j_strip0 + d_cells
                flip = False
                rear_j = rail_j + 3
            for s in strip_specs:
                s["i0"] = i_cursor
                s["j0"] = j_strip0
                s["d"] = d_cells
                s["rail_j"] = rail_j
                s["flip"] = flip
                i_cursor += s["cols"] + 2
                strips.append(s)

        # the signal bus gets the fixed westmost slot; every other net
        # claims the nearest free slot when it routes, because the order
        # in which nets emerge from the key field does not match key x
        # order and a fixed assignment would force crossings
        slot_cells: dict[str, tuple[int, int]] = {}
        self.free_slots: list[tuple[int, int]] = []
        if slot_nets:
            j_exit = jtop + 1
            i_start = self.cell(cx_dev - (len(slot_nets) - 1) * p, 0)[0]
            positions = [(i_start + 2 * k, j_exit)
                         for k in range(len(slot_nets))]
            slot_cells["signal"] = positions[0]
            self.free_slots = positions[1:]
            rear_j = max(rear_j, j_exit + 2)

        # -- escape lanes (socket): each pad net first claims a waypoint
        # behind the shell.  Lane order follows pad wrap order, which also
        # matches key x order, so the runs up to the ring pads nest instead
        # of fencing each other in.
        self.lane_cells: dict[str, tuple[int, int]] = {}
        if has_socket:
            lane_nets = return_nets + ladder_nets + cap_nets
            if strips and "ground" in self.idx_of:
                lane_nets = lane_nets + [self.netlist.net("ground")]
            if lane_nets:
                lane_nets = sorted(
                    lane_nets, key=lambda n: pad_wrap_rank(
                        self.netlist.pin_assignments.get(n.id, "")))
                j_lane = jtop + 1
                span = socket_r + 9 * p  # stays inside the apron
                scx = socket_plan.center[0]
                for k, net in enumerate(lane_nets):
                    fx = scx - span + 2 * span * (k + 0.5) / len(lane_nets)
                    self.lane_cells[net.id] = (self.cell(fx, 0)[0], j_lane)

        # -- apron rectangles (printed base extensions beyond the shell)
        used_x = [sxmin, sxmax]
        strip_x = []
        for s in strips:
            strip_x += [self.center(s["i0"], 0)[0] - p,
                        self.center(s["i0"] + s["cols"], 0)[0] + p]
        if socket_plan:
            used_x += [socket_plan.center[0] - socket_r - 10 * p,
                       socket_plan.center[0] + socket_r + 10 * p]
        else:
            used_x += strip_x
        for (si, sj) in [*slot_cells.values(), *self.free_slots]:
            used_x += [self.center(si, sj)[0] - 2 * p,
                       self.center(si, sj)[0] + 2 * p]
        apron = (min(used_x), symax - 8.0, max(used_x),
                 self.center(0, rear_j)[1] + p)
        front_apron = None
        if socket_plan and strips:
            front_apron = (min(strip_x),
                           self.center(0, strips[0]["rail_j"])[1] - p,
                           max(strip_x), symin + 8.0)

        aprons = [apron] + ([front_apron] if front_apron else [])
        self._mark_static(aprons, socket_plan, strips, slot_cells)
        self._route_all(designs, strips, slot_cells, socket_plan,
                        return_nets, cap_nets, ladder_nets, tap_nets)

        net_lengths: dict[str, float] = {}
        for tr in self.traces:
            net_lengths[tr.net_id] = net_lengths.get(tr.net_id, 0.0) \
                + polyline_length(list(tr.points))
        for rm in self.resistors:
            net_lengths[rm.net_id] = net_lengths.get(rm.net_id, 0.0) + rm.length_mm

        return RoutePlan(
            traces=self.traces, resistors=self.resistors, socket=socket_plan,
            apron_mm=apron, exit_points=self.exit_points,
            net_lengths=net_lengths, ladders=self.ladder_out,
            rules=self.rules, warnings=self.warnings,
            front_apron_mm=front_apron)

    def _plan_socket(self, center: tuple[float, float]) -> SocketPlan:
        net_of_pin = {pin: nid for nid, pin in self.netlist.pin_assignments.items()}
        pads = []
        n = len(FLORA_PAD_RING)
        r = SOCKET_RING_DIAMETER_MM / 2.0
        for i, pin in enumerate(FLORA_PAD_RING):
            ang = math.radians(270.0 - i * 360.0 / n)
            pos = (center[0] + r * math.cos(ang), center[1] + r * math.sin(ang))
            pads.append(SocketPad(pin=pin, position=pos,
                                  net_id=net_of_pin.get(pin)))
        return SocketPlan(center=center,
                          ring_diameter_mm=SOCKET_RING_DIAMETER_MM,
                          pads=tuple(pads))

    # -- static occupancy --------------------------------------------------

    def _mark_static(self, aprons, socket_plan, strips, slot_cells) -> None:
        p = self.p
        shell_poly = self.shell.polygon
        shell_box = (min(pt[0] for pt in shell_poly), min(pt[1] for pt in shell_poly),
                     max(pt[0] for pt in shell_poly), max(pt[1] for pt in shell_poly))
        for j in range(self.ny):
            for i in range(self.nx):
                x, y = self.center(i, j)
                ok = any(ax0 <= x <= ax1 and ay0 <= y <= ay1
                         for (ax0, ay0, ax1, ay1) in aprons)
                if not ok and shell_box[0] <= x <= shell_box[2] \
                        and shell_box[1] <= y <= shell_box[3]:
                    ok = point_in_polygon((x, y), shell_poly)
                if ok:
                    self.owner[:, j, i] = _FREE

        # ridge: key footprints are solid except their own bus cells
        for pk in self.placement.placed:
            poly = pk.footprint_polygon()
            xs = [q[0] for q in poly]
            ys = [q[1] for q in poly]
            i0, j0 = self.cell(min(xs), min(ys))
            i1, j1 = self.cell(max(xs), max(ys))
            for j in range(max(j0, 0), min(j1, self.ny - 1) + 1):
                for i in range(max(i0, 0), min(i1, self.nx - 1) + 1):
                    if point_in_polygon(self.center(i, j), poly):
                        self.owner[RIDGE, j, i] = _BLOCK

        # intrinsic bus segments + terminals
        for pk in self.placement.placed:
            bp = pk.blueprint
            sig_terms = [t for t in bp.terminals if t.net_role == "signal"]
            if len(sig_terms) == 2:
                a = self._to_device(pk, sig_terms[0].position)
                b = self._to_device(pk, sig_terms[1].position)
                self.intrinsics.setdefault(self.signal_idx, []).append((a, b))
                self._add_trace(self.signal_idx, RIDGE, [a, b], intrinsic=True)
                if bp.kind == "digital":
                    # traversable cells along the bus; the bar itself joins
                    # them even where rotation leaves only diagonal adjacency
                    group = set()
                    for (i, j) in self._cells_along(a, b, 2.70):
                        self.owner[RIDGE, j, i] = self.signal_idx
                        group.add((RIDGE, i, j))
                    for c in group:
                        self.cell_groups.setdefault(c, set()).update(group)
            for t in bp.terminals:
                if t.net_role == "signal":
                    continue
                pos = self._to_device(pk, t.position)
                net = self._net_for_terminal(pk, t.net_role)
                self._add_joint(net, pos, FLOOR)
                anchor = self.joints[-1].anchor
                self.term_anchor.setdefault(net, []).append(
                    (anchor[1], anchor[2]))
        self._piano_chain_joints()

        # socket pads: exclusion disks on both layers, anchored at the
        # center.  Neighbouring disks overlap, so each cell goes to its
        # nearest pad; every disk then stays one contiguous region.
        if socket_plan:
            claim: dict[tuple[int, int], tuple[float, int]] = {}
            for pad in socket_plan.pads:
                idx = self.idx_of[pad.net_id] if pad.net_id else _BLOCK
                for (i, j) in self._cells_near(*pad.position, 6.5):
                    x, y = self.center(i, j)
                    d = math.hypot(x - pad.position[0], y - pad.position[1])
                    if (i, j) not in claim or d < claim[(i, j)][0]:
                        claim[(i, j)] = (d, idx)
            for (i, j), (_, idx) in claim.items():
                for layer in (FLOOR, RIDGE):
                    if self.owner[layer, j, i] != _BLOCK:
                        self.owner[layer, j, i] = idx
            for pad in socket_plan.pads:
                if pad.net_id is not None:
                    layer = RIDGE if pad.net_id == "signal" else FLOOR
                    j = _Joint(self.idx_of[pad.net_id], pad.position, layer)
                    j.anchor = (layer, *self.cell(*pad.position))
                    self.joints.append(j)

        # strips: exclusive floor regions, entry cell owned by the meander
        # net.  Flipped strips sit in front of the shell with the entry on
        # the key side and the rail along the outer edge.
        for s in strips:
            idx = self._strip_owner_idx(s)
            s["entry_cell"] = (s["i0"], s["j0"] + s["d"]) if s["flip"] \
                else (s["i0"], s["j0"] - 1)
            for j in range(s["j0"], s["j0"] + s["d"]):
                for i in range(s["i0"], s["i0"] + s["cols"]):
                    self.owner[FLOOR, j, i] = _BLOCK
            ei, ej = s["entry_cell"]
            self.owner[FLOOR, ej, ei] = idx

        # exit slots
        for nid, (i, j) in slot_cells.items():
            layer = RIDGE if nid == "signal" else FLOOR
            self.owner[layer, j, i] = self.idx_of[nid]
            self.exit_points[nid] = self.center(i, j)

        # escape lane waypoints
        for nid, (i, j) in self.lane_cells.items():
            self.owner[FLOOR, j, i] = self.idx_of[nid]

    def _strip_owner_idx(self, s: dict) -> int:
        net = s["net"]
        if s["member"] is not None:
            key = (net.id, s["member"])
            for idx, tag in self.pseudo_net.items():
                if tag == key:
                    return idx
            idx = len(self.nets) + len(self.pseudo_net)
            self.pseudo_net[idx] = key
            return idx
        return self.idx_of[net.id]

    def _net_for_terminal(self, pk, role: str) -> int:
        if role == "capacitive":
            return self.idx_of[f"cap_{pk.key.id}"]
        if pk.key.ladder_group:
            key = (f"ladder_{pk.key.ladder_group}", pk.key.id)
            for idx, tag in self.pseudo_net.items():
                if tag == key:
                    return idx
            idx = len(self.nets) + len(self.pseudo_net)
            self.pseudo_net[idx] = key
            return idx
        return self.idx_of[f"return_{pk.key.id}"]

    def _to_device(self, pk, local) -> tuple[float, float]:
        x, y = rot2d(local, pk.rotation_deg) if pk.rotation_deg else local
        return (pk.x_mm + x, pk.y_mm + y)

    def _cells_along(self, a, b, halfwidth):
        seen = set()
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        steps = max(2, int(length / (self.p / 2)) + 1)
        for t in range(steps + 1):
            x = a[0] + (b[0] - a[0]) * t / steps
            y = a[1] + (b[1] - a[1]) * t / steps
            for (i, j) in self._cells_near(x, y, halfwidth):
                if (i, j) not in seen:
                    seen.add((i, j))
                    yield i, j

    def _add_joint(self, net_idx: int, point, layer: int) -> None:
        joint = _Joint(net_idx, point, layer)
        anchor_cell = self.cell(*point)
        joint.anchor = (layer, *anchor_cell)
        for (i, j) in self._cells_near(*point, 6.5):
            if self.owner[layer, j, i] != _BLOCK or (i, j) == anchor_cell:
                self.owner[layer, j, i] = net_idx
        self.owner[layer, anchor_cell[1], anchor_cell[0]] = net_idx
        self.joints.append(joint)

    def _piano_chain_joints(self) -> None:
        """Signal attaches to piano bus chains at their outermost terminals."""
        segs = []
        for pk in self.placement.placed:
            if pk.blueprint.kind != "piano":
                continue
            ts = [t for t in pk.blueprint.terminals if t.net_role == "signal"]
            if len(ts) == 2:
                segs.append((self._to_device(pk, ts[0].position),
                             self._to_device(pk, ts[1].position)))
        if not segs:
            return
        rnd = lambda q: (round(q[0], 4), round(q[1], 4))
        count: dict[tuple, int] = {}
        for a, b in segs:
            for q in (a, b):
                count[rnd(q)] = count.get(rnd(q), 0) + 1
        for a, b in segs:
            for q in (a, b):
                if count[rnd(q)] == 1:  # chain end, not an interior joint
                    self._add_joint(self.signal_idx, q, RIDGE)

    # -- trace bookkeeping -------------------------------------------------

    def _add_trace(self, net_idx: int, layer: int, points, intrinsic=False) -> None:
        nid = self._net_id(net_idx)
        pts = _simplify(list(points))
        if len(pts) < 2 or polyline_length(list(pts)) < 1e-9:
            return
        self.traces.append(TraceSegment(
            net_id=nid, layer=LAYER_NAMES[layer], points=pts,
            width_mm=self.rules.trace_size_mm, intrinsic=intrinsic))
        self.polys_of.setdefault(net_idx, []).append((LAYER_NAMES[layer], pts))

    def _net_id(self, idx: int) -> str:
        if idx in self.pseudo_net:
            return self.pseudo_net[idx][0]
        return self.nets[idx].id

    # -- search ------------------------------------------------------------

    def _bfs(self, net_idx: int, sources, targets, layer: int):
        """Shortest grid path, beelining: among equal-length paths the one
        that stays nearest the straight line to a target wins, so parallel
        runs rise directly below their pads instead of fencing each other.
        """
        owner = self.owner[layer]
        tset = set(targets)
        hpts = sorted(tset)[:40]  # heuristic sample; admissible either way

        def h(c):
            # Manhattan bound plus a squared-euclidean tie-break: among
            # equal-length staircases the one closest to the straight line
            # wins, keeping parallel runs out of each other's way
            best = best2 = None
            for t in hpts:
                dx, dy = abs(c[0] - t[0]), abs(c[1] - t[1])
                m, e = dx + dy, dx * dx + dy * dy
                if best is None or m < best or (m == best and e < best2):
                    best, best2 = m, e
            return (best or 0, best2 or 0)

        heap = []
        prev: dict[tuple[int, int], tuple[int, int] | None] = {}
        tick = 0
        for c in sorted(set(sources)):
            prev[c] = None
            hm, he = h(c)
            heapq.heappush(heap, (hm, he, tick, 0, c))
            tick += 1
        while heap:
            _, _, _, g, cur = heapq.heappop(heap)
            if cur in tset:
                path = [cur]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                path.reverse()
                return path
            ci, cj = cur
            for di, dj in ((0, 1), (1, 0), (-1, 0), (0, -1)):
                ni, nj = ci + di, cj + dj
                if not (0 <= ni < self.nx and 0 <= nj < self.ny):
                    continue
                if (ni, nj) in prev:
                    continue
                o = owner[nj, ni]
                if o != _FREE and o != net_idx and (ni, nj) not in tset:
                    continue
                prev[(ni, nj)] = cur
                hm, he = h((ni, nj))
                heapq.heappush(heap, (g + 1 + hm, he, tick, g + 1, (ni, nj)))
                tick += 1
        return None

    def _components(self, net_idx: int):
        """Connected groups of this net's cells across both layers."""
        cells = set()
        for layer in (FLOOR, RIDGE):
            js, is_ = np.nonzero(self.owner[layer] == net_idx)
            cells.update((layer, int(i), int(j)) for i, j in zip(is_, js))
        comps = []
        todo = set(cells)
        while todo:
            seed = min(todo)
            comp = {seed}
            frontier = [seed]
            todo.discard(seed)
            while frontier:
                l, i, j = frontier.pop()
                neigh = [(l, i + 1, j), (l, i - 1, j), (l, i, j + 1),
                         (l, i, j - 1), (1 - l, i, j)]
                neigh += self.cell_groups.get((l, i, j), ())
                for c in neigh:
                    if c in todo:
                        todo.discard(c)
                        comp.add(c)
                        frontier.append(c)
            comps.append(comp)
        return comps

    def _anchors_in(self, comp, net_idx: int):
        return [j.anchor for j in self.joints
                if j.net_idx == net_idx and j.anchor in comp]

    def _merge_net(self, net_idx: int, layer: int) -> None:
        """Join all components of a net with routed paths on one layer."""
        while True:
            comps = self._components(net_idx)
            if len(comps) <= 1:
                break
            base = comps[0]
            rest = set().union(*comps[1:])
            anchors = self._anchors_in(base, net_idx)
            if anchors:
                sources = [(i, j) for (l, i, j) in anchors if l == layer]
            else:
                sources = [(i, j) for (l, i, j) in base if l == layer]
            target_anchor_cells = []
            for comp in comps[1:]:
                a = self._anchors_in(comp, net_idx)
                if a:
                    target_anchor_cells += [(i, j) for (l, i, j) in a if l == layer]
            if target_anchor_cells:
                targets = target_anchor_cells
            else:
                targets = [(i, j) for (l, i, j) in rest if l == layer]
            if not sources or not targets:
                raise RoutingError(
                    f"net '{self._net_id(net_idx)}' has a component with no "
                    f"routable cells on the {LAYER_NAMES[layer]} layer")
            path = self._bfs(net_idx, sources, targets, layer)
            if path is None:
                raise RoutingError(
                    f"net '{self._net_id(net_idx)}': no path between its "
                    f"islands on the {LAYER_NAMES[layer]} layer")
            for (i, j) in path:
                self.owner[layer, j, i] = net_idx
            self.covered.setdefault(net_idx, set()).update(
                (layer, i, j) for (i, j) in path)
            self._add_trace(net_idx, layer,
                            [self.center(i, j) for (i, j) in path])

    # -- full routing pass -------------------------------------------------

    def _route_all(self, designs, strips, slot_cells, socket_plan,
                   return_nets, cap_nets, ladder_nets, tap_nets) -> None:
        # rails first: plain lattice traces the meanders terminate on
        group_strips: dict[str, list[dict]] = {}
        tap_strips: list[dict] = []
        for s in strips:
            if s["member"] is not None:
                group_strips.setdefault(s["net"].id, []).append(s)
            else:
                tap_strips.append(s)
        for nid, ss in sorted(group_strips.items()):
            self._lay_rail(self.idx_of[nid], ss)
        if tap_strips:
            self._lay_rail(self.idx_of["ground"], tap_strips)

        # signal bus: merge every row / pad / slot island on the ridge
        self._merge_net(self.signal_idx, RIDGE)

        # ladder members: escape to the strip entry, then exact meanders.
        # These short drops from key bus to strip entry go before the lane
        # trunks so a rail-fed trunk sweeping across the strip band cannot
        # fence a bus off from its own entry.
        for net in ladder_nets:
            self._route_ladder(net, designs[net.ladder_group],
                               group_strips.get(net.id, []))

        # phase 1 (socket): escape each laned net to its lane waypoint.
        # Key nets go outermost lane first: where the shell outline tapers,
        # every net on a flank funnels through the same narrow gap behind
        # it, and outer-first lets each run claim the outer free column so
        # the escapes nest instead of crossing.  Ground and ladder nets
        # rise from their rail, which pins each trunk to its own lane
        # column; the rail spans the whole front, so those trunks go last
        # and bend around whatever the key escapes already claimed.
        mid_i = (min(l[0] for l in self.lane_cells.values())
                 + max(l[0] for l in self.lane_cells.values())) / 2.0 \
            if self.lane_cells else 0.0

        def _lane_order(item):
            nid, lane = item
            return (self.idx_of[nid] not in self.term_anchor,
                    -abs(lane[0] - mid_i), lane)

        for nid, lane in sorted(self.lane_cells.items(), key=_lane_order):
            idx = self.idx_of[nid]
            srcs = self.term_anchor.get(idx) or \
                [(i, j) for (l, i, j) in sorted(self.covered.get(idx, ()))
                 if l == FLOOR]
            path = self._bfs(idx, srcs, [lane], FLOOR)
            if path is None:
                raise RoutingError(
                    f"net '{nid}': no escape path to its rear lane")
            for (i, j) in path:
                self.owner[FLOOR, j, i] = idx
            self.covered.setdefault(idx, set()).update(
                (FLOOR, i, j) for (i, j) in path)
            self._add_trace(idx, FLOOR, [self.center(i, j) for (i, j) in path])

        # phase 2: merge every pad net with its pad / slot island.  With a
        # socket, nets whose pads sit near the bottom of the ring route
        # first and hug it; later nets wrap around outside them.
        def _wrap_cost(net: Net):
            pin = self.netlist.pin_assignments.get(net.id)
            if pin in FLORA_PAD_RING:
                u = FLORA_PAD_RING.index(pin) * 360.0 / len(FLORA_PAD_RING)
                return (min(u, 360.0 - u), net.id)
            return (0.0, net.id)

        if socket_plan:
            surface = return_nets + cap_nets + ladder_nets
            if "ground" in self.idx_of:
                surface = surface + [self.netlist.net("ground")]
            for net in sorted(surface, key=_wrap_cost):
                self._merge_net(self.idx_of[net.id], FLOOR)
        else:
            # closest net first: rear keys take the slots above their own
            # faces with short verticals, and every farther net then
            # threads the inter-key channels or the open front field
            # around the already-committed runs instead of sealing them in
            pending = sorted(n.id for n in return_nets + cap_nets + ladder_nets)
            while pending:
                best = None
                for nid in pending:
                    path = self._slot_path(self.idx_of[nid])
                    if path is not None and (best is None
                                             or len(path) < len(best[1])):
                        best = (nid, path)
                if best is None:
                    raise RoutingError(
                        f"net '{pending[0]}': no path to a free exit slot")
                self._commit_slot(best[0], best[1])
                self._merge_net(self.idx_of[best[0]], FLOOR)
                pending.remove(best[0])

        # pull-down taps: resistor strip entry to the net it senses
        for net in tap_nets:
            s = next(t for t in tap_strips if t["net"].id == net.id)
            self._route_tap(net, s)

        self._attach_stubs()

    def _slot_path(self, idx: int):
        """Shortest route from a net's copper to any free exit slot."""
        srcs = {(int(i), int(j)) for j, i in
                zip(*np.nonzero(self.owner[FLOOR] == idx))}
        srcs.update((i, j) for (l, i, j) in self.covered.get(idx, ())
                    if l == FLOOR)
        return self._bfs(idx, sorted(srcs), sorted(self.free_slots), FLOOR)

    def _commit_slot(self, nid: str, path: list[tuple[int, int]]) -> None:
        idx = self.idx_of[nid]
        for (i, j) in path:
            self.owner[FLOOR, j, i] = idx
        self.covered.setdefault(idx, set()).update(
            (FLOOR, i, j) for (i, j) in path)
        self._add_trace(idx, FLOOR, [self.center(i, j) for (i, j) in path])
        slot = path[-1]
        self.free_slots.remove(slot)
        self.exit_points[nid] = self.center(*slot)

    def _lay_rail(self, net_idx: int, strips: list[dict]) -> None:
        j_rail = strips[0]["rail_j"]
        i_lo = min(s["i0"] for s in strips)
        i_hi = max(s["i0"] + s["cols"] - 1 for s in strips)
        for i in range(i_lo, i_hi + 1):
            self.owner[FLOOR, j_rail, i] = net_idx
        self.covered.setdefault(net_idx, set()).update(
            (FLOOR, i, j_rail) for i in range(i_lo, i_hi + 1))
        a = self.center(i_lo, j_rail)
        b = self.center(i_hi, j_rail)
        self._add_trace(net_idx, FLOOR, [a, b])

    def _route_ladder(self, net: Net, design: electrical.LadderDesign,
                      strips: list[dict]) -> None:
        members: list[LadderMember] = []
        by_key = {s["member"]: s for s in strips}
        term_of = {t.key_id: t for t in net.terminals}
        for entry in design.entries:
            s = by_key[entry.key_id]
            idx = self._strip_owner_idx(s)
            # escape: merge the key column with the strip entry cell
            self._merge_net(idx, FLOOR)
            escape = sum(polyline_length(list(pts))
                         for (_, pts) in self.polys_of.get(idx, []))
            # terminal stub not yet added; account for it now
            term = term_of[entry.key_id]
            stub = self._stub_to_polylines(idx, term.position)
            escape += stub
            ei, ej = s["entry_cell"]
            entry_stub_len = self.p  # one pitch from the entry cell in
            m_target = entry.trace_length_mm - escape - entry_stub_len
            depth = s["d"] * self.p
            if m_target < depth:
                raise RoutingError(
                    f"ladder key '{entry.key_id}': escape run of {escape:.1f} mm "
                    f"leaves only {m_target:.1f} mm for its meander")
            region, pts = self._strip_meander(s, m_target)
            entry_stub = [self.center(ei, ej), pts[0]]
            self._add_trace(idx, FLOOR, entry_stub)
            escape += polyline_length(entry_stub)
            realized = escape + polyline_length(pts)
            ohms = electrical.trace_resistance(realized,
                                               self.rules.trace_size_mm ** 2)
            self.resistors.append(ResistorMeander(
                id=f"{net.id}_{entry.key_id}", net_id=net.id, bridges=None,
                target_ohms=entry.resistance_ohms,
                realized_ohms=electrical.trace_resistance(
                    polyline_length(pts), self.rules.trace_size_mm ** 2),
                length_mm=polyline_length(pts), points=tuple(pts),
                region=region))
            counts = electrical._divider_counts(ohms, design.pulldown_ohms,
                                                design.adc_bits)
            members.append(LadderMember(
                key_id=entry.key_id, escape_mm=escape,
                meander_mm=polyline_length(pts), total_mm=realized,
                resistance_ohms=ohms, predicted_counts=counts))
        counts_sorted = sorted(m.predicted_counts for m in members)
        for a, b in zip(counts_sorted, counts_sorted[1:]):
            if b - a < design.min_separation_counts:
                self.warnings.append(
                    f"ladder '{net.ladder_group}': realized readings {a} and "
                    f"{b} are closer than {design.min_separation_counts} counts")
        self.ladder_out[net.ladder_group] = (design, tuple(members))

    def _route_tap(self, net: Net, s: dict) -> None:
        bridged_idx = self.idx_of[net.bridges[0]]
        tap_idx = self.idx_of[net.id]
        ei, ej = s["entry_cell"]
        targets = {(i, j) for (l, i, j) in self.covered.get(bridged_idx, set())
                   if l == FLOOR}
        targets.update(
            (int(i), int(j)) for j, i in
            zip(*np.nonzero(self.owner[FLOOR] == bridged_idx)))
        path = self._bfs(tap_idx, [(ei, ej)], sorted(targets), FLOOR)
        if path is None:
            raise RoutingError(
                f"pull-down '{net.id}': no path from its resistor strip to "
                f"net '{net.bridges[0]}'")
        for (i, j) in path[:-1]:
            self.owner[FLOOR, j, i] = tap_idx
        pts = [self.center(i, j) for (i, j) in path]
        # land on the bridged copper itself, not just inside its cell
        touch = self._closest_on_net(bridged_idx, pts[-1], FLOOR)
        if touch is not None:
            pts.append(touch)
        self._add_trace(tap_idx, FLOOR, pts)
        target_len = electrical.length_for_resistance(
            net.target_ohms, self.rules.trace_size_mm ** 2)
        region, mpts = self._strip_meander(s, target_len)
        self._add_trace(tap_idx, FLOOR, [self.center(ei, ej), mpts[0]])
        self.resistors.append(ResistorMeander(
            id=net.id, net_id=net.id, bridges=net.bridges,
            target_ohms=net.target_ohms,
            realized_ohms=electrical.trace_resistance(
                polyline_length(mpts), self.rules.trace_size_mm ** 2),
            length_mm=polyline_length(mpts), points=tuple(mpts), region=region))

    def _strip_meander(self, s: dict, target_len: float):
        """Exact-length meander polyline inside one resistor strip.

        Flipped strips generate the same serpentine mirrored vertically so
        the free end still faces the entry cell and the far end lands on
        the rail.
        """
        p = self.p
        x0 = self.center(s["i0"], 0)[0] - p / 2.0
        if s["flip"]:
            ylo = self.center(0, s["rail_j"])[1]
            yhi = self.center(0, s["j0"] + s["d"] - 1)[1]
        else:
            ylo = self.center(0, s["j0"])[1]
            yhi = self.center(0, s["rail_j"])[1]
        region = (x0, ylo, x0 + s["cols"] * p, yhi)
        pts = synthesize_resistor_meander(target_len, region, self.rules)
        if s["flip"]:
            pts = [(x, ylo + yhi - y) for (x, y) in pts]
        return region, pts

    def _closest_on_net(self, net_idx: int, point, layer: int):
        best = None
        best_d = float("inf")
        for layer_name, pts in self.polys_of.get(net_idx, []):
            if LAYER_NAMES.index(layer_name) != layer:
                continue
            for a, b in zip(pts, pts[1:]):
                d = point_seg_distance(point, a, b)
                if d < best_d:
                    best_d = d
                    best = self._closest_on_seg(point, a, b)
        return best if best is not None and best_d > 1e-9 else None

    # -- stubs -------------------------------------------------------------

    def _stub_to_polylines(self, net_idx: int, point) -> float:
        """Trace from an off-grid joint to the nearest routed point."""
        best = None
        best_d = float("inf")
        best_layer = FLOOR
        for layer_name, pts in self.polys_of.get(net_idx, []):
            for a, b in zip(pts, pts[1:]):
                d = point_seg_distance(point, a, b)
                if d < best_d:
                    best_d = d
                    best = self._closest_on_seg(point, a, b)
                    best_layer = LAYER_NAMES.index(layer_name)
        if best is None or best_d < 1e-9:
            return 0.0
        self._add_trace(net_idx, best_layer, [point, best])
        return best_d

    @staticmethod
    def _closest_on_seg(q, a, b):
        ax, ay = a
        bx, by = b
        dx, dy = bx - ax, by - ay
        denom = dx * dx + dy * dy
        t = 0.0 if denom == 0 else max(0.0, min(1.0, ((q[0] - ax) * dx + (q[1] - ay) * dy) / denom))
        return (ax + t * dx, ay + t * dy)

    def _attach_stubs(self) -> None:
        # joint stubs: terminal / pad center to its routed geometry
        for joint in self.joints:
            if joint.net_idx in self.pseudo_net:
                continue  # ladder members already accounted their stubs
            self._stub_to_polylines(joint.net_idx, joint.point)
        # signal endpoints that sit beside an off-grid bus line
        segs = self.intrinsics.get(self.signal_idx, [])
        if not segs:
            return
        extra = []
        for layer_name, pts in list(self.polys_of.get(self.signal_idx, [])):
            if layer_name != "ridge":
                continue
            for end in (pts[0], pts[-1]):
                best_d = float("inf")
                best = None
                for a, b in segs:
                    d = point_seg_distance(end, a, b)
                    if d < best_d:
                        best_d = d
                        best = self._closest_on_seg(end, a, b)
                if best is not None and 1e-6 < best_d <= 2.8:
                    extra.append([end, best])
        for stub in extra:
            self._add_trace(self.signal_idx, RIDGE, stub)


def route_nets(netlist: Netlist, placement: Placement, shell: ShellOutline,
               spec: DeviceSpec, rules: RoutingRules | None = None) -> RoutePlan:
    """Deterministically route every net; raises RoutingError on failure."""
    return _Router(netlist, placement, shell, spec,
                   rules or RoutingRules()).run()
