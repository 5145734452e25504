"""Independent electrical verification of a routed plan.

This deliberately avoids the router's grid: connectivity is union-find over
the emitted polylines' geometry, and clearance is measured with exact
segment-to-segment distances.  A same-layer contact between different nets
is a short unless a printed pull-down resistor declares the pair bridged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import seg_seg_distance
from .netlist import Netlist
from .router import RoutePlan

TOUCH_TOL_MM = 0.01


@dataclass(frozen=True)
class ClearanceViolation:
    net_a: str
    net_b: str
    layer: str
    distance_mm: float
    location: tuple[float, float]

    def __str__(self) -> str:
        kind = "short" if self.distance_mm <= TOUCH_TOL_MM else "clearance"
        return (f"{kind}: '{self.net_a}' and '{self.net_b}' on {self.layer} "
                f"are {self.distance_mm:.3f} mm apart near "
                f"({self.location[0]:.1f}, {self.location[1]:.1f})")


@dataclass
class VerificationReport:
    connected: dict[str, bool]
    unreached_terminals: list[tuple[str, tuple[float, float]]]
    violations: list[ClearanceViolation]
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (all(self.connected.values()) and not self.violations
                and not self.unreached_terminals and not self.problems)


class _Element:
    __slots__ = ("net", "layer", "segs", "box")

    def __init__(self, net: str, layer: str, points):
        self.net = net
        self.layer = layer
        self.segs = list(zip(points, points[1:]))
        xs = [q[0] for q in points]
        ys = [q[1] for q in points]
        self.box = (min(xs), min(ys), max(xs), max(ys))


def _min_distance(e1: _Element, e2: _Element) -> tuple[float, tuple[float, float]]:
    best = float("inf")
    loc = (0.0, 0.0)
    for a1, b1 in e1.segs:
        for a2, b2 in e2.segs:
            d = seg_seg_distance(a1, b1, a2, b2)
            if d < best:
                best = d
                loc = ((a1[0] + b1[0] + a2[0] + b2[0]) / 4.0,
                       (a1[1] + b1[1] + a2[1] + b2[1]) / 4.0)
                if best <= 0.0:
                    return best, loc
    return best, loc


def _boxes_apart(b1, b2, margin: float) -> bool:
    return (b1[2] + margin < b2[0] or b2[2] + margin < b1[0]
            or b1[3] + margin < b2[1] or b2[3] + margin < b1[1])


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def verify_routes(plan: RoutePlan, netlist: Netlist) -> VerificationReport:
    """Check net connectivity, terminal attachment, and trace clearance."""
    elements: list[_Element] = []
    for tr in plan.traces:
        elements.append(_Element(tr.net_id, tr.layer, list(tr.points)))
    for rm in plan.resistors:
        elements.append(_Element(rm.net_id, rm.layer, list(rm.points)))

    by_net: dict[str, list[int]] = {}
    for i, e in enumerate(elements):
        by_net.setdefault(e.net, []).append(i)

    exempt: set[frozenset[str]] = set()
    for net in netlist.nets:
        if net.net_class == "resistor_tap" and net.bridges:
            exempt.add(frozenset((net.id, net.bridges[0])))
            exempt.add(frozenset((net.id, net.bridges[1])))

    # -- connectivity per net
    connected: dict[str, bool] = {}
    unreached: list[tuple[str, tuple[float, float]]] = []
    problems: list[str] = []
    for net in netlist.nets:
        idxs = by_net.get(net.id, [])
        if not idxs:
            if net.terminals:
                connected[net.id] = False
                problems.append(f"net '{net.id}' has terminals but no traces")
            else:
                connected[net.id] = True
            continue
        uf = _UnionFind(len(idxs))
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                e1, e2 = elements[idxs[a]], elements[idxs[b]]
                if _boxes_apart(e1.box, e2.box, TOUCH_TOL_MM):
                    continue
                d, _ = _min_distance(e1, e2)
                if d <= TOUCH_TOL_MM:
                    uf.union(a, b)
        roots = {uf.find(a) for a in range(len(idxs))}
        connected[net.id] = len(roots) == 1
        if len(roots) != 1:
            problems.append(
                f"net '{net.id}' splits into {len(roots)} disconnected pieces")
        for term in net.terminals:
            tx, ty = term.position
            hit = False
            for a in idxs:
                for s, e in elements[a].segs:
                    if seg_seg_distance((tx, ty), (tx, ty), s, e) <= TOUCH_TOL_MM:
                        hit = True
                        break
                if hit:
                    break
            if not hit:
                unreached.append((net.id, term.position))

    # pull-down taps must actually touch both bridged nets
    for net in netlist.nets:
        if net.net_class != "resistor_tap" or not net.bridges:
            continue
        for other in net.bridges:
            touching = False
            for a in by_net.get(net.id, []):
                for b in by_net.get(other, []):
                    if _boxes_apart(elements[a].box, elements[b].box, TOUCH_TOL_MM):
                        continue
                    d, _ = _min_distance(elements[a], elements[b])
                    if d <= TOUCH_TOL_MM:
                        touching = True
                        break
                if touching:
                    break
            if not touching:
                problems.append(
                    f"pull-down '{net.id}' never reaches net '{other}'")

    # -- clearance between different nets on the same layer
    width = plan.rules.trace_size_mm
    need = width + plan.rules.clearance_mm
    violations: list[ClearanceViolation] = []
    for i in range(len(elements)):
        for j in range(i + 1, len(elements)):
            e1, e2 = elements[i], elements[j]
            if e1.net == e2.net or e1.layer != e2.layer:
                continue
            if frozenset((e1.net, e2.net)) in exempt:
                continue
            if _boxes_apart(e1.box, e2.box, need):
                continue
            d, loc = _min_distance(e1, e2)
            if d < need - 1e-6:
                violations.append(ClearanceViolation(
                    net_a=e1.net, net_b=e2.net, layer=e1.layer,
                    distance_mm=d, location=loc))

    return VerificationReport(connected=connected,
                              unreached_terminals=unreached,
                              violations=violations, problems=problems)
