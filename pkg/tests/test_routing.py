"""Trace routing: meander synthesis, route verification, and determinism.

The layer-separation check here is independent of both the router's grid
and the verifier: it scans realized trace segments pairwise with plain
segment-intersection geometry.
"""

import dataclasses

import pytest

from keyforge import parts
from keyforge.electrical import length_for_resistance, trace_resistance
from keyforge.frontend import parse_device_spec
from keyforge.geometry import polyline_length, segments_intersect
from keyforge.netlist import build_netlist
from keyforge.placement import build_shell, place_keys
from keyforge.router import (
    RoutingError,
    RoutingRules,
    route_nets,
    synthesize_resistor_meander,
)
from keyforge.verify import verify_routes

RULES = RoutingRules()


class TestMeanderSynthesis:
    @pytest.mark.parametrize("target_ohms", [1_000.0, 3_100.0, 10_000.0, 47_000.0])
    def test_resistance_round_trip(self, target_ohms):
        length = length_for_resistance(target_ohms)
        # the strip must not be deeper than the target so the serpentine has
        # slack to burn, and must be wide enough to hold the folded legs
        region = (0.0, 0.0, 100.0, min(15.0, length))
        pts = synthesize_resistor_meander(length, region, RULES)
        realized = trace_resistance(polyline_length(pts))
        assert realized == pytest.approx(target_ohms, rel=0.01)

    @pytest.mark.parametrize("length", [20.0, 33.7, 100.0, 321.5])
    def test_exact_length(self, length):
        pts = synthesize_resistor_meander(length, (0.0, 0.0, 100.0, 15.0), RULES)
        assert polyline_length(pts) == pytest.approx(length, abs=1e-6)

    def test_path_stays_inside_region(self):
        region = (5.0, -10.0, 65.0, 10.0)
        pts = synthesize_resistor_meander(250.0, region, RULES)
        x0, y0, x1, y1 = region
        for (x, y) in pts:
            assert x0 - 1e-9 <= x <= x1 + 1e-9
            assert y0 - 1e-9 <= y <= y1 + 1e-9

    def test_path_enters_south_exits_north(self):
        region = (0.0, 0.0, 60.0, 20.0)
        pts = synthesize_resistor_meander(150.0, region, RULES)
        assert pts[0][1] == pytest.approx(0.0)
        assert pts[-1][1] == pytest.approx(20.0)

    def test_serpentine_is_self_clearing(self):
        pts = synthesize_resistor_meander(400.0, (0.0, 0.0, 120.0, 20.0), RULES)
        segs = list(zip(pts, pts[1:]))
        for i in range(len(segs)):
            for j in range(i + 2, len(segs)):  # skip shared endpoints
                assert not segments_intersect(*segs[i], *segs[j])

    def test_region_too_narrow_rejected(self):
        with pytest.raises(RoutingError):
            synthesize_resistor_meander(5000.0, (0.0, 0.0, 10.0, 10.0), RULES)

    def test_region_deeper_than_length_rejected(self):
        with pytest.raises(RoutingError):
            synthesize_resistor_meander(5.0, (0.0, 0.0, 30.0, 20.0), RULES)


class TestRules:
    def test_pitch_must_cover_trace_and_clearance(self):
        with pytest.raises(ValueError):
            RoutingRules(grid_pitch_mm=3.0, trace_size_mm=2.54, clearance_mm=1.2)


def route_once(source: str):
    spec, diags = parse_device_spec(source)
    assert spec is not None, [str(d) for d in diags]
    bps = {k.id: parts.blueprint_for(k) for k in spec.keys}
    placement = place_keys(spec, bps)
    shell = build_shell(placement, spec.shell_policy)
    netlist = build_netlist(placement, spec)
    return route_nets(netlist, placement, shell, spec), netlist


class TestRoutedDevices:
    def test_verifier_reports_clean(self, compiled_devices):
        for name, result in compiled_devices.items():
            report = verify_routes(result.plan, result.netlist)
            assert report.ok, (name, report.violations, report.problems)
            assert report.violations == []
            assert all(report.connected.values())
            assert report.unreached_terminals == []

    def test_distinct_nets_never_cross_on_a_layer(self, compiled_devices):
        for name, result in compiled_devices.items():
            exempt = set()
            for net in result.netlist.nets:
                if net.bridges:
                    exempt.add(frozenset((net.id, net.bridges[0])))
                    exempt.add(frozenset((net.id, net.bridges[1])))
            elems = ([(t.net_id, t.layer, list(t.points))
                      for t in result.plan.traces]
                     + [(r.net_id, r.layer, list(r.points))
                        for r in result.plan.resistors])
            for i in range(len(elems)):
                for j in range(i + 1, len(elems)):
                    na, la, pa = elems[i]
                    nb, lb, pb = elems[j]
                    if na == nb or la != lb:
                        continue
                    if frozenset((na, nb)) in exempt:
                        continue
                    for sa in zip(pa, pa[1:]):
                        for sb in zip(pb, pb[1:]):
                            assert not segments_intersect(*sa, *sb), \
                                (name, na, nb, la, sa, sb)

    def test_signal_is_the_only_upper_layer_net(self, compiled_devices):
        for name, result in compiled_devices.items():
            upper = {t.net_id for t in result.plan.traces if t.layer == "ridge"}
            assert upper == {"signal"}, name

    def test_net_lengths_cover_all_routed_nets(self, compiled_devices):
        for result in compiled_devices.values():
            for net in result.netlist.nets:
                if net.terminals:
                    assert result.plan.net_lengths.get(net.id, 0.0) > 0.0

    def test_ladder_lengths_match_design(self, compiled_devices):
        plan = compiled_devices["aac"].plan
        assert plan.ladders
        for design, members in plan.ladders.values():
            realized = {m.key_id: m for m in members}
            for entry in design.entries:
                m = realized[entry.key_id]
                assert m.total_mm == pytest.approx(entry.trace_length_mm,
                                                   abs=1e-6)
                assert m.total_mm == pytest.approx(m.escape_mm + m.meander_mm,
                                                   abs=1e-6)


class TestDeterminism:
    def test_identical_plans_across_runs(self, device_sources):
        source = device_sources["gamepad"]
        plan_a, _ = route_once(source)
        plan_b, _ = route_once(source)
        assert plan_a.traces == plan_b.traces
        assert plan_a.resistors == plan_b.resistors
        assert plan_a.exit_points == plan_b.exit_points


class TestVerifierCatchesDamage:
    """The verifier must be able to fail; shift one net and watch it."""

    def test_disconnection_detected(self, compiled_devices):
        result = compiled_devices["gamepad"]
        victim = next(t.net_id for t in result.plan.traces
                      if t.net_id != "signal")
        broken = dataclasses.replace(
            result.plan,
            traces=[t if t.net_id != victim
                    else dataclasses.replace(
                        t, points=tuple((x + 500.0, y) for x, y in t.points))
                    for t in result.plan.traces])
        report = verify_routes(broken, result.netlist)
        assert not report.ok

    def test_clearance_violation_detected(self, compiled_devices):
        result = compiled_devices["gamepad"]
        # duplicate a floor trace under a new net id right on top of another
        floor = next(t for t in result.plan.traces if t.layer == "floor")
        clone = dataclasses.replace(floor, net_id="signal")
        broken = dataclasses.replace(result.plan,
                                     traces=list(result.plan.traces) + [clone])
        report = verify_routes(broken, result.netlist)
        assert report.violations
