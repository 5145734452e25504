"""Trace resistance, analog ladder design, and the capacitance press model.

The ladder tests use a brute-force voltage-divider evaluation as an
independent oracle for every designed resistance.
"""

import math

import pytest
from hypothesis import given, strategies as st

from keyforge.electrical import (
    CapacitanceModel,
    LadderError,
    MaterialElectrical,
    calibrate_capacitance_model,
    classify_press,
    design_analog_ladder,
    length_for_resistance,
    plate_capacitance,
    predict_adc_counts,
    trace_resistance,
)

EPS0 = 8.8541878128e-15  # F/mm


def brute_counts(r_key: float, pulldown: float, bits: int) -> int:
    """Independent divider oracle: V = Vcc * Rpd / (Rpd + Rkey), quantized."""
    full = (1 << bits) - 1
    return round(full * pulldown / (pulldown + r_key))


class TestTraceResistance:
    def test_reference_value_exact(self):
        # 200 ohm-cm over a 2.54 mm square section is 310 ohm per mm
        assert round(trace_resistance(10.0)) == 3100
        assert trace_resistance(10.0) == pytest.approx(3100.0, rel=1e-5)

    def test_linear_in_length(self):
        assert trace_resistance(25.0) == pytest.approx(2.5 * trace_resistance(10.0))

    def test_inverse_in_area(self):
        assert trace_resistance(10.0, cross_section_mm2=1.0) == pytest.approx(
            2.54 * 2.54 * trace_resistance(10.0))

    @given(length=st.floats(min_value=0.01, max_value=1000.0))
    def test_length_round_trip(self, length):
        r = trace_resistance(length)
        assert length_for_resistance(r) == pytest.approx(length, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            trace_resistance(-1.0)
        with pytest.raises(ValueError):
            trace_resistance(10.0, cross_section_mm2=0.0)
        with pytest.raises(ValueError):
            MaterialElectrical(resistivity_ohm_cm=0.0)


class TestLadderDesign:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_separation_against_brute_force(self, n):
        keys = [f"K{i}" for i in range(n)]
        design = design_analog_ladder(keys, min_separation_counts=20)
        counts = [brute_counts(e.resistance_ohms, design.pulldown_ohms,
                               design.adc_bits) for e in design.entries]
        assert len(counts) == n
        for a in range(n):
            for b in range(a + 1, n):
                assert abs(counts[a] - counts[b]) >= 20
        # open circuit (pull-down only) must be separable from every key
        assert all(c >= 20 for c in counts)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_predict_matches_brute_force(self, n):
        keys = [f"K{i}" for i in range(n)]
        design = design_analog_ladder(keys, min_separation_counts=20)
        for e in design.entries:
            assert predict_adc_counts(design, e.key_id) == brute_counts(
                e.resistance_ohms, design.pulldown_ohms, design.adc_bits)
        assert predict_adc_counts(design, None) == 0

    def test_entries_sorted_by_resistance(self):
        design = design_analog_ladder(["A", "B", "C", "D"])
        rs = [e.resistance_ohms for e in design.entries]
        assert rs == sorted(rs)

    def test_lengths_are_printable(self):
        design = design_analog_ladder([f"K{i}" for i in range(8)])
        for e in design.entries:
            assert 10.0 <= e.trace_length_mm <= 500.0

    def test_infeasible_key_count_rejected(self):
        with pytest.raises(LadderError):
            design_analog_ladder([f"K{i}" for i in range(200)],
                                 min_separation_counts=20)

    def test_unknown_key_rejected(self):
        design = design_analog_ladder(["A"])
        with pytest.raises(LadderError):
            predict_adc_counts(design, "Z")


class TestCapacitance:
    def test_parallel_plate_formula(self):
        assert plate_capacitance(100.0, 2.0) == pytest.approx(
            EPS0 * 100.0 / 2.0, rel=1e-12)

    def test_capacitance_grows_as_gap_closes(self):
        caps = [plate_capacitance(100.0, g) for g in (8.0, 4.0, 2.0, 1.0, 0.3)]
        assert caps == sorted(caps)

    def test_calibrated_thresholds_increase(self):
        model = calibrate_capacitance_model(100.0, 8.64)
        h, p, f = model.thresholds
        assert h < p < f

    def test_classification_buckets(self):
        model = calibrate_capacitance_model(100.0, 8.64)
        h, p, f = model.thresholds
        assert classify_press(0.0, model) == "none"
        assert classify_press(h, model) == "hover"
        assert classify_press((h + p) / 2.0, model) == "hover"
        assert classify_press(p, model) == "partial"
        assert classify_press(f * 2.0, model) == "full"

    @given(a=st.floats(min_value=0.0, max_value=1e-9),
           b=st.floats(min_value=0.0, max_value=1e-9))
    def test_classification_monotone(self, a, b):
        model = calibrate_capacitance_model(100.0, 8.64)
        order = ["none", "hover", "partial", "full"]
        lo, hi = sorted((a, b))
        assert order.index(classify_press(lo, model)) <= \
            order.index(classify_press(hi, model))

    def test_bad_thresholds_rejected(self):
        with pytest.raises(ValueError):
            CapacitanceModel(electrode_area_mm2=100.0, gap_free_mm=5.0,
                             thresholds=(3.0, 2.0, 1.0))
