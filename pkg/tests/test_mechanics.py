"""Force presets, analytic spring models, and the strain durability proxy."""

import math

import pytest
from hypothesis import given, strategies as st

from keyforge.mechanics import (
    BeamParams,
    CoilParams,
    FORCE_TABLE_LBF,
    LBF_TO_NEWTON,
    STRAIN_LIMIT,
    beam_activation_force,
    calibrate_effective_modulus,
    coil_spring_rate,
    max_bending_strain,
    preset_activation_force,
    preset_strain,
)

PRESET_CLASSES = sorted(FORCE_TABLE_LBF)


class TestPresetForces:
    @pytest.mark.parametrize("travel,stiff,mean,tol", [
        ("short", "high", 2.51, 0.15),
        ("short", "low", 0.64, 0.25),
        ("medium", "high", 1.00, 0.17),
        ("medium", "low", 0.49, 0.05),
        ("long", "high", 1.46, 0.13),
        ("long", "low", 0.97, 0.08),
    ])
    def test_published_values_exact(self, travel, stiff, mean, tol):
        est = preset_activation_force(travel, stiff)
        assert est.mean_lbf == mean
        assert est.tol_lbf == tol
        assert est.source == "measured-preset"

    @pytest.mark.parametrize("travel,stiff", PRESET_CLASSES)
    def test_newton_conversion(self, travel, stiff):
        est = preset_activation_force(travel, stiff)
        assert est.mean_newtons == pytest.approx(
            est.mean_lbf * 4.4482216153, rel=1e-9)
        assert est.tol_newtons == pytest.approx(
            est.tol_lbf * 4.4482216153, rel=1e-9)

    def test_unknown_class_rejected(self):
        with pytest.raises(KeyError):
            preset_activation_force("gigantic", "low")


def _beam(**overrides) -> BeamParams:
    base = dict(elastic_modulus_mpa=2000.0, length_mm=12.0, width_mm=8.0,
                thickness_mm=1.2, deflection_mm=0.5)
    base.update(overrides)
    return BeamParams(**base)


class TestBeamScaling:
    def test_reference_value(self):
        # F = 3 E I d / L^3 with I = w t^3 / 12
        p = _beam()
        inertia = 8.0 * 1.2**3 / 12.0
        assert beam_activation_force(p) == pytest.approx(
            3.0 * 2000.0 * inertia * 0.5 / 12.0**3, rel=1e-12)

    def test_cubic_in_thickness(self):
        f1 = beam_activation_force(_beam(thickness_mm=1.0))
        f2 = beam_activation_force(_beam(thickness_mm=2.0))
        assert f2 == pytest.approx(8.0 * f1, rel=1e-12)

    def test_linear_in_deflection(self):
        f1 = beam_activation_force(_beam(deflection_mm=0.3))
        f2 = beam_activation_force(_beam(deflection_mm=0.9))
        assert f2 == pytest.approx(3.0 * f1, rel=1e-12)

    def test_inverse_cubic_in_length(self):
        f1 = beam_activation_force(_beam(length_mm=10.0))
        f2 = beam_activation_force(_beam(length_mm=20.0))
        assert f1 == pytest.approx(8.0 * f2, rel=1e-12)

    @given(scale=st.floats(min_value=0.25, max_value=4.0))
    def test_scaling_law_property(self, scale):
        base = _beam()
        scaled = _beam(thickness_mm=base.thickness_mm * scale,
                       length_mm=base.length_mm * scale,
                       deflection_mm=base.deflection_mm * scale)
        # t^3 * d / L^3 leaves a single net factor of `scale`
        assert beam_activation_force(scaled) == pytest.approx(
            scale * beam_activation_force(base), rel=1e-9)

    def test_invalid_geometry_rejected(self):
        with pytest.raises(ValueError):
            _beam(length_mm=0.0)
        with pytest.raises(ValueError):
            _beam(deflection_mm=-0.1)


class TestCoilScaling:
    def test_reference_value(self):
        p = CoilParams(shear_modulus_mpa=800.0, wire_thickness_mm=1.2,
                       mean_diameter_mm=10.0, active_turns=4)
        assert coil_spring_rate(p) == pytest.approx(
            800.0 * 1.2**4 / (8.0 * 1000.0 * 4.0), rel=1e-12)

    def test_quartic_in_wire(self):
        k1 = coil_spring_rate(CoilParams(800.0, 1.0, 10.0, 4))
        k2 = coil_spring_rate(CoilParams(800.0, 2.0, 10.0, 4))
        assert k2 == pytest.approx(16.0 * k1, rel=1e-12)

    def test_inverse_cubic_in_diameter(self):
        k1 = coil_spring_rate(CoilParams(800.0, 1.2, 8.0, 4))
        k2 = coil_spring_rate(CoilParams(800.0, 1.2, 16.0, 4))
        assert k1 == pytest.approx(8.0 * k2, rel=1e-12)

    def test_wire_thicker_than_coil_rejected(self):
        with pytest.raises(ValueError):
            CoilParams(800.0, 12.0, 10.0, 4)


class TestStrainProxy:
    def test_formula(self):
        p = _beam()
        assert max_bending_strain(p) == pytest.approx(
            3.0 * 1.2 * 0.5 / (2.0 * 144.0), rel=1e-12)

    @pytest.mark.parametrize("travel,stiff", PRESET_CLASSES)
    def test_every_preset_under_limit(self, travel, stiff):
        assert preset_strain(travel, stiff) < STRAIN_LIMIT


class TestModulusCalibration:
    def test_exact_fit_recovers_modulus(self):
        e_true = 1850.0
        geoms = [_beam(thickness_mm=t, elastic_modulus_mpa=e_true)
                 for t in (0.8, 1.0, 1.2, 1.6)]
        meas = [(g, beam_activation_force(g)) for g in geoms]
        e_fit, residual = calibrate_effective_modulus(meas)
        assert e_fit == pytest.approx(e_true, rel=1e-12)
        assert residual < 1e-12

    def test_least_squares_on_noisy_data(self):
        g = _beam()
        f = beam_activation_force(g)
        meas = [(g, f * 0.9), (g, f * 1.1)]
        e_fit, residual = calibrate_effective_modulus(meas)
        assert e_fit == pytest.approx(g.elastic_modulus_mpa, rel=1e-12)
        assert residual == pytest.approx(math.hypot(0.1 * f, 0.1 * f), rel=1e-9)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            calibrate_effective_modulus([])
