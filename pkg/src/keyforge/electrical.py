"""Electrical models: trace resistance, analog resistor ladders, and the
analog key's parallel-plate capacitance with press classification.

The conductive filament is characterized by a volume resistivity of about
200 ohm-cm; traces have a fixed 2.54 x 2.54 mm square cross-section, so
resistance is set purely by centerline length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPSILON_0_F_PER_MM = 8.8541878128e-15  # vacuum permittivity, F/mm
DEFAULT_RESISTIVITY_OHM_CM = 200.0
DEFAULT_CROSS_SECTION_MM2 = 2.54 * 2.54
MAX_LADDER_LENGTH_MM = 500.0
MIN_LADDER_LENGTH_MM = 10.0


@dataclass(frozen=True)
class MaterialElectrical:
    resistivity_ohm_cm: float = DEFAULT_RESISTIVITY_OHM_CM

    def __post_init__(self):
        if self.resistivity_ohm_cm <= 0:
            raise ValueError("resistivity must be positive")

    @property
    def resistivity_ohm_mm(self) -> float:
        return self.resistivity_ohm_cm * 10.0


@dataclass(frozen=True)
class LadderEntry:
    key_id: str
    trace_length_mm: float
    resistance_ohms: float
    predicted_counts: int


@dataclass(frozen=True)
class LadderDesign:
    vcc_volts: float
    pulldown_ohms: float
    adc_bits: int
    entries: tuple[LadderEntry, ...]  # sorted by resistance ascending
    min_separation_counts: int


@dataclass(frozen=True)
class CapacitanceModel:
    electrode_area_mm2: float
    gap_free_mm: float
    thresholds: tuple[float, float, float]
    epsilon_r: float = 1.0

    def __post_init__(self):
        if self.gap_free_mm <= 0:
            raise ValueError("free gap must be positive")
        h, p, f = self.thresholds
        if not (h < p < f):
            raise ValueError("thresholds must be strictly increasing")


class LadderError(Exception):
    pass


def trace_resistance(length_mm: float, cross_section_mm2: float = DEFAULT_CROSS_SECTION_MM2,
                     material: MaterialElectrical | None = None) -> float:
    """R = rho * L / A in ohms (rho in ohm-cm, L in mm, A in mm^2)."""
    if cross_section_mm2 <= 0:
        raise ValueError("cross-section area must be positive")
    if length_mm < 0:
        raise ValueError("length must be non-negative")
    material = material or MaterialElectrical()
    return material.resistivity_ohm_mm * length_mm / cross_section_mm2


def length_for_resistance(ohms: float, cross_section_mm2: float = DEFAULT_CROSS_SECTION_MM2,
                          material: MaterialElectrical | None = None) -> float:
    """Inverse of trace_resistance: L = R * A / rho in mm."""
    if ohms < 0:
        raise ValueError("resistance must be non-negative")
    material = material or MaterialElectrical()
    return ohms * cross_section_mm2 / material.resistivity_ohm_mm


def _divider_counts(r_key: float, pulldown_ohms: float, adc_bits: int) -> int:
    full = (1 << adc_bits) - 1
    return round(full * pulldown_ohms / (pulldown_ohms + r_key))


def design_analog_ladder(key_ids: list[str], vcc: float = 5.0,
                         pulldown_ohms: float = 10_000.0, adc_bits: int = 10,
                         min_separation_counts: int = 20,
                         material: MaterialElectrical | None = None,
                         cross_section_mm2: float = DEFAULT_CROSS_SECTION_MM2,
                         min_length_mm: float = MIN_LADDER_LENGTH_MM) -> LadderDesign:
    """Assign trace lengths so each key produces a distinct ADC reading.

    Target counts are spread evenly over the feasible count window (widest
    worst-case separation), then the divider is inverted to per-key
    resistances and lengths.  Every length stays within routable magnitude.
    """
    if not key_ids:
        raise LadderError("ladder needs at least one key")
    if min_separation_counts < 1:
        raise LadderError("minimum separation must be >= 1")
    material = material or MaterialElectrical()
    n = len(key_ids)
    full = (1 << adc_bits) - 1

    r_min = trace_resistance(min_length_mm, cross_section_mm2, material)
    r_max = trace_resistance(MAX_LADDER_LENGTH_MM, cross_section_mm2, material)
    c_hi = math.floor(full * pulldown_ohms / (pulldown_ohms + r_min))
    c_lo = math.ceil(full * pulldown_ohms / (pulldown_ohms + r_max))
    window = c_hi - c_lo
    max_keys = window // min_separation_counts + 1 if window >= 0 else 0
    if n > max_keys:
        raise LadderError(
            f"cannot separate {n} keys by {min_separation_counts} counts on "
            f"{adc_bits}-bit readings; at most {max_keys} keys are feasible")

    if n == 1:
        targets = [c_hi]
    else:
        # double the required separation for margin, but no wider: readings
        # spread over the whole window need very long high-ohm runs
        step = min(window // (n - 1), 2 * min_separation_counts)
        targets = [c_hi - i * step for i in range(n)]

    entries = []
    for key_id, c in zip(key_ids, targets):
        r = pulldown_ohms * (full / c - 1.0)
        length = length_for_resistance(r, cross_section_mm2, material)
        entries.append(LadderEntry(
            key_id=key_id, trace_length_mm=length,
            resistance_ohms=trace_resistance(length, cross_section_mm2, material),
            predicted_counts=_divider_counts(r, pulldown_ohms, adc_bits)))
    entries.sort(key=lambda e: e.resistance_ohms)
    return LadderDesign(vcc_volts=vcc, pulldown_ohms=pulldown_ohms,
                        adc_bits=adc_bits, entries=tuple(entries),
                        min_separation_counts=min_separation_counts)


def predict_adc_counts(design: LadderDesign, pressed_key: str | None) -> int:
    """Ideal divider reading for a pressed key; 0 when nothing is pressed
    (the pull-down holds the pin low)."""
    if pressed_key is None:
        return 0
    for e in design.entries:
        if e.key_id == pressed_key:
            return _divider_counts(e.resistance_ohms, design.pulldown_ohms,
                                   design.adc_bits)
    raise LadderError(f"key '{pressed_key}' is not in this ladder")


def plate_capacitance(area_mm2: float, gap_mm: float, epsilon_r: float = 1.0) -> float:
    """Parallel-plate capacitance C = eps0 * epsr * A / d in farads."""
    if gap_mm <= 0:
        raise ValueError("gap must be positive")
    if area_mm2 <= 0:
        raise ValueError("area must be positive")
    return EPSILON_0_F_PER_MM * epsilon_r * area_mm2 / gap_mm


CONTACT_OFFSET_MM = 0.3  # residual finger-to-electrode gap at full depression


def calibrate_capacitance_model(electrode_area_mm2: float, gap_free_mm: float,
                                epsilon_r: float = 1.0) -> CapacitanceModel:
    """Thresholds taken from the device's own capacitance curve at the
    hover (full gap), half-travel, and full-depression gaps."""
    hover = plate_capacitance(electrode_area_mm2, gap_free_mm, epsilon_r)
    partial = plate_capacitance(electrode_area_mm2, gap_free_mm / 2.0, epsilon_r)
    full = plate_capacitance(electrode_area_mm2, CONTACT_OFFSET_MM, epsilon_r)
    return CapacitanceModel(electrode_area_mm2=electrode_area_mm2,
                            gap_free_mm=gap_free_mm,
                            thresholds=(hover, partial, full),
                            epsilon_r=epsilon_r)


def classify_press(cap_delta: float, model: CapacitanceModel) -> str:
    """Threshold bucketing with closed lower bounds; monotone in the delta."""
    hover, partial, full = model.thresholds
    if cap_delta >= full:
        return "full"
    if cap_delta >= partial:
        return "partial"
    if cap_delta >= hover:
        return "hover"
    return "none"
