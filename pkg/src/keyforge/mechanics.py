"""Activation-force prediction and the bending-strain durability proxy.

Library presets report the six published force measurements (the authors
measured rather than simulated, since printed-material properties vary too
much for FEA).  The analytic cantilever and coil models are offered for
custom geometry only, and carry a model-derived caveat in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

LBF_TO_NEWTON = 4.4482216153

#: measured mean activation force and tolerance, lbf, keyed by
#: (travel_class, stiffness_class); test fixture held keys at 20 degrees
FORCE_TABLE_LBF: dict[tuple[str, str], tuple[float, float]] = {
    ("short", "high"): (2.51, 0.15),
    ("short", "low"): (0.64, 0.25),
    ("medium", "high"): (1.00, 0.17),
    ("medium", "low"): (0.49, 0.05),
    ("long", "high"): (1.46, 0.13),
    ("long", "low"): (0.97, 0.08),
}

TEST_FIXTURE_ANGLE_DEG = 20.0  # provenance metadata, not a force component

DEFAULT_MODULUS_MPA = 2000.0       # effective E for 45-degree printed cPLA
DEFAULT_SHEAR_MODULUS_MPA = 800.0  # effective G for printed PLA coils
STRAIN_LIMIT = 0.02                # durability proxy for repeated keystrokes


@dataclass(frozen=True)
class ForceEstimate:
    mean_lbf: float
    tol_lbf: float
    source: str  # "measured-preset" | "beam-model"

    @property
    def mean_newtons(self) -> float:
        return self.mean_lbf * LBF_TO_NEWTON

    @property
    def tol_newtons(self) -> float:
        return self.tol_lbf * LBF_TO_NEWTON


@dataclass(frozen=True)
class BeamParams:
    elastic_modulus_mpa: float
    length_mm: float
    width_mm: float
    thickness_mm: float
    deflection_mm: float

    def __post_init__(self):
        for name in ("elastic_modulus_mpa", "length_mm", "width_mm", "thickness_mm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.deflection_mm < 0:
            raise ValueError("deflection_mm must be non-negative")


@dataclass(frozen=True)
class CoilParams:
    shear_modulus_mpa: float
    wire_thickness_mm: float
    mean_diameter_mm: float
    active_turns: float

    def __post_init__(self):
        for name in ("shear_modulus_mpa", "wire_thickness_mm",
                     "mean_diameter_mm", "active_turns"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.mean_diameter_mm <= self.wire_thickness_mm:
            raise ValueError("mean diameter must exceed wire thickness")


def preset_activation_force(travel_class: str, stiffness_class: str) -> ForceEstimate:
    """Exact lookup of the six published measurements."""
    mean, tol = FORCE_TABLE_LBF[(travel_class, stiffness_class)]
    return ForceEstimate(mean_lbf=mean, tol_lbf=tol, source="measured-preset")


def beam_activation_force(p: BeamParams) -> float:
    """Cantilever tip force in newtons: F = 3 E I d / L^3, I = w t^3 / 12.

    mm-MPa-N units are consistent: MPa * mm^4 * mm / mm^3 = N * mm^0.
    """
    inertia = p.width_mm * p.thickness_mm ** 3 / 12.0
    return 3.0 * p.elastic_modulus_mpa * inertia * p.deflection_mm / p.length_mm ** 3


def coil_spring_rate(p: CoilParams) -> float:
    """Helical spring rate in N/mm: k = G d^4 / (8 D^3 n)."""
    return (p.shear_modulus_mpa * p.wire_thickness_mm ** 4
            / (8.0 * p.mean_diameter_mm ** 3 * p.active_turns))


def max_bending_strain(p: BeamParams) -> float:
    """Surface strain at the cantilever root under a tip deflection:
    eps = 3 t d / (2 L^2)."""
    return 3.0 * p.thickness_mm * p.deflection_mm / (2.0 * p.length_mm ** 2)


def calibrate_effective_modulus(
        measurements: list[tuple[BeamParams, float]]) -> tuple[float, float]:
    """Least-squares effective modulus from (geometry, measured force) pairs.

    The beam force is linear in E, so the fit is closed form:
    E = sum(a_i F_i) / sum(a_i^2) with a_i = 3 I_i d_i / L_i^3.
    Returns (modulus_mpa, residual) where residual is the root sum of
    squared force errors in newtons.
    """
    if not measurements:
        raise ValueError("need at least one measurement")
    num = 0.0
    den = 0.0
    coeffs = []
    for params, force in measurements:
        a = (3.0 * params.width_mm * params.thickness_mm ** 3 / 12.0
             * params.deflection_mm / params.length_mm ** 3)
        coeffs.append((a, force))
        num += a * force
        den += a * a
    if den == 0.0:
        raise ValueError("all measurements have zero deflection")
    e_fit = num / den
    residual = sum((e_fit * a - f) ** 2 for a, f in coeffs) ** 0.5
    return e_fit, residual


def preset_strain(travel_class: str, stiffness_class: str) -> float:
    """Root strain of a library cantilever preset at full travel."""
    from . import parts
    lines = parts.LINE_COUNT[stiffness_class]
    p = BeamParams(
        elastic_modulus_mpa=DEFAULT_MODULUS_MPA,
        length_mm=parts.CANTILEVER_LENGTH_MM,
        width_mm=parts.CANTILEVER_WIDTH_MM,
        thickness_mm=parts.effective_spring_thickness(lines),
        deflection_mm=parts.DIGITAL_TRAVEL_MM[travel_class],
    )
    return max_bending_strain(p)
