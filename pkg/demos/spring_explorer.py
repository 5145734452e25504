"""Explore the key spring design space: measured presets next to the
analytic cantilever model, plus the bending-strain durability margin.

Usage:
    python demos/spring_explorer.py
"""

from keyforge.mechanics import (
    BeamParams,
    FORCE_TABLE_LBF,
    STRAIN_LIMIT,
    beam_activation_force,
    max_bending_strain,
    preset_activation_force,
    preset_strain,
)
from keyforge.parts import (
    CANTILEVER_LENGTH_MM,
    CANTILEVER_WIDTH_MM,
    DIGITAL_TRAVEL_MM,
    LINE_COUNT,
    effective_spring_thickness,
)


def main() -> int:
    print("measured presets (lbf) and strain margin at full travel")
    print(f"{'travel':>8} {'stiffness':>10} {'force':>12} {'strain':>8} "
          f"{'margin':>7}")
    for (travel, stiff) in sorted(FORCE_TABLE_LBF):
        est = preset_activation_force(travel, stiff)
        strain = preset_strain(travel, stiff)
        print(f"{travel:>8} {stiff:>10} "
              f"{est.mean_lbf:>6.2f}±{est.tol_lbf:<5.2f} "
              f"{strain:>8.4f} {STRAIN_LIMIT / strain:>6.1f}x")

    print("\nanalytic cantilever model over printable line counts")
    for lines in sorted(set(LINE_COUNT.values())):
        t = effective_spring_thickness(lines)
        for travel, d in sorted(DIGITAL_TRAVEL_MM.items(), key=lambda i: i[1]):
            p = BeamParams(elastic_modulus_mpa=2000.0,
                           length_mm=CANTILEVER_LENGTH_MM,
                           width_mm=CANTILEVER_WIDTH_MM,
                           thickness_mm=t, deflection_mm=d)
            print(f"  {lines} lines ({t:.2f} mm), {travel} travel: "
                  f"{beam_activation_force(p):.2f} N, "
                  f"strain {max_bending_strain(p):.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
