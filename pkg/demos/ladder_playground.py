"""Design a printed resistor ladder and sanity-check it with a brute-force
voltage-divider sweep.

Usage:
    python demos/ladder_playground.py [key_count]
"""

import sys

from keyforge.electrical import design_analog_ladder, predict_adc_counts


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    keys = [f"K{i}" for i in range(n)]
    design = design_analog_ladder(keys, min_separation_counts=20)

    print(f"{n}-key ladder on a {design.adc_bits}-bit ADC, "
          f"{design.pulldown_ohms:.0f} ohm pull-down")
    print(f"{'key':>6} {'length mm':>10} {'ohms':>10} {'counts':>7}")
    for e in design.entries:
        print(f"{e.key_id:>6} {e.trace_length_mm:>10.1f} "
              f"{e.resistance_ohms:>10.0f} {e.predicted_counts:>7}")

    counts = sorted(predict_adc_counts(design, k) for k in keys)
    gaps = [b - a for a, b in zip(counts, counts[1:])]
    print(f"idle reading: {predict_adc_counts(design, None)}")
    if gaps:
        print(f"smallest count gap between keys: {min(gaps)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
