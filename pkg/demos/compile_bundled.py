"""Compile every bundled example layout and summarize the artifacts.

Usage:
    python demos/compile_bundled.py [output_dir]
"""

import sys
from pathlib import Path

import keyforge
from keyforge.pipeline import compile_to_directory

DATA = Path(keyforge.__file__).parent / "data"


def main() -> int:
    out_root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
    for layout in sorted(DATA.glob("*.device")):
        out_dir = out_root / layout.stem
        result = compile_to_directory(layout.read_text(), out_dir)
        rep = result.report
        print(f"{rep['device']}: {rep['key_count']} keys, "
              f"{len(rep['nets'])} nets")
        for mat in ("PLA", "cPLA"):
            m = rep["meshes"][mat]
            print(f"  {mat}: {m['triangles']} triangles, "
                  f"{m['volume_mm3'] / 1000.0:.1f} cm^3, "
                  f"watertight={m['watertight']}")
        for name in sorted(result.outputs):
            print(f"  wrote {result.outputs[name]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
