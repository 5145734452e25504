"""Design compiler for 3D-printable tactile input devices.

Turns a declarative text layout into a pair of binary STL meshes (one per
print material), an SVG plan preview, and a JSON engineering report.
"""

from .frontend import (DeviceSpec, Diagnostic, KeyInstance, parse_device_spec,
                       resolve_defaults, serialize_device_spec, validate_spec)
from .pipeline import (CompileError, CompileResult, compile_device,
                       compile_to_directory)

__all__ = [
    "CompileError",
    "CompileResult",
    "DeviceSpec",
    "Diagnostic",
    "KeyInstance",
    "compile_device",
    "compile_to_directory",
    "parse_device_spec",
    "resolve_defaults",
    "serialize_device_spec",
    "validate_spec",
]
