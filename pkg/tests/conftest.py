"""Shared fixtures: the bundled example layouts and their compiled results.

Compiling a device exercises the whole pipeline, so the four bundled
layouts are compiled once per session and reused by the routing, pipeline,
and acceptance tests.
"""

from __future__ import annotations

from pathlib import Path

import pytest

import keyforge
from keyforge.pipeline import CompileResult, compile_device

DATA_DIR = Path(keyforge.__file__).parent / "data"
DEVICE_NAMES = ("aac", "ergonomic_split", "gamepad", "qwerty")


@pytest.fixture(scope="session")
def device_sources() -> dict[str, str]:
    return {name: (DATA_DIR / f"{name}.device").read_text()
            for name in DEVICE_NAMES}


@pytest.fixture(scope="session")
def compiled_devices(device_sources) -> dict[str, CompileResult]:
    return {name: compile_device(src) for name, src in device_sources.items()}


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\n{status} {name}")
