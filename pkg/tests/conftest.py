from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("mqg", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "mqg"))

# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion
# ---------------------------------------------------------------------------

ACCEPTANCE: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for marker in report.keywords:
        if marker.startswith("criterion_"):
            n = int(marker.split("_")[1])
            ACCEPTANCE[n] = ACCEPTANCE.get(n, True) and report.passed


def pytest_configure(config):
    for n in range(1, 11):
        config.addinivalue_line("markers", f"criterion_{n}: acceptance criterion {n}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ACCEPTANCE[n] else 'FAIL'}")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
