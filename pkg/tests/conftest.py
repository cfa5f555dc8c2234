import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

SUITE_BUDGET_S = 120.0
_session_start = time.perf_counter()
CRITERIA_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    CRITERIA_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _session_start
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
        ok = elapsed < SUITE_BUDGET_S
        terminalreporter.write_line(
            f"criterion 9 (suite runtime): {'PASS' if ok else 'FAIL'} - {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)"
        )


def pytest_sessionfinish(session, exitstatus):
    if time.perf_counter() - _session_start > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
