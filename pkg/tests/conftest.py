import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dpsgame.params import SystemParams

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def two_class():
    """lambda = (1, 1), mu = 4, c = (2, 1)."""
    return SystemParams([1.0, 1.0], [2.0, 1.0], 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, title, secs, why = RESULTS[n]
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)"
        terminalreporter.write_line(line + (f"  -- {why}" if why else ""))
