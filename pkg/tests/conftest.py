import functools

import pytest

from radarcap.channel import ChannelParams
from radarcap.optimizer import OptimizerConfig, escalate_mass_points

_ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def escalated(snr, inr):
    """Escalated optimum at default settings, computed once per session."""
    import time

    t0 = time.perf_counter()
    inp, rate, trace = escalate_mass_points(ChannelParams(snr, inr), OptimizerConfig())
    return inp, rate, trace, time.perf_counter() - t0


class AcceptanceRecorder:
    def record(self, criterion, passed, detail):
        line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
