import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("poag", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("poag")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_criterion_lines = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _criterion_lines.extend(line for line in report.capstdout.splitlines()
                                if line.startswith(("PASS criterion", "FAIL criterion")))


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
