import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ssoe", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ssoe")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def seasonal_series(rng):
    t = np.arange(120)
    return 50 + 0.2 * t + 8 * np.sin(2 * np.pi * t / 12) + rng.normal(0, 1, t.size)


# acceptance reporting -------------------------------------------------------

def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one acceptance outcome; prints it and fails the test when not ok."""

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        request.config._acceptance_lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
