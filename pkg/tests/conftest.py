import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from momgauge import phasegrid as pg

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# Gaussian centers used wherever a 64x64 grid of extent 8 is probed
STATE_CENTERS = [(0.0, 0.0), (1.0, 0.0), (0.0, -1.0), (1.5, 1.5), (-1.2, 0.8)]
STATE_WIDTH = 0.7


@pytest.fixture(scope="session")
def grid64():
    return pg.make_grid(2, 64, 8.0)


@pytest.fixture(scope="session")
def states64(grid64):
    return [pg.gaussian_state(grid64, c, STATE_WIDTH) for c in STATE_CENTERS]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome, props.get("measured", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, measured in sorted(lines, key=lambda t: int(t[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}: {measured}")
