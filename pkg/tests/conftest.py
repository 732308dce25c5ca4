import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def rel_err(actual, expected, abs_floor=1e-8):
    """Max componentwise error: relative where |expected| > abs_floor, absolute otherwise."""
    actual = np.asarray(actual, dtype=np.complex128)
    expected = np.asarray(expected, dtype=np.complex128)
    diff = np.abs(actual - expected)
    scale = np.abs(expected)
    big = scale > abs_floor
    worst_rel = float(np.max(diff[big] / scale[big])) if np.any(big) else 0.0
    worst_abs = float(np.max(diff[~big])) if np.any(~big) else 0.0
    return worst_rel, worst_abs


def random_state(rng, n):
    raw = rng.normal(size=(2, 1 << n))
    psi = raw[0] + 1j * raw[1]
    return psi / np.linalg.norm(psi)


@pytest.fixture
def nprng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
