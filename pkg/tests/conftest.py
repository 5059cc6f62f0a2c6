import numpy as np
import pytest

from escweb import RateSequence, fatou
from escweb.raster import default_spec, rasterize


@pytest.fixture(scope="session")
def fatou_mask():
    """Default fatou-type render, m = 6, 800x800."""
    return rasterize(default_spec("fatou"))


@pytest.fixture(scope="session")
def bergweiler_mask():
    return rasterize(default_spec("bergweiler"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fatou6():
    return fatou(), RateSequence.arithmetic(6)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def record_criterion(request):
    """Store one PASS/FAIL line for the end-of-run acceptance summary."""
    lines = request.config._acceptance_lines

    def record(number: int, title: str, passed: bool, detail: str = ""):
        flag = "PASS" if passed else "FAIL"
        line = f"[{flag}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
