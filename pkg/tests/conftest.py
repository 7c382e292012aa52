import numpy as np
import pytest

from ckdv.grid import GridSpec, random_band_limited

SEEDS = tuple(range(1, 11))


@pytest.fixture
def grid():
    return GridSpec(256, 40.0)


@pytest.fixture
def small_grid():
    return GridSpec(64, 40.0)


def band(seed, grid, amplitude=1.0, cutoff=10):
    return random_band_limited(seed, grid, cutoff, amplitude)


def rel(diff, ref):
    scale = ref.max_abs()
    return diff.max_abs() / scale if scale else diff.max_abs()


def sech2(x):
    return 1.0 / np.cosh(x) ** 2


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record a criterion verdict; lines are echoed in the terminal summary."""
    lines = request.config.acceptance_lines

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
