import numpy as np
import pytest

from vslice_xrl.config import NetworkConfig

_ACCEPTANCE_LINES = []


@pytest.fixture
def config():
    return NetworkConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance():
    """``record(number, title, ok, detail)`` prints one PASS/FAIL line per criterion."""
    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {number:>2} {title}: {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line, flush=True)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
