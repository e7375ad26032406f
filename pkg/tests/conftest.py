import functools

import pytest

from pinlab import build_kernel


@functools.lru_cache(maxsize=None)
def kernel(alpha=0.5, r=1, horizon=4096):
    return build_kernel(alpha, horizon=horizon, support_min=r)


@pytest.fixture(scope="session")
def k05():
    return kernel(0.5)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and assert it."""
    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
