import numpy as np
import pytest

from thzsim.array_model import ArrayGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def geom16():
    return ArrayGeometry.half_wavelength(16, 16, 300e9)


_ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line ``[Cn] PASS|FAIL detail`` and print it."""
    def record(criterion: int, passed: bool, detail: str) -> bool:
        line = f"[C{criterion:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda l: int(l[2:4])):
            terminalreporter.write_line(line)
