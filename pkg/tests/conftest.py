import numpy as np
import pytest

from qhtlab.lattice import build_torus

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def torus8():
    return build_torus(8, 1.0)


@pytest.fixture
def record_criterion():
    """Store a one-line outcome per acceptance criterion for the terminal summary."""

    def _record(number, title, ok, detail=""):
        ACCEPTANCE[number] = (title, bool(ok), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
