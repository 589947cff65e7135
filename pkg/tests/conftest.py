from __future__ import annotations

from pathlib import Path

import pytest

from movoid.certificates import load_certificate
from movoid.gf import field_make
from movoid.quadric import quadric_make

FIXTURES = Path(__file__).parent / "fixtures"


def quad(q: int, r: int):
    return quadric_make(field_make(q), r)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def ovoid_q2():
    """The 51-point 3-ovoid of Q^-(7,2) shipped as a fixture."""
    return load_certificate(FIXTURES / "q7_2_3ovoid.cert").points


@pytest.fixture(scope="session")
def ovoid_q3():
    """The 328-point 4-ovoid of Q^-(7,3)."""
    return load_certificate(FIXTURES / "q7_3_4ovoid.cert").points


@pytest.fixture(scope="session")
def hemisystem():
    return load_certificate(FIXTURES / "q5_3_hemisystem.cert").points


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
