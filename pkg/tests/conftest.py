import numpy as np
import pytest

from qutritlink.tomography import load_bundled_table, mle_reconstruct
from qutritlink.witness import cglmp_optimize


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def bundled_table():
    return load_bundled_table()


@pytest.fixture(scope="session")
def bundled_fit(bundled_table):
    return mle_reconstruct(bundled_table, seed=0)


@pytest.fixture(scope="session")
def bundled_cglmp(bundled_fit):
    return cglmp_optimize(bundled_fit.rho, seed=0)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(pytestconfig):
    """Record one pass/fail line per acceptance criterion; returns the verdict."""
    lines = pytestconfig.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
