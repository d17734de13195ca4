import numpy as np
import pytest

from projdyn import IntegratorOptions, SymForm, random_ellipsoid


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def options():
    return IntegratorOptions()


@pytest.fixture
def ellipsoid3():
    """Seeded dim-3 ellipsoid data (random SPD ``G`` and ``A``)."""
    return random_ellipsoid(np.random.default_rng([0, 9]), 3)


@pytest.fixture
def plane2d():
    return SymForm.identity(2), SymForm.diag([1.0, 4.0])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
