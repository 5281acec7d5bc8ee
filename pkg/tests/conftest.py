import numpy as np
import pytest
from hypothesis import settings

from intertwine.htype import GroupPoint, build_standard

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture(scope="session")
def h1():
    return build_standard("heisenberg", 1)


@pytest.fixture(scope="session")
def quat():
    return build_standard("quaternionic", 1)


def point(z, sigma):
    return GroupPoint(np.asarray(z, float), np.asarray(sigma, float))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])
