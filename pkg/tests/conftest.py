import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))  # for the oracles module

from pevgp.offline import default_split, generate_snapshots  # noqa: E402
from pevgp.problems import ProblemKind  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def crossing16():
    """Crossing snapshots on the default grids at a coarse mesh."""
    split = default_split(ProblemKind.CROSSING)
    train = generate_snapshots(ProblemKind.CROSSING, split.train, 3, 16)
    test = generate_snapshots(ProblemKind.CROSSING, split.test, 3, 16)
    return train, test


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


#: (criterion number, passed, detail) recorded by the acceptance tests
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
