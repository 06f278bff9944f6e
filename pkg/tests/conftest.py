from fractions import Fraction

import pytest

from equidistance.distribution import DistributionSpec
from equidistance.exact_arith import Surd, SurdSum

ACCEPTANCE_LINES: list[str] = []


def surd(s, t=1) -> SurdSum:
    return SurdSum.coerce(Surd(Fraction(s), t))


@pytest.fixture
def bern():
    return DistributionSpec.bernoulli()


@pytest.fixture
def surd4():
    """Uniform on {0, 1, sqrt 2, sqrt 3}."""
    return DistributionSpec.uniform([0, 1, surd(1, 2), surd(1, 3)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
