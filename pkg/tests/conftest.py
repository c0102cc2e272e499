import numpy as np
import pytest

from tfrbench.layout import DomainSpec, EdgeCondition, HeatSource, SystemSpec


def dirichlet_box(n=16, side=0.1, sources=None, T0=298.0):
    """All four edges held at ``T0``; one centered square source unless given."""
    if sources is None:
        sources = (HeatSource("rectangle", "uniform", (side / 2, side / 2), side / 4, side / 4),)
    return SystemSpec(DomainSpec(side, n, 1.0), tuple(sources), (EdgeCondition.dirichlet(T0),) * 4,
                      case_tag="custom")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
