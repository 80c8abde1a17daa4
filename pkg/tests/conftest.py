import numpy as np
import pytest

from fracwalk.graph_core import path_graph, star_graph
from fracwalk.walk_model import build_interaction, normalize


@pytest.fixture
def p5():
    return path_graph(5, 3)


@pytest.fixture
def star():
    return star_graph(5, 3)


@pytest.fixture
def p5_transition(p5):
    """Path on five vertices, unit conductivity, alpha 2, no staying weight."""
    return normalize(build_interaction(p5, None, alpha=2.0, theta=0.0))


@pytest.fixture
def p5_lazy(p5):
    return normalize(build_interaction(p5, None, alpha=2.0, theta=1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0].rstrip("ab"))):
        terminalreporter.write_line(line)
