import pytest

from sgcgen.graph import Graph
from sgcgen.sbm import Partition

TWO_TRIANGLES = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
BRIDGED = TWO_TRIANGLES + [(2, 3)]


@pytest.fixture
def two_triangles():
    g = Graph.from_edges(6, TWO_TRIANGLES)
    return g, Partition(g, [0, 0, 0, 1, 1, 1])


@pytest.fixture
def bridged_triangles():
    g = Graph.from_edges(6, BRIDGED)
    return g, Partition(g, [0, 0, 0, 1, 1, 1])


@pytest.fixture
def k4():
    return Graph.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


# acceptance summary ------------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
