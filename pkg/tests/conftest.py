import os

import networkx as nx
import pytest
from hypothesis import HealthCheck, settings

from lcaspanner.graph import GraphView

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def from_nx(g) -> GraphView:
    g = nx.convert_node_labels_to_integers(g)
    return GraphView.from_edges(g.number_of_nodes(), sorted(tuple(sorted(e)) for e in g.edges()))


@pytest.fixture
def path3():
    return GraphView.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star3():
    return GraphView.from_edges(4, [(0, 1), (0, 2), (0, 3)])


# one line per acceptance criterion, repeated at the end of the run
CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
