import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from netdyn.graph import Graph, generate_planted_partition, karate_factions, load_graph  # noqa: E402

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def karate():
    return load_graph("karate")


@pytest.fixture(scope="session")
def factions(karate):
    return karate_factions(karate)


@pytest.fixture(scope="session")
def planted():
    return generate_planted_partition([100, 100, 100], 0.3, 0.02, seed=1)


@pytest.fixture
def star3():
    return Graph.from_edges("abcd", [("a", "b"), ("a", "c"), ("a", "d")])


@pytest.fixture
def p4():
    """Path 0-1-2-3: two edges joined by a bridge."""
    return Graph.from_edges("0123", [("0", "1"), ("1", "2"), ("2", "3")])


def two_cliques(m=4, bridge=False):
    A = np.zeros((2 * m, 2 * m))
    A[:m, :m] = 1
    A[m:, m:] = 1
    np.fill_diagonal(A, 0)
    if bridge:
        A[m - 1, m] = A[m, m - 1] = 1
    return Graph.from_adjacency(A)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
