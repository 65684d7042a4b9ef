import math

import numpy as np
import pytest

from nodalcount.graph import Graph
from nodalcount.spectral import SupportedMatrix

S3 = math.sqrt(3.0)

# one result line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def vanish():
    """Strictly supported 4x4 matrix with vanishing eigenvector entries."""
    g = Graph(4, ((1, 2), (2, 3), (2, 4), (3, 4)))
    a = np.array([[0.0, -1, 0, 0], [-1, 0, -1, -1], [0, -1, 1, -1], [0, -1, -1, 1]])
    vectors = np.array([[1, S3, 1, 1], [2, 0, -1, -1], [1, -S3, 1, 1], [0, 0, -1, 1]], dtype=float).T
    return SupportedMatrix(g, a), vectors / np.linalg.norm(vectors, axis=0)


@pytest.fixture
def edge_matrix():
    return SupportedMatrix(Graph(2, ((1, 2),)), np.array([[0.0, -1.0], [-1.0, 0.0]]))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
