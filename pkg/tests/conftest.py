import numpy as np
import pytest

from quickcent.digraph import Digraph

# 25-node preferential-attachment tree; arcs point from child to parent.
# Named nodes carry the labels of the in-degree/centrality table, the
# 17 leaves take the remaining labels.
EXAMPLE_PARENT = {4: 1, 8: 1, 14: 1, 17: 4, 19: 17, 10: 8, 23: 14}
EXAMPLE_LEAVES = {1: 6, 4: 3, 19: 1, 8: 3, 10: 1, 14: 2, 23: 1}

# label -> (in-degree, harmonic, QC100 estimate, QC70 estimate)
EXAMPLE_TABLE = {
    1: (9, 15.750, 13.429, 6.531),
    4: (4, 4.833, 2.973, 2.197),
    8: (4, 4.500, 2.973, 2.197),
    10: (1, 1.000, 1.309, 1.214),
    14: (3, 3.500, 1.309, 1.214),
    17: (1, 1.500, 1.309, 1.214),
    19: (1, 1.000, 1.309, 1.214),
    23: (1, 1.000, 1.309, 1.214),
}


def build_example() -> Digraph:
    free = iter(sorted(set(range(1, 26)) - set(EXAMPLE_TABLE)))
    arcs = list(EXAMPLE_PARENT.items())
    for parent, k in EXAMPLE_LEAVES.items():
        arcs += [(next(free), parent) for _ in range(k)]
    src, dst = np.array(arcs).T - 1
    return Digraph(25, src, dst)


@pytest.fixture(scope="session")
def example_graph() -> Digraph:
    return build_example()


def random_digraph(rng, n, p, allow_loops=False):
    mask = rng.random((n, n)) < p
    if not allow_loops:
        np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Digraph(n, src, dst)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
