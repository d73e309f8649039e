import itertools

import pytest

from expthresh.cliques import CliqueParams, build_clique_instance
from expthresh.core import Instance


@pytest.fixture
def instance_a():
    """4-cycle on 4 vertices, r = 2."""
    return Instance.from_lists(4, 2, [[0, 1], [1, 2], [2, 3], [3, 0]], 2)


@pytest.fixture
def instance_b():
    """Triangles of K5 as sets of vertex pairs, r = 2."""
    return build_clique_instance(CliqueParams(5, 3, 2), 2)


def brute_upset(inst):
    """All subsets (as frozensets) whose edge count reaches r, by plain set logic."""
    edges = [frozenset(_bits(e)) for e in inst.edges]
    out = []
    for size in range(inst.n + 1):
        for S in itertools.combinations(range(inst.n), size):
            S = frozenset(S)
            if sum(1 for e in edges if e <= S) >= inst.r:
                out.append(S)
    return out


def brute_minimal(inst):
    up = brute_upset(inst)
    upset = set(up)
    return {S for S in up if not any(T < S for T in upset)}


def _bits(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def to_sets(family):
    return {frozenset(_bits(s)) for s in family}


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
