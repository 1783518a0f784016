import numpy as np
import pytest

from colprim.matset import validate_set
from colprim.satreduce import parse_dimacs

AGENTS = [
    [[0, 1, 0, 0], [0, 0.8, 0.2, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
    [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]],
]
SHIFT3 = [
    [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
    [[0, 1, 0], [0, 0, 1], [0, 0, 1]],
]
# 4-cycle and a transposition: both bijections, so no pair ever merges
PERMUTATIONS = [
    [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]],
    [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
]
SAMPLE_CNF = "p cnf 3 3\n-1 -2 -3 0\n1 2 3 0\n-1 2 -3 0\n"
LIMIT_V = (0.0, 0.565, 0.072, 0.361)


@pytest.fixture
def agents():
    return validate_set(AGENTS, "stochastic")


@pytest.fixture
def shift3():
    return validate_set(SHIFT3, "binary")


@pytest.fixture
def permutations():
    return validate_set(PERMUTATIONS, "binary")


@pytest.fixture
def sample_formula():
    return parse_dimacs(SAMPLE_CNF)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
