import functools

import pytest

from inls_lab.model import ModelParams
from inls_lab.groundstate import SolverOpts, solve_ground_state


@functools.lru_cache(maxsize=None)
def ground_state(dim, a, b, alpha, method="shooting"):
    """Ground states are expensive; share them across test modules."""
    return solve_ground_state(ModelParams(dim, a, b, alpha), SolverOpts(method=method))


@pytest.fixture(scope="session")
def gs_cache():
    return ground_state


ACCEPTANCE_LINES = []


def report(n, ok, detail=""):
    """One PASS/FAIL line per acceptance criterion, echoed in the summary."""
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
