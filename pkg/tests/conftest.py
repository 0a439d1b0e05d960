import functools
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from marxgen.polysys import DesignSpec  # noqa: E402
from marxgen.solver import enumerate_solutions  # noqa: E402

ELAPSED = {}


@functools.lru_cache(maxsize=None)
def enumerated(n, seed=0):
    t0 = time.perf_counter()
    sset = enumerate_solutions(DesignSpec.default(n), seed=seed)
    ELAPSED[(n, seed)] = time.perf_counter() - t0
    return sset


@pytest.fixture(scope="session")
def solution_sets():
    return enumerated


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
