import re

import numpy as np
import pytest

from asdm.objectives import ObjectiveMetadata, ObjectiveSpec
from asdm.problems import get_problem


@pytest.fixture
def half_sq_1d():
    return get_problem("quad1d").objective


@pytest.fixture
def steep():
    return get_problem("steepquad").objective


@pytest.fixture
def half_norm_2d():
    return get_problem("halfnorm", dimension=2).objective


def linear(a):
    a = np.asarray(a, dtype=float)
    return ObjectiveSpec(len(a), lambda x: float(a @ x), lambda x: a.copy(), ObjectiveMetadata(), "linear")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    outcome = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_c(\d+)_", getattr(rep, "nodeid", ""))
            if not m or (rep.when != "call" and status != "error"):
                continue
            n = int(m.group(1))
            ok, notes = outcome.get(n, (True, []))
            notes += [v for k, v in rep.user_properties if k == "detail"]
            outcome[n] = (ok and status == "passed", notes)
    if outcome:
        terminalreporter.section("acceptance criteria")
        for n in sorted(outcome):
            ok, notes = outcome[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {'; '.join(notes)}")
