"""Shared fixtures plus two session-wide hooks.

* Every successfully constructed probability table is recorded, and the run
  fails if any of them sums to something further than 1e-12 from 1.
* Acceptance tests register a one-line verdict that is echoed in the
  terminal summary.
"""

from pathlib import Path

import numpy as np
import pytest

from cfident import prob_core

FIXTURES = Path(__file__).parent / "fixtures"
CONSERVATION_TOL = 1e-12


class _Conservation:
    def __init__(self):
        self.count = 0
        self.worst = 0.0
        self.worst_kind = ""

    def observe(self, kind, arr):
        arr = np.asarray(arr, dtype=float)
        sums = arr.sum() if kind in ("ProbTable", "JointTable") else arr.sum(axis=-1)
        dev = float(np.max(np.abs(np.asarray(sums) - 1.0)))
        self.count += 1
        if dev > self.worst:
            self.worst, self.worst_kind = dev, kind


CONSERVATION = _Conservation()
ACCEPTANCE_LINES = {}


def _track(cls, attr):
    original = cls.__post_init__

    def __post_init__(self):
        original(self)
        CONSERVATION.observe(cls.__name__, getattr(self, attr))

    cls.__post_init__ = __post_init__


for _cls, _attr in [(prob_core.ProbVector, "entries"), (prob_core.CondTable, "rows"),
                    (prob_core.ProbTable, "cells"), (prob_core.JointTable, "cells")]:
    _track(_cls, _attr)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    tr = terminalreporter
    if ACCEPTANCE_LINES:
        tr.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            tr.write_line(ACCEPTANCE_LINES[key])
    tr.section("table conservation")
    tr.write_line(f"{CONSERVATION.count} tables constructed; worst |sum - 1| = {CONSERVATION.worst:.3e}"
                  + (f" ({CONSERVATION.worst_kind})" if CONSERVATION.worst_kind else ""))


def pytest_sessionfinish(session, exitstatus):
    if CONSERVATION.worst > CONSERVATION_TOL and session.exitstatus == 0:
        session.exitstatus = 1
