"""Acceptance battery: one test per criterion, seed 0, default tolerances.

Each test prints a ``[PASS]`` or ``[FAIL]`` line; the lines are also collected
and shown together at the end of the pytest run. Run directly with
``python3 tests/test_acceptance.py`` for the lines alone.
"""

import sys

import pytest

from nodalcount.battery import CHECKS, PASS, Context, run_check
from nodalcount.config import Tolerances

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script outside pytest
    ACCEPTANCE_LINES = []

SEED = 0
CTX = Context(SEED, Tolerances())


def _line(rec):
    tag = "PASS" if rec.status == PASS else rec.status.upper()
    return f"[{tag}] criterion {rec.criterion:2d} {rec.name:<15s} margin={rec.margin}"


@pytest.mark.parametrize("spec", CHECKS, ids=[f"c{c.criterion:02d}-{c.name}" for c in CHECKS])
def test_criterion(spec):
    rec = run_check(spec, CTX)
    line = _line(rec)
    print(line)
    ACCEPTANCE_LINES.append((rec.criterion, line))
    assert rec.status == PASS, f"{line} {rec.details}"


if __name__ == "__main__":
    results = [run_check(spec, CTX) for spec in CHECKS]
    for rec in results:
        print(_line(rec))
    sys.exit(0 if all(r.status == PASS for r in results) else 1)
