import json

import pytest

from nodalcount.battery import CHECKS, Context, run_check, select_checks, verify_suite
from nodalcount.config import Tolerances


def test_all():
    assert [c.criterion for c in select_checks()] == list(range(1, 13))


@pytest.mark.parametrize("key, names", [
    ("morse", ["morse"]),
    ("3", ["morse"]),
    ("construct", ["lower-bound", "path-families", "kn"]),
    ("vanish,survey", ["vanish", "survey"]),
])
def test_select(key, names):
    assert [c.name for c in select_checks([key])] == names


def test_bad_filter():
    with pytest.raises(ValueError):
        select_checks(["nope"])


def test_json_deterministic():
    r1 = verify_suite(seed=3, only=["tridiagonal", "vanish"])
    r2 = verify_suite(seed=3, only=["tridiagonal", "vanish"], workers=2)
    assert json.dumps(r1.to_dict(), sort_keys=True) == json.dumps(r2.to_dict(), sort_keys=True)
    assert r1.passed


def test_runtime_opt_in():
    rec = run_check(CHECKS[10], Context(0, Tolerances()))
    assert "runtime" not in rec.to_dict() and "runtime" in rec.to_dict(include_runtime=True)
