import io
import json

import pytest

from nodalcount.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, run_command

K3 = {"n": 3, "edges": [[1, 2], [1, 3], [2, 3]]}
A3 = {"n": 3, "mode": "general", "rows": [[2, -1, -1], [-1, 3, -0.5], [-1, -0.5, 1]]}
VANISH_G = {"n": 4, "edges": [[1, 2], [2, 3], [2, 4], [3, 4]]}
VANISH_A = {"n": 4, "mode": "general", "rows": [[0, -1, 0, 0], [-1, 0, -1, -1], [0, -1, 1, -1], [0, -1, -1, 1]]}
STAR = {"n": 4, "edges": [[1, 2], [1, 3], [1, 4]]}


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, doc in {"k3": K3, "a3": A3, "vg": VANISH_G, "va": VANISH_A, "star": STAR}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        out[name] = str(p)
    return out


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, out, err)
    doc = json.loads(out.getvalue()) if out.getvalue() else None
    return code, doc, err.getvalue()


def test_nodal(files):
    code, doc, _ = run(["nodal", "--graph", files["k3"], "--matrix", files["a3"]])
    assert code == EXIT_OK and doc["exit_code"] == 0
    assert doc["result"]["nodal"]["total"] == 4
    assert doc["result"]["bounds"]["passed"]


def test_ncc_negative(files):
    code, doc, _ = run(["ncc", "--graph", files["vg"], "--matrix", files["va"]])
    assert code == EXIT_FAIL and not doc["result"]["satisfied"]


def test_classify_star(files):
    code, doc, _ = run(["classify", "--graph", files["star"]])
    assert code == EXIT_OK and doc["result"]["kind"] == "sub-determinantal"


def test_betti(files):
    code, doc, _ = run(["betti", "--graph", files["k3"]])
    assert code == EXIT_OK and doc["result"]["beta"] == 1


def test_construct_dense():
    code, doc, _ = run(["construct", "--family", "dense", "--n", "8", "--beta", "3"])
    assert code == EXIT_OK and doc["result"]["achieved_total"] == 31


def test_signing(files):
    code, doc, _ = run(["signing", "--graph", files["vg"], "--matrix", files["va"], "--seed", "1"])
    assert code == EXIT_OK and doc["result"]["total"] in (7, 8, 9)


def test_deterministic(files):
    argv = ["construct", "--family", "kn", "--n", "5", "--seed", "11"]
    out1, out2 = io.StringIO(), io.StringIO()
    run_command(argv, out1, io.StringIO())
    run_command(argv, out2, io.StringIO())
    assert out1.getvalue() == out2.getvalue()


def test_out_file(tmp_path, files):
    target = tmp_path / "r.json"
    code, doc, _ = run(["betti", "--graph", files["k3"], "--out", str(target)])
    assert doc is None and json.loads(target.read_text())["result"]["beta"] == 1


@pytest.mark.parametrize("argv", [
    ["nodal", "--graph", "/no/such.json", "--matrix", "/no/such.json"],
    ["betti", "--graph", "/no/such.json", "--only", "x"],
    ["construct", "--family", "dense", "--n", "4", "--beta", "9"],
    ["verify", "--only", "nosuch"],
    ["nodal", "--tol-gap", "-1"],
    ["survey", "--seed", "-3"],
])
def test_usage(argv):
    assert run(argv)[0] == EXIT_USAGE


def test_verify_only():
    code, doc, _ = run(["verify", "--only", "vanish"])
    assert code == EXIT_OK
    checks = doc["result"]["checks"]
    assert [c["name"] for c in checks] == ["vanish"] and "runtime" not in checks[0]


def test_verify_aggregate_fail():
    code, doc, _ = run(["verify", "--only", "9", "--tol-gap", "1"])
    assert code == EXIT_FAIL and not doc["result"]["passed"]
