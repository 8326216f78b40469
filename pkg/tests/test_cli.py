import csv
import io
import json

import pytest

from garling.cli import dumps, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_example(capsys):
    code, out, _ = invoke(capsys, "norm", "--space", "g", "--weight", "pow:a=0.5", "--p", "1",
                          "--vec", "[1,3.414213562373095]")
    data = json.loads(out)
    assert code == 0
    assert data["value"] == pytest.approx(3.4142, rel=1e-4)
    assert data["selection"] == [2]


@pytest.mark.parametrize("space, value", [("d", 1 + 0.2 / 2 ** 0.5), ("g", 1.0), ("lp", 1.2), ("dinf", 1.0)])
def test_norm_spaces(capsys, space, value):
    code, out, _ = invoke(capsys, "norm", "--space", space, "--vec", "[0.2, 1]")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(value, abs=1e-12)


def test_norm_preprocessing(capsys):
    code, out, _ = invoke(capsys, "norm", "--vec", '{"entries": [[1, 1], [2, 2]]}',
                          "--signs", "alt", "--spread", "affine:3,0")
    data = json.loads(out)
    assert code == 0
    assert data["vector"] == [[3, 1], [6, -2]]
    code, out, _ = invoke(capsys, "norm", "--vec", "[1,2,3,4]", "--extract", "list:2,4")
    assert json.loads(out)["vector"] == [[1, 2], [2, 4]]


def test_norm_input_file_and_output(capsys, tmp_path):
    src = tmp_path / "v.json"
    src.write_text("[3, 4]")
    dst = tmp_path / "out.json"
    code, out, _ = invoke(capsys, "norm", "--space", "lp", "--p", "2", "--input", str(src),
                          "--output", str(dst))
    assert code == 0 and out == ""
    assert json.loads(dst.read_text())["value"] == pytest.approx(5.0)


def test_weights_diag(capsys):
    code, out, _ = invoke(capsys, "weights", "diag", "--weight", "pow:a=0.5", "--horizon", "4096")
    data = json.loads(out)
    assert code == 0
    assert data["ed_sup"] == 1.0
    assert data["reg_sup"] <= 2


def test_defect_csv(capsys):
    code, out, _ = invoke(capsys, "defect", "--weight", "pow:a=0.5", "--p", "1",
                          "--r", "16,256,4096", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["r", "norm_f", "norm_g_rev", "harmonic", "defect", "lorentz_common"]
    defects = [float(r["defect"]) for r in rows]
    assert len(rows) == 3 and defects[0] < defects[1] < defects[2]


def test_defect_budget_exit(capsys):
    code, _, err = invoke(capsys, "defect", "--r", "4096", "--budget", "1000")
    assert code == 2 and "budget" in err


def test_select_lp(capsys):
    code, out, _ = invoke(capsys, "select-lp", "--epsilon", "3", "--budget", "1e9",
                          "--trials", "20", "--seed", "5")
    data = json.loads(out)
    assert code == 0
    assert len(data["trace"]["steps"]) == 2
    assert data["factorization"]["passed"]


def test_select_lp_budget_exit(capsys):
    code, _, _ = invoke(capsys, "select-lp", "--budget", "50", "--seed", "1")
    assert code == 2


def test_minimal(capsys):
    code, out, _ = invoke(capsys, "minimal", "--vec", "[1, 3.414213562373095]")
    data = json.loads(out)
    assert code == 0
    assert data["minimal"] is False and data["witness"] == 1
    assert [i for i, _ in data["predecessor"]] == [2]


def test_oracle_check(capsys):
    code, out, _ = invoke(capsys, "oracle-check", "--trials", "50", "--max-support", "10", "--seed", "9")
    data = json.loads(out)
    assert code == 0 and data["failures"] == [] and data["max_relative_error"] <= 1e-12


def test_oracle_check_is_deterministic(capsys):
    argv = ["oracle-check", "--trials", "40", "--seed", "3", "--p", "2"]
    assert invoke(capsys, *argv)[1] == invoke(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["norm", "--bogus", "1"],
    ["norm"],
    ["norm", "--vec", "not json"],
    ["norm", "--vec", "[1]", "--weight", "pow:a=5"],
    ["norm", "--vec", "[1]", "--p", "0.5"],
    ["norm", "--vec", "[1]", "--spread", "list:1,2", "--extract", "nope"],
    ["weights"],
    ["oracle-check", "--trials", "5"],
    ["oracle-check", "--seed", "1", "--max-support", "25"],
    ["select-lp", "--seed", "1", "--budget", "-3"],
])
def test_usage_errors(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 1
    assert out == ""
    assert "usage" in err


def test_dumps_format():
    text = dumps({"a": 0.1, "b": [1, 2.5], "c": None, "d": True, "e": [], "f": {}})
    assert '"a": 0.10000000000000001' in text
    assert json.loads(text)["b"] == [1, 2.5]
