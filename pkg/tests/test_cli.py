import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from derived_intersect import cli

PROBLEMS = Path(__file__).resolve().parent.parent / "demos" / "problems"
RUNNING = PROBLEMS / "running_pair.json"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, data, name="p.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_tor_running_pair(capsys):
    code, out, _ = run(["tor", RUNNING], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["results"]["tor_ranks"] == [1, 1, 0]
    assert rep["verdict"] == "excess-match: true"
    assert rep["field"] == "qq" and rep["engine"]["name"] == "derived-intersect"
    jsonschema.validate(rep, cli.REPORT_SCHEMA)


@pytest.mark.parametrize("command,verdict", [
    ("excess", "split"), ("split", "split"), ("formality", "formal: true"), ("ak", "resolution: true"),
])
def test_pair_commands(command, verdict, capsys):
    code, out, _ = run([command, RUNNING], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == verdict


def test_formality_reports_roundtrip(capsys):
    code, out, _ = run(["formality", PROBLEMS / "sheared_pair.json"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["field"] == "fp:32003"
    assert rep["results"]["extraction"]["retraction_ok"]
    assert rep["results"]["extraction"]["roundtrip_equals_input"]
    assert rep["results"]["theta"]["quasi_iso"]["verdict"]


def test_ak_with_offset(capsys):
    code, out, _ = run(["ak", PROBLEMS / "quantized_line.json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["change_of_quantization"]["verdict"]


def test_diag(capsys):
    code, out, _ = run(["diag", PROBLEMS / "diagonal_plane.json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "diagonal-formal: true"
    assert rep["results"]["reduction"]["excess_rank"] == 1
    assert rep["results"]["tor"]["tor_ranks"][:2] == [1, 1]


def test_graded_split_negative(capsys):
    code, out, _ = run(["graded-split", PROBLEMS / "euler_p1.json"], capsys)
    rep = json.loads(out)
    assert code == 1
    assert rep["verdict"] == "non-split" and rep["status"] == "negative"
    assert rep["results"]["dual_certificate"] == ["1"]


def test_graded_split_positive(tmp_path, capsys):
    p = write(tmp_path, {"proj_dim": 1, "source_twists": [0, -1], "target_twists": [0], "matrix": [["1", "0"]]})
    code, out, _ = run(["graded-split", p], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "split"


def test_determinism(capsys):
    _, a, _ = run(["formality", RUNNING, "--seed", "7"], capsys)
    _, b, _ = run(["formality", RUNNING, "--seed", "7"], capsys)
    assert a == b and json.loads(a)["seed"] == 7


def test_pretty_and_out(tmp_path, capsys):
    out_path = tmp_path / "r.json"
    code, out, _ = run(["tor", RUNNING, "--pretty", "--out", out_path], capsys)
    assert code == 0
    assert "verdict: excess-match: true" in out
    _, plain, _ = run(["tor", RUNNING], capsys)
    assert out_path.read_text() == plain


@pytest.mark.parametrize("data", [
    {"ambient": 2, "X": [[1, 0]], "extra": 1},
    {"ambient": 2, "X": [[1, "a"]]},
    {"ambient": 2, "X": [[1, 0], [2, 0]]},
    {"ambient": 2, "X": [[1, 0, 0]]},
    {"ambient": 2, "X": [[1, 0]], "kind": "graded-split"},
    {"ambient": 2, "X": [[1, 0]], "options": {"field": "reals"}},
    {"ambient": 2, "X": [[1, 0]], "phi": [["q"]]},
])
def test_input_errors(tmp_path, capsys, data):
    p = write(tmp_path, data)
    cmd = "ak" if "phi" in data else "tor"
    code, out, err = run([cmd, p], capsys)
    assert code == 2 and out == "" and "input error" in err


def test_unreadable_and_bad_json(tmp_path, capsys):
    assert run(["tor", tmp_path / "missing.json"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["tor", bad], capsys)[0] == 2
    assert run(["tor", RUNNING, "--field", "fp:9"], capsys)[0] == 2


def test_small_characteristic_is_input_error(tmp_path, capsys):
    p = write(tmp_path, {"ambient": 3, "X": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
    assert run(["ak", p, "--field", "fp:3"], capsys)[0] == 2


def test_degree_cap_partial_report(monkeypatch, capsys):
    monkeypatch.setenv("DI_MAX_DEGREE", "1")
    code, out, _ = run(["formality", PROBLEMS / "sheared_pair.json"], capsys)
    rep = json.loads(out)
    assert code == 3
    assert rep["status"] == "degree-limit" and "DI_MAX_DEGREE" in rep["error"]
    assert "pair" in rep["results"]


def test_invariant_violation_exit(monkeypatch, capsys):
    from derived_intersect.koszul import TorComparison

    monkeypatch.setattr(cli, "tor_excess_compare", lambda pair, dr=None: TorComparison(False, []))
    code, out, _ = run(["tor", RUNNING], capsys)
    rep = json.loads(out)
    assert code == 3 and rep["status"] == "invariant-violation"
    assert rep["verdict"] == "excess-match: false"


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "derived_intersect.cli", "tor", str(RUNNING)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["results"]["tor_ranks"] == [1, 1, 0]
