from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from carnotw1.cli import run


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "group": _write(tmp_path / "group.json", {"type": "heisenberg", "n": 1}),
        "kor": _write(tmp_path / "kor.json", {"norm": "koranyi"}),
        "pmax": _write(tmp_path / "pmax.json", {"norm": "pmax", "p": 2, "a": 1}),
        "mu": _write(tmp_path / "mu.json", {"points": [[0, 0, 0], [3, 0, 0]], "weights": [0.5, 0.5]}),
        "nu": _write(tmp_path / "nu.json", {"points": [[1, 0, 0]], "weights": [1.0]}),
        "mu2": _write(tmp_path / "mu2.json", {"points": [[0, 0, 0], [1, 2, 0.5]], "weights": [0.5, 0.5]}),
        "nu2": _write(tmp_path / "nu2.json", {"points": [[3, 0, 1], [0, 1, -2]], "weights": [0.5, 0.5]}),
        "select": _write(tmp_path / "select.json", [[0, 0, 0]]),
        "curve": _write(
            tmp_path / "curve.json",
            {"knots": [{"t": 0, "measure": {"points": [[0, 0, 0]], "weights": [1]}},
                       {"t": 1, "measure": {"points": [[2, 0, 0]], "weights": [1]}}]},
        ),
        "iso": _write(tmp_path / "iso.json", {"translate": [0, 0, 1]}),
        "points": _write(tmp_path / "points.json", [[0, 0, 0], [1, 0, 0]]),
        "bad": _write(tmp_path / "bad.json", {"kind": "nonsense"}),
        "dir": tmp_path,
    }


def _run(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


def test_norm_and_dist(capsys, files):
    base = ["--group", files["group"], "--norm", files["kor"]]
    code, out = _run(capsys, ["norm", *base, "--point", "1,0,0"])
    assert code == 0 and out.out.strip() == "1"
    code, out = _run(capsys, ["dist", *base, "--p", "0,0,0", "--q", "0,0,1"])
    assert code == 0 and float(out.out) == pytest.approx(1.0)


def test_w1_with_plan(capsys, files):
    argv = ["w1", "--group", files["group"], "--norm", files["kor"], "--mu", files["mu"], "--nu", files["nu"], "--plan"]
    code, out = _run(capsys, argv)
    lines = out.out.splitlines()
    assert code == 0
    assert float(lines[0]) == pytest.approx(1.5)
    assert lines[1] == "i,j,flow,cost"


def test_w1_json(capsys, files):
    argv = ["w1", "--group", files["group"], "--norm", files["kor"], "--mu", files["mu"], "--nu", files["nu"],
            "--format", "json"]
    code, out = _run(capsys, argv)
    obj = json.loads(out.out)
    assert code == 0 and obj["w1"] == pytest.approx(1.5) and len(obj["plan"]) == 2


def test_w1_mass_mismatch_is_validation_error(capsys, files, tmp_path):
    half = _write(tmp_path / "half.json", {"points": [[1, 0, 0]], "weights": [0.5]})
    code, out = _run(capsys, ["w1", "--group", files["group"], "--norm", files["kor"], "--mu", files["mu"], "--nu", half])
    assert code == 2 and "error" in out.err


def test_geodesic_validate_reports_wrong_speed(capsys, files):
    argv = ["geodesic-validate", "--group", files["group"], "--norm", files["kor"], "--curve", files["curve"]]
    code, out = _run(capsys, argv)
    assert code == 3
    assert out.out.splitlines()[0] == "t_i,t_j,d1,deviation"


def test_geodesic_branch(capsys, files):
    argv = ["geodesic-branch", "--group", files["group"], "--norm", files["kor"], "--mu", files["mu2"],
            "--nu", files["nu2"], "--select", files["select"]]
    code, out = _run(capsys, argv)
    assert code == 0
    assert len(out.out.splitlines()) == 3


def test_check_norm_and_hsc(capsys, files):
    code, _ = _run(capsys, ["check-norm", "--group", files["group"], "--norm", files["kor"], "--samples", "500"])
    assert code == 0
    code, _ = _run(capsys, ["check-hsc", "--group", files["group"], "--norm", files["kor"], "--samples", "500"])
    assert code == 0
    code, _ = _run(capsys, ["check-hsc", "--group", files["group"], "--norm", files["pmax"], "--samples", "500"])
    assert code == 3


def test_check_hs_proof(capsys, files):
    code, _ = _run(capsys, ["check-hs-proof", "--group", files["group"], "--r", "0.2", "--samples", "500"])
    assert code == 0
    code, _ = _run(capsys, ["check-hs-proof", "--group", files["group"], "--r", "1", "--samples", "500"])
    assert code == 2


def test_r0(capsys, files):
    code, out = _run(capsys, ["r0", "--group", files["group"]])
    header, row = out.out.splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert code == 0
    assert 1.96 <= float(values["c1"]) <= 2.1
    assert 0.40 <= float(values["r0"]) <= 0.45


def test_rigidity_demo(capsys, files):
    argv = ["rigidity-demo", "--group", files["group"], "--norm", files["kor"], "--iso", files["iso"],
            "--samples", "10"]
    code, out = _run(capsys, argv)
    assert code == 0
    assert out.out.splitlines()[0] == "check_name,status,worst_deviation"


def test_perturb(capsys, files):
    argv = ["perturb", "--group", files["group"], "--norm", files["kor"], "--points", files["points"],
            "--epsilon", "0.1"]
    code, out = _run(capsys, argv)
    assert code == 0 and len(out.out.splitlines()) == 3


def test_output_file_and_reruns_are_identical(capsys, files):
    target = files["dir"] / "out.csv"
    argv = ["check-norm", "--group", files["group"], "--norm", files["kor"], "--samples", "300", "--seed", "5"]
    assert run([*argv, "--output", str(target)]) == 0
    assert capsys.readouterr().out == ""
    first = target.read_bytes()
    assert run([*argv, "--output", str(target)]) == 0
    assert target.read_bytes() == first
    code, out = _run(capsys, argv)
    assert out.out.encode() == first


def test_io_errors(capsys, files):
    code, out = _run(capsys, ["norm", "--group", "/nonexistent.json", "--norm", files["kor"], "--point", "0,0,0"])
    assert code == 1 and "error" in out.err
    code, _ = _run(capsys, ["norm", "--group", files["bad"], "--norm", files["kor"], "--point", "0,0,0"])
    assert code == 1
    code, _ = _run(capsys, ["norm", "--group", files["group"], "--norm", files["kor"], "--point", "a,b"])
    assert code == 1
    code, _ = _run(capsys, ["norm", "--group", files["group"]])
    assert code == 1


def test_wrong_point_dimension_is_validation_error(capsys, files):
    code, _ = _run(capsys, ["norm", "--group", files["group"], "--norm", files["kor"], "--point", "1,2"])
    assert code == 2


def test_version_and_module_entry_point():
    env = {**os.environ, "COLUMNS": "40"}
    res = subprocess.run([sys.executable, "-m", "carnotw1", "--version"], capture_output=True, text=True, env=env)
    assert res.returncode == 0
    assert res.stdout.startswith("carnotw1 ") and "formats:" in res.stdout
    assert res.stdout.count("\n") == 1


def test_group_defaults_to_first_heisenberg_group(capsys, files):
    code, out = _run(capsys, ["check-hsc", "--norm", files["pmax"], "--samples", "10000", "--seed", "7"])
    assert code == 3
    assert "hsc_counterexample" in out.out
    code, out = _run(capsys, ["r0"])
    assert code == 0
