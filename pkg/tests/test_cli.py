import json

import numpy as np
import pytest

from bdris.harness.cli import main
from bdris.io import read_matrix, write_matrix


def test_complexity(capsys):
    assert main(["complexity", "--kind", "stem", "--n", "64", "--q", "7"]) == 0
    assert capsys.readouterr().out.strip() == "484"


def test_complexity_arch_json(capsys):
    assert main(["complexity", "--arch", '{"kind": "cluster", "n": 8, "g": 2, "q_g": 2}']) == 0
    assert capsys.readouterr().out.strip() == "18"


def test_project_identity(tmp_path, capsys):
    src = tmp_path / "x.csv"
    write_matrix(src, np.eye(3, dtype=complex))
    code = main(["project", "--matrix", str(src), "--arch", '{"kind": "stem", "n": 3, "q": 1}',
                 "--out", str(tmp_path / "o")])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["lower_bound"] == 0 and report["achieved"] == 0
    np.testing.assert_allclose(read_matrix(tmp_path / "o" / "theta.csv"), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(read_matrix(tmp_path / "o" / "B.csv"), np.zeros((3, 3)), atol=1e-15)


def test_project_default_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BDRIS_OUTPUT_DIR", str(tmp_path / "env"))
    src = tmp_path / "x.csv"
    write_matrix(src, np.eye(4, dtype=complex))
    assert main(["project", "--matrix", str(src), "--kind", "tree"]) == 0
    assert (tmp_path / "env" / "theta.csv").exists()


def test_validate(tmp_path, capsys):
    path = tmp_path / "t.csv"
    write_matrix(path, np.array([[1, 2], [3, 4]], dtype=complex))
    assert main(["validate", "--matrix", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["pass"] is False
    assert main(["validate", "--matrix", str(path), "--strict"]) == 2


def test_gain_and_wsr(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["gain", "--kind", "tree", "--n", "8", "--l", "2", "--k", "2", "--seed", "3",
                 "--max-iter", "30", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["sosup_qn"]["gain"] >= rep["ub_sosup"]["gain"]
    assert rep["ub"] >= rep["sosup_qn"]["gain"]
    capsys.readouterr()
    assert main(["wsr", "--kind", "fully", "--n", "8", "--l", "2", "--k", "2", "--z0", "25"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["power"] <= 1.0 + 1e-9 and len(rep["rates"]) == 2


def test_sweep_missing_output(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "complexity", "dims": {"n": 8}, "archs": [{"kind": "tree"}]}))
    code = main(["sweep", str(cfg)])
    assert code == 1
    assert "output" in capsys.readouterr().err


def test_sweep_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "complexity", "output": "unused.csv", "dims": {"n": [8, 16]},
                               "archs": [{"kind": "tree"}]}))
    out = tmp_path / "cx.csv"
    assert main(["sweep", str(cfg), "--out", str(out)]) == 0
    assert out.read_text().count("\n") == 3


@pytest.mark.parametrize("argv", [
    [],
    ["complexity"],
    ["complexity", "--kind", "group", "--n", "10", "--g", "3"],
    ["complexity", "--arch", "{not json"],
    ["gain", "--kind", "stem", "--n", "8"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_runtime_error_exit_2(tmp_path, capsys):
    assert main(["project", "--matrix", str(tmp_path / "missing.csv"), "--kind", "fully", "--n", "3"]) == 2
