import csv
import subprocess
import sys
from pathlib import Path

import pytest

from relform.cli import main

INPUTS = Path(__file__).resolve().parent.parent / "inputs"
FAST = ["--samples", "4096", "--replicates", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_graphs_listing(capsys):
    code, out = run(capsys, "graphs", "1", "2", "2")
    assert code == 0
    assert out.splitlines() == ["v1: g1,g2", "v1: g2,g1"]
    _, out = run(capsys, "graphs", "2", "1", "2,1", "--canonical")
    assert out.splitlines() == ["v1: a2,g1; v2: a1", "v1: a2,g1; v2: g1"]


def test_graphs_wrong_degree_count():
    with pytest.raises(SystemExit):
        main(["graphs", "2", "1", "2"])


def test_weights_exact_and_numeric(capsys, tmp_path):
    _, out = run(capsys, "weights", "1", "3", "3", "--canonical")
    assert out.strip() == "v1: g1,g2,g3 w=1/6 err=0 method=exact"
    _, out = run(capsys, "--report", str(tmp_path), "weights", "2", "0", "1,1", *FAST)
    assert "method=quasi-monte-carlo" in out and "err=" in out
    rows = list(csv.reader(open(tmp_path / "weights.csv")))
    assert rows[0][:2] == ["graph", "value"] and len(rows) == 2
    assert (tmp_path / "weights.png").stat().st_size > 0


def test_lambda_and_coiso(capsys, tmp_path):
    f = str(INPUTS / "coisotropic_xy.rf")
    _, out = run(capsys, "lambda", f, "--report", str(tmp_path))
    assert out.splitlines()[:2] == ["lambda_0: 0", "lambda_1: x*theta_y*d_x"]
    assert (tmp_path / "lambda.csv").exists() and (tmp_path / "lambda.png").exists()
    _, out = run(capsys, "coiso", f)
    assert out.splitlines() == ["coisotropic: yes", "lambda_1: x*theta_y*d_x"]
    _, out = run(capsys, "coiso", str(INPUTS / "noncoiso.rf"))
    assert out.splitlines()[0] == "coisotropic: no"
    assert out.splitlines()[1] == "lambda_0: theta_y1*theta_y2"


def test_star_check_passes(capsys, tmp_path):
    code, out = run(capsys, "star", str(INPUTS / "moyal.rf"), "--check", "--check-arity", "2", *FAST,
                    "--report", str(tmp_path))
    assert code == 0
    assert "eps^1 arity 2: (-1/2) * D[x2|x1] + (1/2) * D[x1|x2]" in out
    assert "check: passed" in out
    assert (tmp_path / "star.csv").exists() and (tmp_path / "star.png").exists()


def test_star_check_fails_on_broken_relation(capsys, monkeypatch):
    import relform.cli as cli
    monkeypatch.setattr(cli, "residual_is_zero", lambda res, fn: False)
    code, out = run(capsys, "star", str(INPUTS / "coisotropic_xy.rf"), "--check", "--check-arity", "1", *FAST)
    assert code == 1
    assert "check: FAILED" in out


def test_bad_input_file(tmp_path):
    bad = tmp_path / "bad.rf"
    bad.write_text("[vars]\nx even\n[poisson]\nd_x*\n")
    with pytest.raises(SystemExit) as e:
        main(["lambda", str(bad)])
    assert "error" in str(e.value)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "relform", "graphs", "1", "2", "2"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.splitlines()[0] == "v1: g1,g2"
