import json
import subprocess
import sys

import pytest

from weilform.cli import parse_fqm, run_command


def run(capsys, *argv):
    code = run_command(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_fqm_info(capsys):
    code, out = run(capsys, "fqm", "info", "--spec", "D:3")
    assert code == 0
    assert out["sigma"] == {"2": "1/8", "3": "6/8"}


def test_module_language():
    m, parts = parse_fqm("sum(D:1,neg(D:1),L:3:2)")
    assert m.order == 12 and len(parts) == 3
    assert parse_fqm("ppart(D:6,3)")[0].order == 3


def test_rep_check(capsys):
    code, out = run(capsys, "rep", "check", "--spec", "L:3:2")
    assert code == 0 and out["ok"]


def test_invariants_with_projection(capsys):
    assert run(capsys, "inv", "--spec", "Hyp:2")[1]["dim"] == 2
    assert run(capsys, "inv", "--spec", "sum(D:2,neg(D:2))", "--project", "even")[1]["dim"] == 1
    assert run(capsys, "inv", "--spec", "Hyp:2", "--selfdual-only")[1]["dim"] == 2


def test_dim_commands(capsys):
    _, out = run(capsys, "dim", "critical", "--matrix", "[[14]]", "--char", "8")
    assert out["m"] == 21 and out["total"] == 1
    _, out = run(capsys, "dim", "formula", "--matrix", "[[2]]", "--weight", "10")
    assert out["value"] == "2"
    _, out = run(capsys, "dim", "halfweight", "--m", "4")
    assert out["dim"] == 8


def test_matrix_from_file(capsys, tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"twoF": [[14]]}))
    _, out = run(capsys, "dim", "critical", "--matrix", f"@{p}", "--char", "8")
    assert out["total"] == 1


def test_qexp(capsys):
    _, out = run(capsys, "qexp", "eta", "--order", "3")
    assert out["q_den"] == 24 and [t["c"] for t in out["terms"]] == ["1", "-1", "-1"]
    _, out = run(capsys, "qexp", "theta-rho", "--N", "7", "--rho", "1,3", "--order", "2")
    assert out["meta"]["char"] == 8


@pytest.mark.parametrize("argv,code", [
    (["dim", "critical", "--matrix", "[[2,3],[3,2]]"], 2),
    (["fqm", "info", "--spec", "Q:3"], 2),
    (["fqm", "info", "--spec", "D:3,"], 2),
    (["dim", "formula", "--matrix", "[[2]]"], 2),
    (["nosuchverb"], 2),
    (["--budget", "max_rep_dim=2", "rep", "check", "--spec", "D:5"], 3),
    (["--budget", "bogus=1", "fqm", "info", "--spec", "D:1"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run_command(argv) == code
    capsys.readouterr()


def test_verify_suite(capsys):
    code, out = run(capsys, "verify", "rank1-decomp")
    assert code == 0 and out["exit_code"] == 0
    assert all(c["status"] == "pass" for c in out["checks"])


def test_console_script_is_deterministic():
    cmd = [sys.executable, "-m", "weilform.cli", "dim", "critical", "--matrix", "[[14]]", "--char", "8"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b and json.loads(a)["total"] == 1
