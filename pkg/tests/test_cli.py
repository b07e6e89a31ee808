from __future__ import annotations

import json
import subprocess
import sys

import pytest

from helpers import CORPUS
from prsbuchi.cli import main
from prsbuchi.syntax import parse_brs

BRS = CORPUS / "brs"
RDHA = CORPUS / "rdha"
KEYS = {"command", "model", "from", "verdict", "condition", "witness", "anyUnknown", "budgets"}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("model,problem,code", [
    ("e3", 1, 0), ("halt", 1, 1), ("halt", 2, 1), ("cycle", 2, 0), ("cycle", 1, 1), ("two_phase", 3, 0),
])
def test_check_exit_codes(capsys, model, problem, code):
    got, out, _ = run(capsys, "check", "--problem", problem, "--from", "X", BRS / f"{model}.brs")
    assert got == code
    assert f"problem {problem} from X" in out


def test_check_json_schema(capsys):
    code, out, _ = run(capsys, "check", "--problem", 1, "--from", "X", "--json", BRS / "e3.brs")
    payload = json.loads(out)
    assert code == 0 and KEYS <= set(payload)
    assert payload["verdict"] == "yes" and payload["condition"] == "Cond1"
    assert payload["witness"] and {"rule", "position", "term"} <= set(payload["witness"][0])
    assert payload["budgets"] == {"nodeBudget": None, "depth": None}


@pytest.mark.parametrize("formula,code", [("GF a", 0), ("F b", 1), ("!GF a", 1), ("!F b", 1)])
def test_mc_on_e1(capsys, formula, code):
    got, out, _ = run(capsys, "mc", "--formula", formula, "--from", "X", BRS / "e1.brs")
    assert got == code
    assert "infinite runs" in out


def test_mc_json_reports_problems_and_vacuity(capsys):
    code, out, _ = run(capsys, "mc", "--formula", "GF a", "--from", "X", "--json", BRS / "halt.brs")
    payload = json.loads(out)
    assert code == 0 and payload["verdict"] == "holds" and payload["vacuous"]
    assert set(payload["problems"]) == {"1", "2", "3"}


def test_bad_formula(capsys):
    code, _, err = run(capsys, "mc", "--formula", "F zz", "--from", "X", BRS / "e1.brs")
    assert code == 3 and "formula" in err


def test_decompose_writes_outputs(capsys, tmp_path):
    code, _, _ = run(capsys, "decompose", BRS / "e3.brs", "-o", tmp_path)
    assert code == 0
    rpar = parse_brs((tmp_path / "rpar.brs").read_text(), allow_reserved=True)
    rseq = parse_brs((tmp_path / "rseq.brs").read_text(), allow_reserved=True)
    prov = json.loads((tmp_path / "provenance.json").read_text())
    assert {"p2", "p3"} <= {r.id for r in rpar.rules}
    assert "p1" in {r.id for r in rseq.rules}
    assert prov["anyUnknown"] is False and prov["iterations"] >= 1 and prov["rules"]


def test_rdha2prs(capsys, tmp_path):
    out_file = tmp_path / "call.brs"
    code, _, _ = run(capsys, "rdha2prs", RDHA / "call.rdha", "-o", out_file, "--check-depth", 4)
    assert code == 0
    b = parse_brs(out_file.read_text())
    assert "X_m0" in b.vars


def test_rdha_model_can_be_checked_directly(capsys):
    code, out, _ = run(capsys, "check", "--problem", 2, "--from", "w0", RDHA / "spawn.rdha")
    assert code == 0 and "from X_w0" in out


def test_sim_and_oracle(capsys):
    code, out, _ = run(capsys, "sim", "--from", "X", "--depth", 3, BRS / "e1.brs")
    assert code == 0 and out.count("\n") == 4
    code, out, _ = run(capsys, "sim", "--from", "X", "--depth", 5, "--seed", 7, "--json", BRS / "e1.brs")
    assert len(json.loads(out)["witness"]) == 5
    assert run(capsys, "oracle", "--problem", 1, "--from", "X", BRS / "e1.brs")[0] == 0
    assert run(capsys, "oracle", "--problem", 1, "--from", "X", BRS / "halt.brs")[0] == 1
    code, _, _ = run(capsys, "oracle", "--problem", 2, "--from", "X", "--depth", 3, BRS / "e1.brs")
    assert code == 2


def test_xcheck(capsys):
    code, out, _ = run(capsys, "xcheck", "--from", "X", BRS / "e2.brs")
    assert code == 0 and "DISAGREE" not in out


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.brs"
    bad.write_text("brs { vars: X;\n alphabet: a; rule r1: X -a-> Q; }")
    code, _, err = run(capsys, "check", "--problem", 1, "--from", "X", bad)
    assert code == 3 and "bad.brs:2:" in err
    nf = tmp_path / "nf.brs"
    nf.write_text("brs { vars: X, Y; alphabet: a; rule r1: X -a-> X.(Y || Y); }")
    code, _, err = run(capsys, "check", "--problem", 1, "--from", "X", nf)
    assert code == 3 and "normal form" in err
    code, _, err = run(capsys, "check", "--problem", 1, "--from", "Q", BRS / "e1.brs")
    assert code == 3 and "unknown variable" in err
    code, _, err = run(capsys, "check", "--problem", 1, "--from", "X", tmp_path / "missing.brs")
    assert code == 3
    assert run(capsys, "check", "--problem", 9, "--from", "X", BRS / "e1.brs")[0] == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "prsbuchi", "check", "--problem", "1", "--from", "X",
                          str(BRS / "e1.brs")], capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and "yes" in res.stdout
    res = subprocess.run([sys.executable, "-m", "prsbuchi", "mc", "--help"], capture_output=True, text=True,
                         timeout=60)
    assert res.returncode == 0 and "infinite runs" in res.stdout
