import json

import pytest

from nilprob import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_dc_sym3(capsys):
    code, out = run(capsys, "dc", "--group", "builtin:sym3", "-k", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["dc"] == {"num": "1", "den": "2", "decimal": "0.5"}
    assert "seconds" not in rep


def test_dc_k0(capsys):
    _, out = run(capsys, "dc", "--group", "builtin:sym3", "-k", "0")
    assert json.loads(out)["results"]["dc"]["den"] == "6"


def test_reports_are_byte_identical(capsys):
    args = ("estimate", "--sampler", "walk:heisenberg:steps=20", "--trials", "3000", "--seed", "4")
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a == b


def test_timing_only_on_request(capsys):
    _, out = run(capsys, "dc", "--group", "sym3", "--timing")
    assert "seconds" in json.loads(out)


def test_gallagher_full_audit(capsys):
    code, out = run(capsys, "gallagher", "--group", "builtin:sym4", "--normal", "v4", "-k", "1",
                    "--full-audit")
    rep = json.loads(out)["results"]
    assert code == 0 and rep["audit"]["ok"] and rep["audit"]["failures"] == []
    assert rep["submultiplicativity"]["ok"]


def test_gallagher_single_instance(capsys):
    _, out = run(capsys, "gallagher", "--group", "sym4", "--normal", "v4", "-k", "2")
    inst = json.loads(out)["results"]["instance"]
    assert all(inst["checks"].values())
    assert sum(sum(c["r"]) for c in inst["components"]) == inst["vertices"]


def test_pofg_and_dphi(capsys, tmp_path):
    _, out = run(capsys, "pofg", "--group", "sym3", "--element", "(1,2,3)")
    assert json.loads(out)["results"]["P"]["num"] == "1"
    word = tmp_path / "w.txt"
    word.write_text("x1 c:(1,2) x1^-1 c:(1,2)\n")
    _, out = run(capsys, "dphi", "--group", "sym3", "--word", str(word))
    assert json.loads(out)["results"]["dphi"]["decimal"].startswith("0.333")


def test_pgroup(capsys):
    _, out = run(capsys, "pgroup", "-p", "3", "-k", "1", "-n", "2", "--verify-all")
    rep = json.loads(out)["results"]
    assert rep["series"]["ok"] and rep["sharp"]["index"] == 9 and rep["maximal_audit"]["ok"]


def test_pgroup_reports_skips(capsys):
    _, out = run(capsys, "pgroup", "-p", "3", "-k", "1", "-r", "2", "--verify-all")
    assert "skipped" in json.loads(out)["results"]["sharp"]


def test_malcev(capsys):
    _, out = run(capsys, "malcev", "--group", "heisenberg", "--quotient", "3", "--dc", "1")
    rep = json.loads(out)["results"]
    assert rep["n0"] == 2 and rep["quotient"]["dc"]["num"] == "11"


def test_malcev_not_coprime(capsys):
    code, out = run(capsys, "malcev", "--group", "heisenberg", "--quotient", "2")
    assert code == 2 and json.loads(out)["error"]["code"] == "NotCoprime"


def test_rootdensity_csv(capsys, tmp_path):
    f = tmp_path / "c.poly"
    f.write_text("vars X1 X2 X3 W1 W2 W3\nX2*W3 - X3*W2\n")
    _, out = run(capsys, "rootdensity", "--poly", str(f), "--group", "heisenbergxheisenberg",
                 "--primes", "3,5", "--format", "csv")
    assert out.splitlines() == ["n,density", "3,11/27", "5,29/125"]


def test_rootdensity_literal(capsys):
    _, out = run(capsys, "rootdensity", "--poly", "vars X1; X1", "--primes", "3,7",
                 "--format", "csv")
    assert out.splitlines() == ["n,density", "3,1/3", "7,1/7"]


def test_estimate_requires_seed(capsys):
    code, out = run(capsys, "estimate", "--sampler", "ball:free2:radius=3", "--trials", "10")
    err = json.loads(out)["error"]
    assert code == 2 and err["code"] == "ConfigError"


def test_estimate_grid_csv(capsys, tmp_path):
    dest = tmp_path / "grid.csv"
    code, _ = run(capsys, "estimate", "--sampler", "ball:free2:radius=2,4", "--trials", "500",
                  "--seed", "1", "--format", "csv", "--out", str(dest))
    lines = dest.read_text().splitlines()
    assert code == 0 and len(lines) == 3 and lines[0].startswith("sampler,")


def test_generic(capsys):
    _, out = run(capsys, "generic", "--rank", "2", "--radius", "5", "--trials", "300", "--seed", "7")
    rep = json.loads(out)
    row = rep["rows"][0]
    assert row["delzant_frac"] <= row["basis_frac"]


def test_parse_error_has_line(capsys, tmp_path):
    f = tmp_path / "bad.grp"
    f.write_text("perm 3\n(1,2,3)\n(1,2\nend\n")
    code, out = run(capsys, "dc", "--group", str(f))
    err = json.loads(out)["error"]
    assert code == 2 and err["code"] == "ParseError" and err["line"] == 3


def test_unknown_group(capsys):
    code, out = run(capsys, "dc", "--group", "nosuchgroup")
    assert code == 2 and json.loads(out)["error"]["code"] == "UnknownGroup"


def test_acceptance_only(capsys):
    code, out = run(capsys, "acceptance", "--only", "gallagher")
    rep = json.loads(out)["results"]
    assert code == 0 and rep["passed"]
    statuses = {c["name"]: c["status"] for c in rep["criteria"]}
    assert statuses["gallagher"] == "pass"
    assert list(statuses.values()).count("skip") == 9


def test_acceptance_failure_exit_code(capsys):
    code, out = run(capsys, "acceptance", "--only", "1")
    rep = json.loads(out)["results"]
    # the contract's Dih8 target is wrong, so this run fails
    assert code == 1 and not rep["passed"]
