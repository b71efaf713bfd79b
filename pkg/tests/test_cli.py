import json
from importlib import resources

import pytest

from symred.cli import main

DATA = resources.files("symred") / "data"


def path(name):
    return str(DATA / f"{name}.prob")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_pass_exit_zero(capsys):
    code, out, _ = run(capsys, "check", path("eq3"), "--operator", "halfQminusD")
    assert code == 0
    assert "pass" in out


def test_check_unknown_operator_exit_three(capsys):
    code, _, err = run(capsys, "check", path("eq3"), "--operator", "bogus")
    assert code == 3
    assert "unknown operator" in err


def test_check_missing_bundle_exit_three(capsys):
    code, _, err = run(capsys, "check", "/nonexistent.prob")
    assert code == 3


def test_check_failing_operator_exit_one(capsys):
    code, out, _ = run(capsys, "check", path("sg_deformed"),
                       "--operator", "QcondPerturbed", "--mode", "conditional")
    assert code == 1


def test_reproducibility_header_present(capsys):
    _, out, _ = run(capsys, "check", path("eq3"), "--seed", "5")
    first = out.splitlines()[0]
    assert first.startswith("#") and "seeds=5" in first
    assert "tol" in first


def test_every_text_line_carries_seed_and_tolerances(capsys):
    _, out, _ = run(capsys, "check", path("eq3"))
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert rows
    for ln in rows:
        assert "seed=" in ln and "tol_abs=" in ln and "tol_rel=" in ln


def test_reduce_verify_candidate(capsys):
    code, _, _ = run(capsys, "reduce", path("ode32"), "--ansatz", "logAnsatz",
                     "--candidate", "eq36")
    assert code == 0


def test_reduce_derive_prints_system(capsys):
    code, out, _ = run(capsys, "reduce", path("sg_deformed"),
                       "--ansatz", "eq16")
    assert code == 0
    assert "phi1[x1] = phi2" in out
    assert "phi2[x2] = sin(phi1)" in out


def test_reduce_degenerate_exit_one(capsys):
    code, out, _ = run(capsys, "reduce", path("eq2"), "--ansatz", "degenerate")
    assert code == 1
    assert "no unknown-function derivative" in out


def test_reduce_without_ansatz_exit_three(capsys):
    code, _, err = run(capsys, "reduce", path("eq2"))
    assert code == 3


def test_verify_solution(capsys):
    code, out, _ = run(capsys, "verify", path("eq4"), "--solution", "eq5")
    assert code == 0
    assert "residual_max" in out


def test_verify_backlund(capsys):
    code, _, _ = run(capsys, "verify", path("sg_deformed"),
                     "--backlund", "eq18")
    assert code == 0


def test_verify_solution_fd_flag(capsys):
    code, out, _ = run(capsys, "verify", path("eq6"),
                       "--solution", "implicitTheta", "--fd")
    assert code == 0
    assert "finite-difference" in out


def test_verify_unknown_solution_exit_three(capsys):
    code, _, err = run(capsys, "verify", path("eq4"), "--solution", "nope")
    assert code == 3


def test_paper_suite_all_rows_match(capsys):
    code, out, _ = run(capsys, "paper-suite", "--format", "json-lines")
    assert code == 0
    rows = [json.loads(ln) for ln in out.splitlines() if ln.strip()]
    assert len(rows) >= 20
    assert all(r["ok"] for r in rows)


def test_json_lines_schema(capsys):
    _, out, _ = run(capsys, "check", path("eq3"), "--format", "json-lines")
    for ln in out.splitlines():
        r = json.loads(ln)
        for key in ("case", "kind", "verdict", "residual_max", "seed",
                    "tolerances", "provenance"):
            assert key in r
        assert set(r["tolerances"]) == {"abs", "rel"}


def test_seed_range_stability(capsys):
    code, out, _ = run(capsys, "check", path("eq3"), "--seed", "0..3",
                       "--format", "json-lines")
    assert code == 0
    rows = [json.loads(ln) for ln in out.splitlines()]
    assert {r["seed"] for r in rows} == {0, 1, 2, 3}
    assert len({r["verdict"] for r in rows}) == 1


def test_env_seed_override(capsys, monkeypatch):
    monkeypatch.setenv("SYMRED_SEED", "9")
    _, out, _ = run(capsys, "check", path("eq3"), "--operator", "D",
                    "--format", "json-lines")
    assert json.loads(out.splitlines()[0])["seed"] == 9


def test_tol_override_recorded(capsys):
    _, out, _ = run(capsys, "check", path("eq3"), "--operator", "D",
                    "--tol", "1e-6", "--format", "json-lines")
    r = json.loads(out.splitlines()[0])
    assert r["tolerances"] == {"abs": 1e-6, "rel": 1e-6}


def test_usage_error_exit_three(capsys):
    assert main(["frobnicate"]) == 3
