import subprocess
import sys

import pytest

RUN = [sys.executable, "-m", "parikh"]


def run_cli(*args):
    return subprocess.run(RUN + list(args), capture_output=True, text=True)


@pytest.fixture
def g1_path(tmp_path):
    path = tmp_path / "g1.cfg"
    path.write_text("S -> a S b | \n")
    return str(path)


@pytest.fixture
def g2_path(tmp_path):
    path = tmp_path / "g2.cfg"
    path.write_text("S -> A b\nA -> c A d | e\n")
    return str(path)


@pytest.fixture
def dyck_path(tmp_path):
    path = tmp_path / "dyck.cfg"
    path.write_text("S -> S S | l S r | \n")
    return str(path)


def test_build_stdout(g1_path):
    proc = run_cli("build", "-g", g1_path)
    assert proc.returncode == 0
    assert proc.stdout.startswith("(set-logic QF_LIA)\n")
    assert "(check-sat)" in proc.stdout
    assert "grammar_size=8" in proc.stderr
    assert "formula_size=" in proc.stderr


def test_build_to_file_with_pinning(g1_path, tmp_path):
    out = tmp_path / "q.smt2"
    proc = run_cli("build", "-g", g1_path, "-z", "a=2,b=2", "-o", str(out))
    assert proc.returncode == 0
    script = out.read_text()
    assert "(assert (= z_a 2))" in script
    assert "(assert (= z_b 2))" in script


def test_build_parse_error(tmp_path):
    bad = tmp_path / "broken.cfg"
    bad.write_text("S -> a ->\n")
    proc = run_cli("build", "-g", str(bad))
    assert proc.returncode == 2
    assert "line 1" in proc.stderr


def test_build_byte_identical(g2_path):
    first = run_cli("build", "-g", g2_path)
    second = run_cli("build", "-g", g2_path)
    assert first.stdout.encode() == second.stdout.encode()
    assert first.stdout


def test_member_sat(g1_path):
    proc = run_cli("member", "-g", g1_path, "-z", "a=2,b=2", "--witness")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "SAT x=2,1 y=1 w=aabb"


def test_member_unsat(g1_path):
    proc = run_cli("member", "-g", g1_path, "-z", "a=1,b=0")
    assert proc.returncode == 1
    assert proc.stdout.startswith("UNSAT_UP_TO ")


def test_member_unknown_terminal(g1_path):
    proc = run_cli("member", "-g", g1_path, "-z", "q=1")
    assert proc.returncode == 2
    assert "unknown terminal" in proc.stderr


def test_member_witness_tree(g2_path):
    proc = run_cli(
        "member", "-g", g2_path, "-z", "b=1,c=1,d=1,e=1", "--witness", "--witness-tree"
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == (
        "SAT x=1,1,1 y=1,2 w=cedb tree=S[0](A[1](c A[2](e) d) b)"
    )


def test_member_bound_flag(g1_path):
    proc = run_cli("member", "-g", g1_path, "-z", "a=9,b=9", "--bound", "3")
    assert proc.returncode == 1
    assert proc.stdout.strip() == "UNSAT_UP_TO 3"


def test_image_g1(g1_path):
    proc = run_cli("image", "-g", g1_path, "--max-norm", "2")
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["a=0,b=0", "a=1,b=1", "a=2,b=2"]


def test_image_epsilon_grammar(tmp_path):
    path = tmp_path / "eps.cfg"
    path.write_text("S -> \n")
    proc = run_cli("image", "-g", str(path), "--max-norm", "1")
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == [""]


def test_image_g2(g2_path):
    proc = run_cli("image", "-g", g2_path, "--max-norm", "1")
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["b=1,c=0,d=0,e=1", "b=1,c=1,d=1,e=1"]


def test_diff_ok(g1_path):
    proc = run_cli("diff", "-g", g1_path, "--max-norm", "3", "--oracle-budget", "6")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "OK"


def test_diff_budget_short_is_informational(g1_path):
    proc = run_cli("diff", "-g", g1_path, "--max-norm", "5", "--oracle-budget", "2")
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines[-1] == "OK"
    assert [l for l in lines if l.startswith("ORACLE_BUDGET_SHORT")] == [
        "ORACLE_BUDGET_SHORT a=2,b=2",
        "ORACLE_BUDGET_SHORT a=3,b=3",
        "ORACLE_BUDGET_SHORT a=4,b=4",
        "ORACLE_BUDGET_SHORT a=5,b=5",
    ]


def test_diff_dyck(dyck_path):
    proc = run_cli("diff", "-g", dyck_path, "--max-norm", "3", "--oracle-budget", "8")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "OK"


def test_usage_error_exit_code():
    proc = run_cli("member", "-g", "/nonexistent.cfg", "-z", "a=1")
    assert proc.returncode == 2
