import subprocess
import sys

import pytest

from termilab.cli import main, parse_mode_table, UsageError


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_modes(capsys):
    code, out, _ = cli(capsys, "check-modes", "append")
    assert code == 0 and out.strip() == "ok simply"
    code, out, _ = cli(capsys, "check-modes", "prodcons", "--which", "well")
    assert code == 0


def test_check_modes_violation_and_permutation(capsys, tmp_path):
    mt = tmp_path / "modes"
    mt.write_text("%% mode permute(o,i).\nmode insert(o,o,i)\n")
    code, out, _ = cli(capsys, "check-modes", "permute", "--mode-table", str(mt))
    assert code == 1 and out.startswith("violation simply clause=1")
    code, out, _ = cli(capsys, "check-modes", "permute", "--mode-table", str(mt), "--which", "perm-simply")
    assert code == 0 and "clause 1 order 2,1" in out


def test_check_modes_without_modes_is_usage(capsys):
    code, _, err = cli(capsys, "check-modes", "sat")
    assert code == 2 and "no mode table" in err


def test_parse_mode_table():
    assert parse_mode_table("% comment\nmode p(i,o).\n\n%% mode q(o)\n") == {("p", 2): ("I", "O"), ("q", 1): ("O",)}
    with pytest.raises(UsageError):
        parse_mode_table("p(i,o)\n")


def test_prove(capsys):
    code, out, _ = cli(capsys, "prove", "append", "recurrent")
    assert code == 0 and out.startswith("verdict VERIFIED depth=3")
    code, out, _ = cli(capsys, "prove", "permute", "recurrent")
    assert code == 1 and out.startswith("verdict COUNTEREXAMPLE clause=1") and "|A|>|B2|" in out
    code, out, _ = cli(capsys, "prove", "append", "recurrent", "--hierarchy", "--depth", "2")
    assert code == 0 and out.count("implied ") == 3


def test_prove_records(capsys):
    code, out, _ = cli(capsys, "prove", "sat", "recurrent", "--query", "sat(not(true) /\\ false)", "--emit", "records")
    rec = dict(line.split(" ", 1) for line in out.splitlines())
    assert code == 0 and rec["verdict"] == "VERIFIED" and rec["k"] == "3"


def test_prove_bad_certificate_is_usage(capsys, tmp_path):
    bad = tmp_path / "bad.cert"
    bad.write_text("class terminating\n")
    code, _, err = cli(capsys, "prove", "append", str(bad))
    assert code == 2 and "unknown class tag" in err
    bad.write_text("class recurrent\nlevel append/3 = weight(1)\n")
    assert cli(capsys, "prove", "append", str(bad))[0] == 2
    assert cli(capsys, "prove", "append", "nosuch")[0] == 2


def test_run(capsys):
    code, out, _ = cli(capsys, "run", "append", "append(Xs,Ys,[1])")
    lines = out.splitlines()
    assert code == 0 and lines[:2] == ["answer {Xs/[], Ys/[1]}", "answer {Xs/[1], Ys/[]}"]
    assert lines[2].startswith("rule=ld verdict=Finite answers=2")
    code, out, _ = cli(capsys, "run", "append", "append(Xs,Ys,[1])", "--rule", "input-consuming")
    assert "verdict=Finite answers=0" in out and "deadlock=1" in out


def test_run_rules_with_certificates(capsys):
    code, out, _ = cli(capsys, "run", "permute", "permute(X,[1])", "--rule", "lds", "--cert", "delay-recurrent")
    assert code == 0 and "answer {X/[1]}" in out
    code, out, _ = cli(capsys, "run", "even", "even(X)", "--rule", "ld", "--depth", "5", "--emit", "records")
    assert "verdict BudgetHit" in out.splitlines()


def test_run_trace_and_usage(capsys):
    code, out, _ = cli(capsys, "run", "append", "append([1],[],Zs)", "--trace")
    assert "trace 0 | 0 | append([1],[],Zs) | 2 |" in out
    assert cli(capsys, "run", "append", "append(X,Y,Z)", "--rule", "random")[0] == 2
    assert cli(capsys, "run", "sat", "sat(X)", "--rule", "ic")[0] == 2
    assert cli(capsys, "run", "append", "append(X,Y")[0] == 2


def test_transform_stdout(capsys):
    code, out, _ = cli(capsys, "transform", "oddeven", "even(X), odd(X)", "--k", "2")
    assert code == 0
    assert out.splitlines() == [
        "even(s(X),s(D)) :- odd(X,D).",
        "even(0,_).",
        "odd(s(X),s(D)) :- even(X,D).",
        "% query",
        "even(X,s(s(0))), odd(X,s(s(0))).",
    ]


def test_transform_out_dir_and_modes(capsys, tmp_path):
    code, out, _ = cli(capsys, "transform", "append", "append([1],[2],Zs)", "--k", "1", "--out", str(tmp_path))
    assert code == 0 and out.startswith("wrote ")
    text = (tmp_path / "ter_program.pl").read_text()
    assert text.startswith("%% mode append(i,i,o,i).")
    assert (tmp_path / "ter_query.pl").read_text() == "append([1],[2],Zs,s(0)).\n"


def test_transform_from_cert(capsys):
    code, out, _ = cli(capsys, "transform", "all", "all(0,s(s(0)),As)", "--from-cert", "bounded")
    assert code == 0 and out.startswith("bound k=4 depth argument 3")
    code, out, _ = cli(capsys, "transform", "oddeven", "even(X), odd(X)", "--from-cert", "fair-bounded")
    assert code == 1 and "COUNTEREXAMPLE" in out


def test_transform_negative_k(capsys):
    code, _, err = cli(capsys, "transform", "oddeven", "even(X)", "--k", "-1")
    assert code == 2 and "natural number" in err


def test_classify(capsys):
    code, out, _ = cli(capsys, "classify", "even", "even(X), lte(X,s(s(0)))", "--level", "simply-acceptable")
    lines = out.splitlines()
    assert code == 0 and lines[0].split()[:3] == ["rule", "verdict", "answers"]
    rows = {l.split()[0]: l.split()[1] for l in lines[1:6]}
    assert rows == {"ld": "BudgetHit", "rd": "Finite", "fair-fifo": "Finite",
                    "input-consuming": "Finite", "local-delay-safe": "Finite"}
    assert lines[-1].startswith("certificate simply-acceptable verdict VERIFIED")


def test_corpus_commands(capsys):
    code, out, _ = cli(capsys, "corpus-list")
    assert code == 0 and len(out.splitlines()) == 10
    code, out, _ = cli(capsys, "corpus-verify", "append", "zpqr")
    assert code == 0 and out.splitlines()[-1] == "corpus-verify failures=0"
    assert cli(capsys, "corpus-verify", "nosuch")[0] == 2


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as ei:
        main(["transform", "oddeven", "even(X)"])
    assert ei.value.code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "termilab.cli", "run", "append", "append(X,Y,[])"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and "answer {X/[], Y/[]}" in r.stdout
