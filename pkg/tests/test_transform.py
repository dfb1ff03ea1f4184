import pytest

from helpers import program
from termilab import core, engine, transform
from termilab.core import Var
from termilab.parser import format_clause, parse_clause, parse_program, parse_query


def test_ter_clause_shapes():
    c = transform.ter_clause(parse_clause("odd(s(X)) :- even(X)."))
    assert format_clause(c) == "odd(s(X),s(D)) :- even(X,D)."
    u = transform.ter_clause(parse_clause("even(0)."))
    assert format_clause(u, anonymous=True) == "even(0,_)."


def test_ter_clause_avoids_existing_names():
    c = transform.ter_clause(parse_clause("p(D) :- q(D)."))
    d = c.body[0].args[-1]
    assert isinstance(d, Var) and d != Var("D")
    assert c.head.args[-1] == core.Struct("s", (d,))


def test_ter_program_modes_and_mapping():
    tp = transform.ter_program(program("append"))
    assert tp.mapping == {("append", 3): ("append", 4)}
    assert tp.program.modes == {("append", 4): ("I", "I", "O", "I")}
    tp = transform.ter_program(program("oddeven"))
    assert tp.program.modes == {("even", 2): ("O", "I"), ("odd", 2): ("O", "I")}


def test_ter_query():
    q = transform.ter_query(parse_query("even(X), odd(X)"), 2)
    assert q == parse_query("even(X,s(s(0))), odd(X,s(s(0)))")
    assert transform.ter_query((), 3) == ()
    with pytest.raises(ValueError):
        transform.ter_query(q, -1)
    assert transform.erase_depth(q[0]) == parse_query("even(X)")[0]


def test_depth_arguments():
    assert transform.depth_arguments(0) == [0, 2]
    assert transform.depth_arguments(4) == [0, 3, 6]


def test_ter_runs_terminate_under_every_rule():
    tp = transform.ter_program(parse_program("p(X) :- p(X).\np(0).\n")).program
    for rule in (engine.LD(), engine.RD(), engine.FairFIFO(), engine.Local()):
        rep = engine.run(tp, transform.ter_query(parse_query("p(X)"), 3), rule)
        # the unit clause resolves at every counter value 3, 2, 1, 0
        assert rep.verdict == "Finite" and len(rep.answers) == 4


def test_bijection_append():
    rep = transform.verify_bijection(program("append"), parse_query("append([1],[2],Zs)"), 2)
    assert rep.ok and rep.source == "sld"
    assert dict(rep.transformed) == {"Zs=[1,2]": 1}
    assert rep.summary().startswith("bijection OK k=2 source=sld")


def test_bijection_detects_a_small_k():
    # k=1 runs Ter(Q,0), which cannot refute anything
    rep = transform.verify_bijection(program("append"), parse_query("append([1],[2],Zs)"), 1)
    assert not rep.ok and "answer multisets differ" in rep.problems


def test_bijection_oracle_fallback():
    # the LD tree of p(Y) is infinite, its least model is finite
    p = parse_program("p(X) :- p(s(X)).\np(0).\n")
    rep = transform.verify_bijection(p, parse_query("p(Y)"), 3, depth_budget=20)
    assert rep.source == "oracle" and rep.ok
    assert dict(rep.original) == {"Y=0": 1} and dict(rep.transformed) == {"Y=0": 1}


def test_bijection_oracle_divergence():
    p = parse_program("q(0).\nq(X) :- q(X).\n")
    with pytest.raises(transform.BudgetInsufficientForOriginal):
        transform.verify_bijection(p, parse_query("q(Y)"), 3, depth_budget=20)
