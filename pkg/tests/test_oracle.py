import pytest

from helpers import program
from termilab import engine, oracle
from termilab.core import Var
from termilab.parser import parse_atom, parse_program, parse_query


def test_least_model_append():
    m = oracle.least_model(program("append"), cap=2)
    assert m.cap == 2 and m.iterations >= 2
    atoms = m.atoms(("append", 3))
    # non-ground atoms: append([],Ys,Ys) is kept as one canonical atom
    assert any(a.args[0] == parse_atom("p([])").args[0] and isinstance(a.args[1], Var) for a in atoms)
    assert all(oracle.atom_size(a) <= 2 for a in atoms)


def test_answers_match_sld():
    p = program("append")
    q = parse_query("append(Xs,Ys,[1,2])")
    ref = oracle.answers(p, q, 4)
    assert ref == oracle.sld_answer_multiset(q, engine.run(p, q, engine.LD()).answers)
    assert ref["Xs=[], Ys=[1,2]"] == 1 and sum(ref.values()) == 3


def test_answer_multiplicity_counts_derivations():
    p = parse_program("r(a).\nr(a).\nq(X) :- r(X).\n")
    assert oracle.answers(p, parse_query("q(X)"), 2) == {"X=a": 2}


def test_non_ground_answers_are_canonical():
    p = parse_program("id(X,X).\n")
    ref = oracle.answers(p, parse_query("id(A,B)"), 2)
    sld = oracle.sld_answer_multiset(parse_query("id(A,B)"), engine.run(p, parse_query("id(A,B)"), engine.LD()).answers)
    assert ref == sld and list(ref) == ["A=_A0, B=_A0"]


def test_divergence():
    p = parse_program("q(0).\nq(X) :- q(X).\n")
    with pytest.raises(oracle.OracleDiverged):
        oracle.least_model(p, cap=2, max_iterations=20)


def test_cap_drops_large_atoms():
    p = parse_program("n(0).\nn(s(X)) :- n(X).\n")
    m = oracle.least_model(p, cap=3)
    assert len(m.atoms()) == 4
