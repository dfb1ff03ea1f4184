import pytest

from helpers import cert, program
from termilab import core
from termilab.core import Substitution, Var
from termilab.measure import MissingMode
from termilab.modes import (
    BodyTooLong, ModeTable, NotSimplyModed, check_permutation, check_simply_moded, check_well_moded,
    enumerate_simply_local, is_simply_local, reorder_program, simply_moded_atoms,
)
from termilab.parser import parse_atom, parse_clause, parse_program, parse_query, parse_term

APPEND_MODES = ModeTable({("append", 3): ("I", "I", "O")})


def test_mode_table_accessors():
    a = parse_atom("append([1],Ys,Zs)")
    assert APPEND_MODES.inputs(a) == (parse_term("[1]"), Var("Ys"))
    assert APPEND_MODES.outputs(a) == (Var("Zs"),)
    assert APPEND_MODES.input_positions(("append", 3)) == [1, 2]
    with pytest.raises(MissingMode):
        APPEND_MODES.spec(("p", 1))


def test_simply_moded_program_and_queries():
    assert check_simply_moded(program("append"), APPEND_MODES)
    assert check_simply_moded(parse_query("append([1],[2],Zs)"), APPEND_MODES)
    # an output that is not a variable
    v = check_simply_moded(parse_query("append(Xs,Ys,[1,2])"), APPEND_MODES)
    assert not v and v.position == 3
    # an output reused as an earlier input
    m = ModeTable({("p", 1): ("O",), ("q", 1): ("I",)})
    assert check_simply_moded(parse_query("p(O), q(O)"), m)
    assert not check_simply_moded(parse_query("q(O), p(O)"), m)


def test_unit_clauses_are_simply_moded():
    assert check_simply_moded(parse_clause("append([],Ys,Ys)."), APPEND_MODES)


def test_well_moded_prodcons():
    pc = program("prodcons")
    assert check_well_moded(pc, pc.modes)
    assert not check_well_moded(parse_query("cons(Bs,0)"), pc.modes)
    assert check_well_moded(parse_query("prod(Bs), cons(Bs,s(0))"), pc.modes)


def test_well_moded_head_outputs():
    m = ModeTable({("p", 2): ("I", "O"), ("q", 1): ("I",)})
    v = check_well_moded(parse_clause("p(X,Y) :- q(X)."), m)
    assert not v and "Y" in v.reason


def test_permutation_reorders_permute_oi():
    pm = program("permute")
    oi = cert("permute", "simply-acceptable-oi").modes
    assert not check_simply_moded(pm, oi)
    v = check_permutation(pm, oi, "simply")
    assert v and v.permutations[0] == (1, 0)
    re = reorder_program(pm, oi)
    assert re.clauses[0].body[0].functor == "insert"
    assert check_simply_moded(re, oi)


def test_permutation_body_limit():
    c = parse_clause("p :- q, q, q.")
    with pytest.raises(BodyTooLong):
        check_permutation(c, {("p", 0): (), ("q", 0): ()}, limit=2)


def test_is_simply_local_examples():
    c = parse_clause("append([H|Xs],Ys,[H|Zs]) :- append(Xs,Ys,Zs).")
    theta = {Var("H"): Var("V"), Var("Xs"): parse_term("[]"), Var("Ys"): parse_term("[W]"),
             Var("Zs"): parse_term("[W]")}
    r = is_simply_local(theta, c, APPEND_MODES)
    assert r and len(r.decomposition.sigmas) == 2
    assert r.decomposition.sigmas[1] == Substitution({Var("Zs"): parse_term("[W]")})

    m = ModeTable({("p", 1): ("O",), ("q", 1): ("I",)})
    c2 = Clause = parse_clause("p(X) :- q(X).")
    assert not is_simply_local({Var("X"): parse_term("1")}, c2, m)


def test_is_simply_local_rejects_non_simply_moded():
    with pytest.raises(NotSimplyModed):
        is_simply_local({}, parse_clause("append(X,Y,[1]) :- append(X,Y,[1])."), APPEND_MODES)


def test_is_simply_local_fresh_clause_variable():
    c = parse_clause("append([H|Xs],Ys,[H|Zs]) :- append(Xs,Ys,Zs).")
    assert not is_simply_local({Var("Zs"): Var("H")}, c, APPEND_MODES)
    assert is_simply_local({Var("H"): parse_term("0"), Var("Zs"): parse_term("[0]")}, c, APPEND_MODES)


def test_enumerate_simply_local_members_are_simply_local():
    c = parse_clause("append([H|Xs],Ys,[H|Zs]) :- append(Xs,Ys,Zs).")
    sig = {("0", 0), ("[]", 0), (".", 2)}
    got = list(enumerate_simply_local(c, APPEND_MODES, 1, 1, sig))
    assert Substitution() in got
    assert len(got) == len(set(got))
    for th in got:
        assert is_simply_local(th, c, APPEND_MODES), th


def test_simply_moded_atoms():
    atoms = list(simply_moded_atoms(("append", 3), APPEND_MODES, 1, 1, {("0", 0), ("[]", 0), (".", 2)}))
    assert all(isinstance(a.args[2], Var) for a in atoms)
    assert any(core.is_ground(a.args[0]) for a in atoms)
    assert len(atoms) == len({core.canonical(a) for a in atoms})


def test_program_modes_parse_into_table():
    p = parse_program("%% mode p(i,o).\np(X,X).\n")
    assert ModeTable.of(p.modes).spec(("p", 2)) == ("I", "O")
