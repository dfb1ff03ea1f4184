import pytest

from termilab.core import Struct, Substitution, Var
from termilab.parser import (
    ArityClash, DuplicateModeDirective, ParseError, format_clause, parse_atom, parse_clause, parse_mode_spec,
    parse_program, parse_query, parse_term, pretty_print, tokenize,
)


def test_list_sugar():
    assert parse_term("[1,2]") == Struct(".", (Struct("1"), Struct(".", (Struct("2"), Struct("[]")))))
    assert parse_term("[H|T]") == Struct(".", (Var("H"), Var("T")))
    assert parse_term("[]") == Struct("[]")


def test_infix_and_operator():
    t = parse_term("not(true) /\\ false")
    assert t.functor == "/\\" and t.args[1] == Struct("false")
    assert pretty_print(t) == "not(true) /\\ false"


def test_parse_error_location():
    with pytest.raises(ParseError) as ei:
        parse_clause("p(X) :- q(X")
    assert ei.value.line == 1
    with pytest.raises(ParseError):
        parse_program("p(X) :- .")


def test_tokenizer_tracks_lines():
    toks = tokenize("p(X).\nq.")
    assert [t.text for t in toks if t.kind == "name"] == ["p", "q"]
    assert toks[-2].line == 2


def test_comments_and_modes():
    p = parse_program("% a comment\n%% mode app(i,i,o).\napp([],Ys,Ys).\n")
    assert p.modes == {("app", 3): ("I", "I", "O")}
    assert len(p.clauses) == 1


def test_mode_directives_errors():
    with pytest.raises(DuplicateModeDirective):
        parse_program("%% mode p(i).\n%% mode p(o).\np(0).\n")
    with pytest.raises(ParseError):
        parse_mode_spec("p(x)")
    assert parse_mode_spec("p(i,o)") == (("p", 2), ("I", "O"))


def test_arity_clash():
    with pytest.raises(ArityClash):
        parse_program("p(X) :- p(X, X).\n")


def test_query_forms():
    assert parse_query("") == ()
    assert parse_query("?- p(X), q.") == (parse_atom("p(X)"), Struct("q"))


def test_pretty_print_examples():
    assert pretty_print(parse_term("[1]")) == "[1]"
    assert pretty_print(Substitution({Var("X"): Struct("0")})) == "{X/0}"
    assert pretty_print(parse_term("[X|Y]")) == "[X|Y]"
    assert pretty_print(parse_clause("p(X) :- q(X), r.")) == "p(X) :- q(X), r."
    assert pretty_print(parse_query("p, q(1)")) == "p, q(1)"


def test_quoted_names_round_trip():
    t = parse_term("'Hello world'(a)")
    assert t.functor == "Hello world"
    assert parse_term(pretty_print(t)) == t


def test_anonymous_printing():
    c = parse_clause("even(0,_D).")
    assert format_clause(c, anonymous=True) == "even(0,_)."
    assert format_clause(c) == "even(0,_D)."


def test_program_round_trip(tmp_path):
    from helpers import CORPUS

    for f in sorted(CORPUS.glob("*/program.pl")):
        p = parse_program(f.read_text())
        q = parse_program(pretty_print(p))
        assert q.clauses == p.clauses and q.modes == p.modes, f
