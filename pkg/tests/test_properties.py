"""Property-based tests against independent reference implementations."""
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import (
    apply_naive, brute_force_simply_local, naive_unify, random_candidate_theta, random_simply_moded_clause,
)
from termilab import core, engine, oracle, transform
from termilab.core import Clause, Struct, Var
from termilab.modes import enumerate_simply_local, is_simply_local
from termilab.parser import format_clause, format_term, parse_clause, parse_program, parse_query, parse_term

VARS = st.sampled_from([Var("X"), Var("Y"), Var("Z"), Var("W")])
CONSTS = st.sampled_from(["a", "b", "0", "[]", "nil_1"]).map(Struct)


def _compound(children):
    return st.one_of(
        st.tuples(st.sampled_from(["f", "s"]), children).map(lambda x: Struct(x[0], (x[1],))),
        st.tuples(st.sampled_from(["g", ".", "/\\"]), children, children).map(lambda x: Struct(x[0], x[1:])),
    )


TERMS = st.recursive(st.one_of(VARS, CONSTS), _compound, max_leaves=8)
GROUND = st.recursive(CONSTS, _compound, max_leaves=8)

SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(TERMS, TERMS)
def test_mgu_agrees_with_naive_unification(s, t):
    ref = naive_unify(s, t)
    try:
        sigma = core.mgu(s, t)
    except core.NoUnifier:
        assert ref is None
        return
    assert ref is not None
    assert core.apply(sigma, s) == core.apply(sigma, t)
    assert sigma.is_idempotent()
    assert core.variant_of(core.apply(sigma, s), apply_naive(ref, s))


@SETTINGS
@given(TERMS, GROUND)
def test_mgu_is_most_general(s, g):
    # any ground instance of s unifying with g factors through the mgu
    try:
        sigma = core.mgu(s, g)
    except core.NoUnifier:
        assert core.match(s, g) is None
        return
    theta = core.match(s, g)
    assert theta is not None
    for v in core.vars_of(s):
        assert core.apply(theta, core.apply(sigma, v)) == core.apply(theta, v)


@SETTINGS
@given(TERMS)
def test_term_round_trip(t):
    assert parse_term(format_term(t)) == t


@SETTINGS
@given(TERMS, st.lists(TERMS, max_size=3))
def test_clause_round_trip(h, body):
    c = Clause(Struct("p", (h,)), tuple(Struct("q", (b,)) for b in body))
    assert parse_clause(format_clause(c)) == c


@SETTINGS
@given(st.randoms(use_true_random=False))
def test_is_simply_local_agrees_with_brute_force(rng):
    c, m = random_simply_moded_clause(rng)
    theta = random_candidate_theta(rng, c, m)
    if theta is None:
        return
    assert bool(is_simply_local(theta, c, m)) == brute_force_simply_local(theta, c, m)


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_enumerated_substitutions_are_simply_local(rng):
    c, m = random_simply_moded_clause(rng)
    sig = {("a", 0), ("f", 1), ("g", 2)}
    for i, theta in enumerate(enumerate_simply_local(c, m, 1, 1, sig)):
        r = is_simply_local(theta, c, m)
        assert r, (format_clause(c), theta, r.reason)
        assert brute_force_simply_local(theta, c, m)
        if i > 200:
            break


PROGRAMS = [
    ("app([],Ys,Ys).\napp([X|Xs],Ys,[X|Zs]) :- app(Xs,Ys,Zs).\n", "app(X,Y,[a,b])"),
    ("even(s(X)) :- odd(X).\neven(0).\nodd(s(X)) :- even(X).\n", "even(X), odd(X)"),
    ("p(X) :- q(X,Y), p(Y).\np(0).\nq(a,b).\nq(b,a).\n", "p(X)"),
]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PROGRAMS), st.integers(0, 6))
def test_ter_structure(case, k):
    text, query = case
    p = parse_program(text)
    tp = transform.ter_program(p)
    for c, tc in zip(p.clauses, tp.program.clauses):
        assert transform.erase_depth(tc.head) == c.head
        assert tuple(transform.erase_depth(b) for b in tc.body) == c.body
        d = tc.head.args[-1]
        if c.body:
            assert d.functor == "s" and all(b.args[-1] == d.args[0] for b in tc.body)
            assert d.args[0] not in core.vars_of(c)
        else:
            assert isinstance(d, Var) and d not in core.vars_of(c)
    tq = transform.ter_query(parse_query(query), k)
    assert all(a.args[-1] == core.numeral(k) for a in tq)
    # a numeral counter makes every LD tree of Ter(P) finite
    for rule in (engine.LD(), engine.RD()):
        assert engine.run(tp.program, tq, rule).verdict == "Finite"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["0", "1"]), max_size=3), st.lists(st.sampled_from(["0", "1"]), max_size=3))
def test_oracle_agrees_with_sld_on_append(xs, ys):
    p = parse_program(PROGRAMS[0][0])
    zs = "[" + ",".join(xs + ys) + "]"
    for text in (f"app(A,B,{zs})", f"app([{','.join(xs)}],B,C)"):
        q = parse_query(text)
        rep = engine.run(p, q, engine.LD())
        assert rep.finite
        # the refutation atoms app(Us,Vs,Ws) have size 2*len(Ws) at most
        cap = 2 * len(xs + ys)
        assert oracle.sld_answer_multiset(q, rep.answers) == oracle.answers(p, q, cap)
