"""Shared generators and independent reference implementations for the tests."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from termilab import core
from termilab.core import Clause, Struct, Substitution, Var
from termilab.corpus import corpus_dir, get_entry
from termilab.modes import ModeTable

CORPUS = corpus_dir()

SIG_CONSTS = ("a", "b", "0", "[]")
SIG_FUNCS = (("f", 1), ("s", 1), ("g", 2), (".", 2))


def entry(name):
    return get_entry(name)


def program(name):
    return get_entry(name).program()


def cert(name, which):
    return get_entry(name).certificate(which)


def corpus_path(name) -> Path:
    return CORPUS / name


# -- random terms ---------------------------------------------------------------

def random_term(rng: random.Random, vars_, depth: int, p_var: float = 0.5):
    """Random term of nesting depth <= ``depth``; ``p_var`` is the chance a leaf is a variable."""
    if depth <= 0 or rng.random() < 0.3:
        if vars_ and rng.random() < p_var:
            return rng.choice(vars_)
        return Struct(rng.choice(SIG_CONSTS))
    f, k = rng.choice(SIG_FUNCS)
    return Struct(f, tuple(random_term(rng, vars_, depth - 1, p_var) for _ in range(k)))


def generalise(rng: random.Random, t, names):
    """Replace random subterms of ``t`` by variables drawn from ``names``."""
    if rng.random() < 0.25:
        return rng.choice(names)
    if isinstance(t, Var) or not t.args:
        return t
    return Struct(t.functor, tuple(generalise(rng, a, names) for a in t.args))


def unifiable_pair(rng: random.Random):
    """(s, t, theta) with theta a unifier of s and t.

    Both sides generalise a common term ``u``; a variable reused for two
    different subterms makes the generalisation invalid, so such draws are
    retried.
    """
    left = [Var(f"X{i}") for i in range(3)]
    right = [Var(f"Y{i}") for i in range(3)]
    while True:
        u = random_term(rng, [Var("U1"), Var("U2")], 4)
        s = generalise(rng, u, left)
        t = generalise(rng, u, right)
        ms, mt = core.match(s, u), core.match(t, u)
        if ms is not None and mt is not None:
            ms.update(mt)
            return s, t, ms


def random_pair(rng: random.Random):
    vs = [Var("X"), Var("Y"), Var("Z"), Var("W")]
    return random_term(rng, vs, 3), random_term(rng, vs, 3)


# -- naive Robinson unification (reference) ----------------------------------------

def _subst(t, x, r):
    if isinstance(t, Var):
        return r if t == x else t
    return Struct(t.functor, tuple(_subst(a, x, r) for a in t.args))


def _occurs(x, t):
    if isinstance(t, Var):
        return t == x
    return any(_occurs(x, a) for a in t.args)


def naive_unify(s, t):
    """Martelli-Montanari on an explicit equation list; dict or None."""
    eqs = [(s, t)]
    sol: dict = {}
    while eqs:
        a, b = eqs.pop()
        if a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if _occurs(a, b):
                return None
            eqs = [(_subst(l, a, b), _subst(r, a, b)) for l, r in eqs]
            sol = {k: _subst(v, a, b) for k, v in sol.items()}
            sol[a] = b
            continue
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        eqs.extend(zip(a.args, b.args))
    return sol


def apply_naive(sol, t):
    if isinstance(t, Var):
        return sol.get(t, t)
    return Struct(t.functor, tuple(apply_naive(sol, a) for a in t.args))


# -- random simply moded clauses -------------------------------------------------

def random_simply_moded_clause(rng: random.Random):
    """(clause, mode table) with a simply moded clause of 1..3 body atoms."""
    counter = itertools.count()

    def fresh():
        return Var(f"V{next(counter)}")

    modes: dict = {}
    n_in, n_out = rng.randint(0, 2), rng.randint(0, 2)
    head_in_vars = [fresh() for _ in range(rng.randint(0, 2))]
    head_in = [random_term(rng, head_in_vars, 2) for _ in range(n_in)]
    seen = list(core.vars_of(head_in))
    body = []
    for i in range(rng.randint(1, 3)):
        bi, bo = rng.randint(0, 2), rng.randint(0, 2)
        extra = [fresh()] if rng.random() < 0.3 else []
        ins = [random_term(rng, seen + extra, 2) for _ in range(bi)]
        seen += [v for v in core.vars_of(ins) if v not in seen]
        outs = [fresh() for _ in range(bo)]
        seen += outs
        spec = ("I",) * bi + ("O",) * bo
        body.append(Struct(f"q{i}", tuple(ins + outs)))
        modes[(f"q{i}", bi + bo)] = spec
    head_out = [random_term(rng, seen, 2) for _ in range(n_out)]
    head = Struct("p", tuple(head_in + head_out))
    modes[("p", n_in + n_out)] = ("I",) * n_in + ("O",) * n_out
    return Clause(head, tuple(body)), ModeTable(modes)


def random_candidate_theta(rng: random.Random, c: Clause, m: ModeTable):
    """A substitution over the factor domains, simply-local or deliberately not."""
    ts = [list(core.vars_of(m.inputs(c.head)))] + [list(core.vars_of(m.outputs(b))) for b in c.body]
    ss = [()] + [m.inputs(b) for b in c.body]
    cvars = list(core.vars_of(c))
    fresh_pool = [Var(f"F{j}") for j in range(3)]
    theta: dict = {}
    for i, dom in enumerate(ts):
        avail = list(core.vars_of(core.apply(theta, ss[i]))) if i else []
        leaves = avail + fresh_pool[:2]
        if cvars and rng.random() < 0.15:
            leaves = leaves + [rng.choice(cvars)]
        for x in dom:
            if rng.random() < 0.6:
                theta[x] = random_term(rng, leaves, 2, p_var=0.7)
    # keep idempotent: clause variables in the range must not be bound elsewhere
    s = Substitution(theta)
    if not s.is_idempotent():
        return None
    return s


def brute_force_simply_local(theta: Substitution, c: Clause, m: ModeTable) -> bool:
    """Search every assignment of range variables to the factor introducing them."""
    ts = [list(core.vars_of(m.inputs(c.head)))] + [list(core.vars_of(m.outputs(b))) for b in c.body]
    ss = [()] + [m.inputs(b) for b in c.body]
    if not theta.domain <= set().union(*map(set, ts)):
        return False
    cvars = set(core.vars_of(c))
    sigmas = [theta.restrict(t) for t in ts]
    rvars = sorted(theta.range_vars, key=lambda v: v.name)
    for owners in itertools.product(range(-1, len(ts)), repeat=len(rvars)):
        own = dict(zip(rvars, owners))
        ok = True
        acc = Substitution()
        for i, sg in enumerate(sigmas):
            shared = set(core.vars_of(core.apply(acc, ss[i]))) if i else set()
            introduced = {v for v, o in own.items() if o == i}
            if introduced & cvars:
                ok = False
                break
            for v in sg.range_vars:
                if v in shared:
                    continue
                if own[v] != i:
                    ok = False
                    break
            if not ok:
                break
            acc = acc.compose(sg)
        if ok and acc == theta:
            return True
    return False


# -- corpus queries -------------------------------------------------------------

def corpus_atoms():
    """(entry, certificate name, certificate, atom) for every clause and query atom."""
    from termilab.corpus import list_entries

    out = []
    for e in list_entries():
        p = e.program()
        for name in e.certificate_files:
            ct = e.certificate(name)
            atoms = [a for c in p.clauses for a in c.atoms()]
            atoms += list(ct.query or ())
            seen = set()
            for a in atoms:
                key = core.canonical(a)
                if key in seen:
                    continue
                seen.add(key)
                out.append((e.name, name, ct, a))
    return out


def semi_ground_instances(a: Struct, sig, sizes=(0, 1)):
    """``a`` with every subset of its variables bound to the first ground term of each size."""
    enum = core.TermEnumerator(sig)
    vs = list(core.vars_of(a))
    picks = [enum.of_size(n)[0] for n in sizes if enum.of_size(n)]
    out = []
    for mask in itertools.product([None] + picks, repeat=len(vs)):
        theta = {v: t for v, t in zip(vs, mask) if t is not None}
        out.append(core.apply(theta, a))
    return out
