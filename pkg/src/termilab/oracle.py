"""Bottom-up reference semantics used to cross-check the SLD engine.

The fixpoint is computed on non-ground atoms (computed-answer semantics):
clause bodies are joined against renamed copies of the atoms found so far,
and derived heads are kept up to variable renaming. Each atom carries the
number of distinct derivations producing it, so query answers come out as
a multiset. Atoms whose arguments exceed ``cap`` function symbols are
dropped; the oracle is therefore exact only for queries whose refutations
stay within the cap.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from termilab import core
from termilab.core import Clause, FreshNames, NoUnifier, Program, Struct, Substitution


class OracleDiverged(RuntimeError):
    pass


def atom_size(a: Struct) -> int:
    return sum(core.term_size(t) for t in a.args)


@dataclass
class Fixpoint:
    counts: dict          # canonical atom -> number of derivations
    iterations: int
    cap: int

    def atoms(self, key=None) -> list:
        return [a for a in self.counts if key is None or a.key == key]


def _join(atoms: Sequence[Struct], facts: dict, by_key: dict, fresh: FreshNames, avoid: set):
    """Yield (unifier, multiplicity) for all ways of matching ``atoms`` against ``facts``."""
    def rec(i: int, bind: dict, mult: int):
        if i == len(atoms):
            yield bind, mult
            return
        goal = atoms[i]
        for f in by_key.get(goal.key, ()):
            renamed = core.rename_apart(Clause(f), avoid, fresh).head
            try:
                nb = core.unify_into([(goal, renamed)], dict(bind))
            except NoUnifier:
                continue
            yield from rec(i + 1, nb, mult * facts[f])

    yield from rec(0, {}, 1)


def least_model(program: Program, cap: int = 6, max_iterations: int = 200) -> Fixpoint:
    """Naive iteration of the counting consequence operator up to the size cap."""
    counts: dict = {}
    for it in range(1, max_iterations + 1):
        by_key: dict = {}
        for a in counts:
            by_key.setdefault(a.key, []).append(a)
        new: Counter = Counter()
        for c in program.clauses:
            fresh = FreshNames(1)
            avoid = set(core.vars_of(c))
            for bind, mult in _join(c.body, counts, by_key, fresh, avoid):
                head = core.canonical(core.apply(core.solved_form(bind), c.head))
                if atom_size(head) <= cap:
                    new[head] += mult
        if dict(new) == counts:
            return Fixpoint(counts, it, cap)
        counts = dict(new)
    raise OracleDiverged(f"no fixpoint within {max_iterations} iterations")


def answers(program: Program, query: Sequence[Struct], cap: int = 6, model: Fixpoint | None = None) -> Counter:
    """Multiset of computed answers (canonical text of the query-variable bindings)."""
    model = model or least_model(program, cap)
    by_key: dict = {}
    for a in model.counts:
        by_key.setdefault(a.key, []).append(a)
    qvars = list(core.vars_of(query))
    out: Counter = Counter()
    avoid = set(qvars)
    for bind, mult in _join(tuple(query), model.counts, by_key, FreshNames(1), avoid):
        s = core.solved_form(bind)
        out[answer_key(qvars, [core.apply(s, v) for v in qvars])] += mult
    return out


def answer_key(qvars, terms) -> str:
    """Canonical text of an answer, identical for answers equal up to renaming."""
    from termilab.parser import format_term

    t = core.canonical(Struct("ans", tuple(terms)), prefix="_A")
    return ", ".join(f"{v.name}={format_term(x)}" for v, x in zip(qvars, t.args))


def sld_answer_multiset(query: Sequence[Struct], subs: Sequence[Substitution]) -> Counter:
    qvars = list(core.vars_of(query))
    return Counter(answer_key(qvars, [core.apply(s, v) for v in qvars]) for s in subs)
