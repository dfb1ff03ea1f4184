"""The depth-counter transformation Ter and its refutation-preservation harness.

``Ter(P)`` adds one argument to every predicate. A non-unit clause threads a
fresh depth variable ``D``: the head gets ``s(D)`` and every body atom ``D``.
A unit clause gets a fresh singleton variable, printed ``_``. ``Ter(Q, k)``
appends the numeral ``s^k(0)`` to every query atom.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from termilab import core, engine, oracle
from termilab.core import Clause, Program, Struct, Var


class BudgetInsufficientForOriginal(RuntimeError):
    pass


@dataclass
class TerProgram:
    program: Program
    mapping: dict  # original key -> extended key


def _fresh_var(c: Clause, base: str) -> Var:
    names = {v.name for v in core.vars_of(c)}
    if base not in names:
        return Var(base)
    j = 1
    while f"{base}{j}" in names:
        j += 1
    return Var(f"{base}{j}")


def _extend(a: Struct, extra) -> Struct:
    return Struct(a.functor, a.args + (extra,))


def ter_clause(c: Clause) -> Clause:
    if not c.body:
        return Clause(_extend(c.head, _fresh_var(c, "_D")))
    d = _fresh_var(c, "D")
    return Clause(_extend(c.head, Struct("s", (d,))), tuple(_extend(b, d) for b in c.body))


def ter_modes(program: Program) -> dict:
    """Modes of Ter(P): the original modes (all outputs if absent) plus an input counter."""
    out = {}
    for key in program.predicates():
        spec = tuple(program.modes[key]) if program.modes and key in program.modes else ("O",) * key[1]
        out[(key[0], key[1] + 1)] = spec + ("I",)
    return out


def ter_program(program: Program) -> TerProgram:
    clauses = tuple(ter_clause(c) for c in program.clauses)
    mapping = {k: (k[0], k[1] + 1) for k in program.predicates()}
    return TerProgram(Program(clauses, ter_modes(program)), mapping)


def ter_query(query: Sequence[Struct], k: int) -> tuple:
    if k < 0:
        raise ValueError("the depth bound must be a natural number")
    n = core.numeral(k)
    return tuple(_extend(a, n) for a in query)


def erase_depth(a: Struct) -> Struct:
    return Struct(a.functor, a.args[:-1])


@dataclass
class BijectionReport:
    ok: bool
    k: int
    original: Counter
    transformed: Counter
    source: str                      # "sld" or "oracle"
    runs: dict = field(default_factory=dict)  # (n, rule) -> RunReport
    problems: list = field(default_factory=list)

    def summary(self) -> str:
        head = "bijection OK" if self.ok else "bijection FAILED"
        lines = [f"{head} k={self.k} source={self.source} original={len(self.original)} "
                 f"transformed={len(self.transformed)}"]
        for (n, rule), rep in sorted(self.runs.items()):
            lines.append(f"  Ter(Q,{n}) {rep.summary()}")
        lines += [f"  problem: {p}" for p in self.problems]
        return "\n".join(lines)


def depth_arguments(k: int) -> list[int]:
    return sorted({0, max(k - 1, 0), k + 2})


def verify_bijection(program: Program, query: Sequence[Struct], k: int, depth_budget: int = engine.DEFAULT_DEPTH,
                     node_budget: int = engine.DEFAULT_NODES, rules: Sequence | None = None,
                     oracle_cap: int = 8) -> BijectionReport:
    """Compare the answers of (P, Q) with those of Ter(P), Ter(Q, k-1) under LD.

    The transformed runs must be finite for every rule and every depth
    argument in {0, k-1, k+2}. When the original LD tree exceeds the budget
    its answers come from the bottom-up oracle instead.
    """
    query = tuple(query)
    tp = ter_program(program)
    rules = list(rules) if rules is not None else [engine.LD(), engine.RD()]
    report = BijectionReport(True, k, Counter(), Counter(), "sld")
    for n in depth_arguments(k):
        tq = ter_query(query, n)
        for r in rules:
            rep = engine.run(tp.program, tq, r, depth_budget=depth_budget, node_budget=node_budget)
            report.runs[(n, r.name)] = rep
            if not rep.finite:
                report.ok = False
                report.problems.append(f"Ter(Q,{n}) under {r.name} hit the budget")
    orig = engine.run(program, query, engine.LD(), depth_budget=depth_budget, node_budget=node_budget)
    if orig.finite:
        report.original = oracle.sld_answer_multiset(query, orig.answers)
    else:
        try:
            report.original = oracle.answers(program, query, oracle_cap)
        except oracle.OracleDiverged as exc:
            raise BudgetInsufficientForOriginal(str(exc)) from None
        report.source = "oracle"
    ter = engine.run(tp.program, ter_query(query, max(k - 1, 0)), engine.LD(),
                     depth_budget=depth_budget, node_budget=node_budget)
    report.transformed = oracle.sld_answer_multiset(query, ter.answers)
    if report.source == "oracle":
        # the oracle yields each answer once per derivation of the fixpoint atoms;
        # compare supports and require the transformed side to be duplicate-free
        if set(report.original) != set(report.transformed):
            report.ok = False
            report.problems.append("answer sets differ")
        if any(v > 1 for v in report.transformed.values()):
            report.ok = False
            report.problems.append("duplicate answers on the transformed side")
    elif report.original != report.transformed:
        report.ok = False
        report.problems.append("answer multisets differ")
    return report
