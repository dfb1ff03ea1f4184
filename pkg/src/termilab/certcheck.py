"""Bounded verification of the six decrease criteria.

Every check enumerates ground (or simply-local) instances up to an
enumeration bound ``d`` and reports either "verified up to d" or the first
counterexample found. Variables that no obligation can observe (positions
read by neither the level map nor the interpretation) are fixed to the
first constant of the signature; this keeps the enumeration small without
losing any obligation value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from termilab import core
from termilab.certificate import Certificate
from termilab.core import Clause, Program, Struct, Var
from termilab.measure import (
    DEFAULT_REGISTRY, INF, UNBOUNDED, Add, AllAtoms, Always, Const, InModel, Interpretation, LevelMap, Max, Min,
    ModelVerdict, Monus, Norm, NormConstraint, NotInModel, eval_level, gt_inf, holds, interp_is_trivial,
    interp_positions, is_moded_level_mapping, level_positions, symbolic_level,
)
from termilab.modes import (
    ModeTable, NotSimplyModed, _factors, check_permutation, check_simply_moded, enumerate_simply_local,
    reorder_program, simply_moded_atoms,
)
from termilab.parser import format_clause, format_query


class InfinityInRecurrence(ValueError):
    pass


class NotModedLevelMap(ValueError):
    pass


class NotAModel(Exception):
    def __init__(self, verdict: ModelVerdict):
        inst = format_clause(verdict.instance) if verdict.instance is not None else "?"
        super().__init__(f"interpretation is not a model: clause {verdict.clause_index + 1} instance {inst}")
        self.verdict = verdict


@dataclass
class CheckReport:
    cls: str
    verified: bool
    depth: int
    obligations: int = 0
    clause_index: int | None = None  # 0-based; None for query obligations
    instance: object = None
    obligation: str = ""
    k: int | None = None
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.verified

    def text(self) -> str:
        if self.verified:
            out = f"verdict VERIFIED depth={self.depth} obligations={self.obligations}"
            if self.k is not None:
                out += f" k={self.k}"
            return out
        where = "query" if self.clause_index is None else str(self.clause_index + 1)
        return f"verdict COUNTEREXAMPLE clause={where} instance={_show(self.instance)} obligation={self.obligation}"


def _show(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, Clause):
        return format_clause(x)
    if isinstance(x, Struct):
        return format_query((x,))
    return format_query(x)


# -- enumeration helpers ------------------------------------------------------------

def _signature(program: Program | None, sig=None, *extra) -> set:
    if sig is not None:
        return set(sig)
    return core.signature_of(program, *extra)


def _vars_at(a: Struct, positions: Iterable[int]) -> list[Var]:
    acc: dict = {}
    for i in sorted(positions):
        core.term_vars(a.args[i - 1], acc)
    return list(acc)


def _filler(sig) -> Struct:
    consts, _ = core.split_signature(sig)
    if not consts:
        raise core.EmptyUniverse("signature has no constant")
    return Struct(consts[0])


def pruned_substitutions(allvars: Sequence[Var], relevant: Iterable[Var], depth: int, sig, measure: str = "size",
                         enum: core.TermEnumerator | None = None) -> Iterator[dict]:
    """Ground substitutions varying only ``relevant``; the rest map to a fixed constant.

    Yielded in order of growing size, so a prefix covers every smaller bound.
    """
    rel = [v for v in allvars if v in set(relevant)]
    rest = [v for v in allvars if v not in set(rel)]
    fill = _filler(sig) if rest else None
    base = {v: fill for v in rest}
    for th in core.ground_substitutions(rel, depth, sig, measure, enum):
        out = dict(base)
        out.update(th)
        yield out


def _size_of(th: dict, measure: str) -> int:
    vals = [core.term_size(t) if measure == "size" else core.nesting_depth(t) for t in th.values()]
    if not vals:
        return 0
    return sum(vals) if measure == "size" else max(vals)


def _clause_relevant(c: Clause, lm: LevelMap, interp, level_atoms, interp_atoms) -> list[Var]:
    acc: dict = {}
    for a in level_atoms:
        for v in _vars_at(a, level_positions(lm, interp, a.key)):
            acc[v] = None
    for a in interp_atoms:
        for v in _vars_at(a, interp_positions(interp, a.key)):
            acc[v] = None
    return list(acc)


def check_model(interp: Interpretation, program: Program, depth: int, sig=None, measure: str = "size",
                registry=DEFAULT_REGISTRY) -> ModelVerdict:
    """Model condition over pruned ground instances (clauses with an ``all`` head are skipped)."""
    sig = _signature(program, sig)
    enum = core.TermEnumerator(sig)
    checked = 0
    for ci, c in enumerate(program.clauses):
        if interp_is_trivial(interp, c.head.key):
            continue
        rel = _clause_relevant(c, LevelMap(), interp, (), c.atoms())
        for th in pruned_substitutions(list(core.vars_of(c)), rel, depth, sig, measure, enum):
            inst = core.apply(th, c)
            checked += 1
            if all(holds(interp, b, registry) for b in inst.body) and not holds(interp, inst.head, registry):
                return ModelVerdict(False, depth, checked, ci, inst)
    return ModelVerdict(True, depth, checked)


def _require_model(interp, program, depth, sig, measure, registry) -> None:
    v = check_model(interp, program, depth, sig, measure, registry)
    if not v:
        raise NotAModel(v)


def _reject_infinity(lm: LevelMap, what: str) -> None:
    if lm.has_infinity():
        raise InfinityInRecurrence(f"{what} does not allow an infinite level")


# -- ground clause obligations -------------------------------------------------------

# An obligation function receives (head level, body levels, body truth values)
# lazily and returns (number of obligations checked, failing obligation or "").
Obligation = Callable[[Callable[[int], object], Callable[[int], bool], int], tuple]


def _run_ground(cls: str, program: Program, lm: LevelMap, interp, depth: int, sig, measure, registry,
                obligation: Obligation, uses_interp: bool) -> CheckReport:
    sig = _signature(program, sig)
    enum = core.TermEnumerator(sig)
    total = 0
    for ci, c in enumerate(program.clauses):
        if not c.body:
            continue
        rel = _clause_relevant(c, lm, interp, c.atoms(), c.body if uses_interp else ())
        for th in pruned_substitutions(list(core.vars_of(c)), rel, depth, sig, measure, enum):
            inst = core.apply(th, c)
            cache: dict = {}

            def level(i: int, inst=inst, cache=cache):
                # i = 0 is the head, i >= 1 the body atoms
                if i not in cache:
                    a = inst.head if i == 0 else inst.body[i - 1]
                    cache[i] = eval_level(lm, interp, a, registry)
                return cache[i]

            truth: dict = {}

            def true(i: int, inst=inst, truth=truth):
                if i not in truth:
                    truth[i] = holds(interp, inst.body[i - 1], registry)
                return truth[i]

            n, failed = obligation(level, true, len(c.body))
            total += n
            if failed:
                return CheckReport(cls, False, depth, total, ci, inst, failed)
    return CheckReport(cls, True, depth, total)


def _recurrent_ob(level, true, n):
    for i in range(1, n + 1):
        if not level(0) > level(i):
            return i, f"|A|>|B{i}|"
    return n, ""


def _acceptable_ob(level, true, n):
    done = 0
    for i in range(1, n + 1):
        if i > 1 and not true(i - 1):
            break
        done += 1
        if not gt_inf(level(0), level(i)):
            return done, f"|A|>|B{i}|"
    return done, ""


def _bounded_ob(level, true, n):
    if not all(true(i) for i in range(1, n + 1)):
        return 0, ""
    for i in range(1, n + 1):
        if not gt_inf(level(0), level(i)):
            return i, f"|A|>|B{i}|"
    return n, ""


def _fair_bounded_ob(level, true, n):
    false = [i for i in range(1, n + 1) if not true(i)]
    if not false:
        for i in range(1, n + 1):
            if not gt_inf(level(0), level(i)):
                return i, f"fair(a) |A|>|B{i}|"
        return n, ""
    if any(gt_inf(level(0), level(i)) for i in false):
        return 1, ""
    return 1, "fair(b)"


def check_recurrent(program: Program, lm: LevelMap, depth: int = 3, sig=None, measure: str = "size",
                    registry=DEFAULT_REGISTRY) -> CheckReport:
    _reject_infinity(lm, "recurrence")
    return _run_ground("recurrent", program, lm, None, depth, sig, measure, registry, _recurrent_ob, False)


def check_acceptable(program: Program, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                     measure: str = "size", registry=DEFAULT_REGISTRY) -> CheckReport:
    _require_model(interp, program, depth, sig, measure, registry)
    return _run_ground("acceptable", program, lm, interp, depth, sig, measure, registry, _acceptable_ob, True)


def check_bounded(program: Program, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                  measure: str = "size", registry=DEFAULT_REGISTRY) -> CheckReport:
    _require_model(interp, program, depth, sig, measure, registry)
    return _run_ground("bounded", program, lm, interp, depth, sig, measure, registry, _bounded_ob, True)


def check_fair_bounded(program: Program, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                       measure: str = "size", registry=DEFAULT_REGISTRY) -> CheckReport:
    _require_model(interp, program, depth, sig, measure, registry)
    return _run_ground("fair-bounded", program, lm, interp, depth, sig, measure, registry, _fair_bounded_ob, True)


# -- query obligations ---------------------------------------------------------------

def _req_recurrent(levels, truths):
    return 1 + max(levels)


def _req_acceptable(levels, truths):
    r = 0
    for i, lv in enumerate(levels):
        if i and not truths[i - 1]:
            break
        r = max(r, INF if lv is INF else lv + 1)
    return r


def _req_bounded(levels, truths):
    if not all(truths):
        return 0
    return INF if INF in levels else 1 + max(levels)


def _req_fair_bounded(levels, truths):
    if all(truths):
        return INF if INF in levels else 1 + max(levels)
    return min(INF if lv is INF else lv + 1 for lv, t in zip(levels, truths) if not t)


def _query_check(cls: str, query, lm: LevelMap, interp, depth: int, sig, measure: str, registry, requirement,
                 program: Program | None = None) -> CheckReport:
    query = tuple(query)
    if not query:
        return CheckReport(cls, True, depth, 0, k=0)
    sig = _signature(program, sig, query)
    sym = [symbolic_level(lm, a, interp, registry) for a in query]
    qvars = list(core.vars_of(query))
    rel: dict = {}
    for a in query:
        for v in _vars_at(a, level_positions(lm, interp, a.key) | interp_positions(interp, a.key)):
            rel[v] = None
    best_by_size: dict[int, int] = {}
    argmax: dict[int, int] = {}
    count = 0
    for th in pruned_substitutions(qvars, list(rel), depth, sig, measure):
        inst = core.apply(th, query)
        count += 1
        levels = [eval_level(lm, interp, a, registry) for a in inst]
        truths = [holds(interp, a, registry) for a in inst] if interp is not None else [True] * len(inst)
        r = requirement(levels, truths)
        if r is INF:
            return CheckReport(cls, False, depth, count, None, inst, "query-infinite-level")
        s = _size_of({v: th[v] for v in rel}, measure)
        if r > best_by_size.get(s, -1):
            best_by_size[s] = r
            finite = [lv for lv in levels if lv is not INF]
            argmax[s] = levels.index(max(finite)) if finite else 0
    k_at = []
    running = 0
    for s in range(depth + 1):
        running = max(running, best_by_size.get(s, 0))
        k_at.append(running)
    k_enum = k_at[-1]
    report = CheckReport(cls, True, depth, count, k=k_enum)
    if all(s is not UNBOUNDED for s in sym):
        k_sym = 1 + max(s.k for s in sym)
        if qvars and k_sym > k_enum and requirement is _req_recurrent:
            report.k = k_sym
        elif qvars:
            report.notes.append(f"symbolic bound {k_sym}")
        return report
    report.notes.append(f"k verified up to depth {depth}")
    if depth >= 2 and all(k_at[j] < k_at[j + 1] for j in range(1, depth)):
        top = max(best_by_size, key=lambda s: (best_by_size[s], -s))
        if sym[argmax[top]] is UNBOUNDED:
            inst = query
            return CheckReport(cls, False, depth, count, None, inst, "query-bound-diverges", k=None,
                               notes=[f"k grows with the bound: {k_at[1:]}"])
    return report


def check_recurrent_query(query, lm: LevelMap, depth: int = 3, sig=None, measure: str = "size",
                          registry=DEFAULT_REGISTRY, program: Program | None = None) -> CheckReport:
    return _query_check("recurrent", query, lm, None, depth, sig, measure, registry, _req_recurrent, program)


def check_acceptable_query(query, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                           measure: str = "size", registry=DEFAULT_REGISTRY,
                           program: Program | None = None) -> CheckReport:
    return _query_check("acceptable", query, lm, interp, depth, sig, measure, registry, _req_acceptable, program)


def check_bounded_query(query, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                        measure: str = "size", registry=DEFAULT_REGISTRY,
                        program: Program | None = None) -> CheckReport:
    return _query_check("bounded", query, lm, interp, depth, sig, measure, registry, _req_bounded, program)


def check_fair_bounded_query(query, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                             measure: str = "size", registry=DEFAULT_REGISTRY,
                             program: Program | None = None) -> CheckReport:
    return _query_check("fair-bounded", query, lm, interp, depth, sig, measure, registry, _req_fair_bounded,
                        program)


# -- mutual recursion ------------------------------------------------------------------

def mutually_recursive(program: Program) -> dict:
    """Predicate key -> SCC id of the dependency graph (same id iff mutually recursive)."""
    succ: dict = {k: set() for k in program.predicates()}
    for c in program.clauses:
        for b in c.body:
            succ.setdefault(c.head.key, set()).add(b.key)
            succ.setdefault(b.key, set())
    index: dict = {}
    low: dict = {}
    on: set = set()
    stack: list = []
    comp: dict = {}
    counter = itertools.count()
    ncomp = itertools.count()

    def strong(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        for w in sorted(succ[v]):
            if w not in index:
                strong(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            cid = next(ncomp)
            while True:
                w = stack.pop()
                on.discard(w)
                comp[w] = cid
                if w == v:
                    break

    for v in sorted(succ):
        if v not in index:
            strong(v)
    return comp


def same_scc(program: Program, p, q) -> bool:
    comp = mutually_recursive(program)
    return comp.get(p) == comp.get(q)


# -- simply-acceptability --------------------------------------------------------------

def _prepare_moded(program: Program, modes) -> Program:
    m = ModeTable.of(modes)
    if check_simply_moded(program, m):
        return program
    if check_permutation(program, m):
        return reorder_program(program, m)
    raise NotSimplyModed(check_simply_moded(program, m).reason)


def _sl_relevant(c: Clause, lm: LevelMap | None, interp, i: int) -> list[Var]:
    """Variables observable by the obligation for body atom ``i`` (1-based)."""
    acc: dict = {}
    if lm is not None:
        for a in (c.head, c.body[i - 1]):
            for v in _vars_at(a, level_positions(lm, interp, a.key)):
                acc[v] = None
    for a in c.body[:i - 1]:
        for v in _vars_at(a, interp_positions(interp, a.key)):
            acc[v] = None
    return list(acc)


_STRUCTURAL = ("termsize", "listlen", "listmax")
_LEAF = Struct("$leaf")


def _structural_expr(e) -> bool:
    if isinstance(e, Const):
        return True
    if isinstance(e, Norm):
        return e.kind in _STRUCTURAL
    if isinstance(e, (Add, Monus)):
        return _structural_expr(e.left) and _structural_expr(e.right)
    if isinstance(e, (Max, Min)):
        return all(_structural_expr(x) for x in e.items)
    return False


def leaf_blind(lm: LevelMap | None, interp: Interpretation | None) -> bool:
    """True if levels and membership ignore which constant or variable sits at a leaf.

    Then a simply-local substitution can be replaced by one with the same
    term shapes and a single kind of leaf without changing any obligation.
    """
    if interp is not None:
        for c in interp.clauses:
            if isinstance(c, AllAtoms):
                continue
            if not isinstance(c, NormConstraint):
                return False
            if not all(_structural_expr(x.left) and _structural_expr(x.right) for x in c.relation):
                return False
    if lm is not None:
        for rules in lm.rules.values():
            for r in rules:
                if not isinstance(r.guard, (Always, InModel, NotInModel)):
                    return False
                if r.value is INF or not _structural_expr(r.value):
                    return False
    return True


def _freshen(t, names: Iterator[Var]):
    if t == _LEAF:
        return next(names)
    if isinstance(t, Var) or not t.args:
        return t
    return Struct(t.functor, tuple(_freshen(a, names) for a in t.args))


def _shape_substitutions(c: Clause, m: ModeTable, depth: int, sig, restrict, upto: int | None = None):
    """Simply-local substitutions up to leaf identity: every leaf is a distinct fresh variable."""
    ts, _ = _factors(c, m)
    last = len(ts) - 1 if upto is None else min(upto, len(ts) - 1)
    keep = set(restrict)
    dom: dict = {}
    for t in ts[:last + 1]:
        for v in t:
            if v in keep:
                dom[v] = None
    _, funcs = core.split_signature(sig)
    enum = core.TermEnumerator(funcs, leaves=[_LEAF])
    cvars = {v.name for v in core.vars_of(c)}
    for th in core.ground_substitutions(list(dom), depth, None, "size", enum):
        names = (Var(n) for n in (f"_F{j}" for j in itertools.count(1)) if n not in cvars)
        yield core.Substitution({v: _freshen(t, names) for v, t in th.items() if t != _LEAF})


def _sl_family(c, m, depth, pool, sig, restrict, upto, lm, interp, collapse=True):
    if collapse and leaf_blind(lm, interp):
        return _shape_substitutions(c, m, depth, sig, restrict, upto)
    return enumerate_simply_local(c, m, depth, pool, sig, restrict=restrict, upto=upto, share=False)


def check_simply_local_model(interp: Interpretation, program: Program, modes, depth: int = 2, pool: int = 2,
                             sig=None, registry=DEFAULT_REGISTRY, collapse: bool = True) -> CheckReport:
    """If B1..Bn theta are in I then H theta is in I, for enumerated simply-local theta."""
    m = ModeTable.of(modes)
    program = _prepare_moded(program, m)
    sig = _signature(program, sig)
    total = 0
    for ci, c in enumerate(program.clauses):
        if interp_is_trivial(interp, c.head.key):
            continue
        acc: dict = {}
        for a in c.atoms():
            for v in _vars_at(a, interp_positions(interp, a.key)):
                acc[v] = None
        for th in _sl_family(c, m, depth, pool, sig, list(acc), None, None, interp, collapse):
            inst = core.apply(th, c)
            total += 1
            if all(holds(interp, b, registry) for b in inst.body) and not holds(interp, inst.head, registry):
                return CheckReport("simply-local-model", False, depth, total, ci, inst, "model")
    return CheckReport("simply-local-model", True, depth, total)


def check_simply_acceptable(program: Program, modes, lm: LevelMap, interp: Interpretation | None = None,
                            depth: int = 3, pool: int = 2, sig=None, registry=DEFAULT_REGISTRY,
                            check_model_first: bool = True, collapse: bool = True) -> CheckReport:
    """Decrease on mutually recursive body atoms under simply-local substitutions.

    Levels of non-ground atoms are generalised (variables weigh 0); since
    the level map is moded, only the instantiated input parts matter.
    """
    _reject_infinity(lm, "simply-acceptability")
    m = ModeTable.of(modes)
    program = _prepare_moded(program, m)
    if not is_moded_level_mapping(lm, m):
        raise NotModedLevelMap("level map reads a non-input position")
    interp = interp if interp is not None else Interpretation.everything(program)
    sig = _signature(program, sig)
    notes = []
    if check_model_first:
        mv = check_simply_local_model(interp, program, m, depth, pool, sig, registry, collapse)
        if not mv:
            raise NotAModel(ModelVerdict(False, depth, mv.obligations, mv.clause_index, mv.instance))
        notes.append(f"simply-local model checked ({mv.obligations} instances)")
    comp = mutually_recursive(program)
    total = 0
    for ci, c in enumerate(program.clauses):
        for i, b in enumerate(c.body, 1):
            if comp[c.head.key] != comp[b.key]:
                continue
            rel = _sl_relevant(c, lm, interp, i)
            for th in _sl_family(c, m, depth, pool, sig, rel, i - 1, lm, interp, collapse):
                inst = core.apply(th, c)
                if not all(holds(interp, a, registry) for a in inst.body[:i - 1]):
                    continue
                total += 1
                if not eval_level(lm, interp, inst.head, registry) > eval_level(lm, interp, inst.body[i - 1],
                                                                                   registry):
                    return CheckReport("simply-acceptable", False, depth, total, ci, inst, f"|A|>|B{i}|")
    return CheckReport("simply-acceptable", True, depth, total, notes=notes)


def compute_sl_model_bounded(program: Program, modes, depth: int = 2, pool: int = 2, sig=None,
                             max_iterations: int = 50) -> tuple[set, int]:
    """Bounded approximation of the least simply-local model containing the simply moded atoms.

    Atoms are kept in canonical form (membership is up to variable renaming);
    heads whose arguments exceed ``depth`` function symbols are discarded.
    Returns the atom set and the number of iterations until the fixpoint.
    """
    m = ModeTable.of(modes)
    program = _prepare_moded(program, m)
    sig = _signature(program, sig)
    atoms: set = set()
    for key in program.predicates():
        atoms |= set(simply_moded_atoms(key, m, depth, pool, sig))
    thetas = {ci: list(enumerate_simply_local(c, m, depth, pool, sig)) for ci, c in enumerate(program.clauses)}
    for it in range(1, max_iterations + 1):
        new = set()
        for ci, c in enumerate(program.clauses):
            for th in thetas[ci]:
                inst = core.apply(th, c)
                h = core.canonical(inst.head)
                if h in atoms or h in new or sum(core.term_size(t) for t in h.args) > depth:
                    continue
                if all(core.canonical(b) in atoms for b in inst.body):
                    new.add(h)
        if not new:
            return atoms, it
        atoms |= new
    return atoms, max_iterations


def in_sl_model(atoms: set, a: Struct) -> bool:
    return core.canonical(a) in atoms


# -- covers and delay-recurrence ---------------------------------------------------------

def _is_direct_cover(c: Clause, b_index: int, subset: Iterable[int], lm: LevelMap, registry=DEFAULT_REGISTRY) -> bool:
    rigid = set(core.vars_of(c.head))
    for j in subset:
        rigid |= set(core.vars_of(c.body[j]))
    return symbolic_level(lm, c.body[b_index], None, registry, rigid) is not UNBOUNDED


def direct_covers(c: Clause, b_index: int, lm: LevelMap, registry=DEFAULT_REGISTRY) -> list[frozenset]:
    """Minimal direct covers of body atom ``b_index`` (0-based) as sets of body indices."""
    others = [j for j in range(len(c.body)) if j != b_index]
    found: list[frozenset] = []
    for size in range(len(others) + 1):
        for sub in itertools.combinations(others, size):
            s = frozenset(sub)
            if any(f <= s for f in found):
                continue
            if _is_direct_cover(c, b_index, s, lm, registry):
                found.append(s)
    return found


def covers(c: Clause, lm: LevelMap, registry=DEFAULT_REGISTRY) -> dict[int, list[frozenset]]:
    """Body index -> its covers (least fixpoint of the closure rules, then minimality pruning)."""
    n = len(c.body)
    direct = {j: direct_covers(c, j, lm, registry) for j in range(n)}
    closure: set = set()
    for j in range(n):
        if frozenset() in direct[j]:
            closure.add((j, frozenset()))
    changed = True
    while changed:
        changed = False
        for j in range(n):
            for d in direct[j]:
                if not d:
                    continue
                members = sorted(d)
                options = [[cv for (x, cv) in closure if x == k] for k in members]
                for choice in itertools.product(*options):
                    cover = frozenset(d).union(*choice)
                    if j in cover or (j, cover) in closure:
                        continue
                    closure.add((j, cover))
                    changed = True
    out: dict[int, list[frozenset]] = {j: [] for j in range(n)}
    for j, cv in closure:
        if not any(x == j and other < cv for x, other in closure):
            out[j].append(cv)
    for j in out:
        out[j].sort(key=lambda s: (len(s), sorted(s)))
    return out


def check_delay_recurrent(program: Program, lm: LevelMap, interp: Interpretation, depth: int = 3, sig=None,
                          measure: str = "size", registry=DEFAULT_REGISTRY) -> CheckReport:
    _reject_infinity(lm, "delay-recurrence")
    _require_model(interp, program, depth, sig, measure, registry)
    sig = _signature(program, sig)
    enum = core.TermEnumerator(sig)
    total = 0
    for ci, c in enumerate(program.clauses):
        if not c.body:
            continue
        cov = covers(c, lm, registry)
        allvars = list(core.vars_of(c))
        for j, b in enumerate(c.body):
            for cv in cov[j]:
                cover_atoms = [c.body[x] for x in sorted(cv)]
                rel = _clause_relevant(c, lm, interp, (c.head, b), cover_atoms)
                for th in pruned_substitutions(allvars, rel, depth, sig, measure, enum):
                    inst = core.apply(th, c)
                    if not all(holds(interp, inst.body[x], registry) for x in cv):
                        continue
                    total += 1
                    if not eval_level(lm, interp, inst.head, registry) > eval_level(lm, interp, inst.body[j],
                                                                                       registry):
                        name = "|A|>|B%d| cover={%s}" % (j + 1, ",".join(f"B{x + 1}" for x in sorted(cv)))
                        return CheckReport("delay-recurrent", False, depth, total, ci, inst, name)
    return CheckReport("delay-recurrent", True, depth, total)


# -- certificates and the hierarchy -----------------------------------------------------

CHAIN = ("recurrent", "acceptable", "fair-bounded", "bounded")


def _interp_or_all(cert: Certificate, program: Program) -> Interpretation:
    if cert.interpretation is None or not cert.interpretation.clauses:
        return Interpretation.everything(program)
    return cert.interpretation


def check_certificate(program: Program, cert: Certificate, query=None, depth: int | None = None,
                      registry=DEFAULT_REGISTRY) -> CheckReport:
    """Program obligations of the certificate's class, then the query's (if any)."""
    d = cert.depth if depth is None else depth
    cls = cert.cls
    sig = cert.signature
    if sig is None and query:
        sig = core.signature_of(program, query)
    query = query if query is not None else cert.query
    interp = cert.interpretation
    lm = cert.levelmap
    if cls == "recurrent":
        rep = check_recurrent(program, lm, d, sig, cert.measure, registry)
        qfn = lambda: check_recurrent_query(query, lm, d, sig, cert.measure, registry, program)  # noqa: E731
    elif cls in ("acceptable", "bounded", "fair-bounded"):
        interp = _interp_or_all(cert, program)
        fn = {"acceptable": check_acceptable, "bounded": check_bounded, "fair-bounded": check_fair_bounded}[cls]
        qf = {"acceptable": check_acceptable_query, "bounded": check_bounded_query,
              "fair-bounded": check_fair_bounded_query}[cls]
        rep = fn(program, lm, interp, d, sig, cert.measure, registry)
        qfn = lambda: qf(query, lm, interp, d, sig, cert.measure, registry, program)  # noqa: E731
    elif cls == "simply-acceptable":
        modes = cert.modes or program.modes
        if not modes:
            raise ValueError("a simply-acceptability certificate needs modes")
        interp = _interp_or_all(cert, program)
        return check_simply_acceptable(program, modes, lm, interp, d, cert.pool, sig, registry)
    elif cls == "delay-recurrent":
        interp = _interp_or_all(cert, program)
        return check_delay_recurrent(program, lm, interp, d, sig, cert.measure, registry)
    else:
        raise ValueError(f"unknown class {cls!r}")
    if not rep or not query:
        return rep
    qrep = qfn()
    qrep.obligations += rep.obligations
    if qrep and cert.querybound is not None and qrep.k is not None and qrep.k > cert.querybound:
        return CheckReport(cls, False, d, qrep.obligations, None, query, f"declared-querybound<{qrep.k}")
    return qrep


def check_hierarchy(program: Program, cert: Certificate, query=None, depth: int | None = None,
                    registry=DEFAULT_REGISTRY) -> dict[str, CheckReport]:
    """Re-run the classes below the certificate's own in the implication chain.

    Only recurrent -> acceptable -> fair-bounded -> bounded is followed, with
    the same level map and the certificate's model (``all`` if none).
    """
    if cert.cls not in CHAIN:
        return {}
    out: dict[str, CheckReport] = {}
    for cls in CHAIN[CHAIN.index(cert.cls) + 1:]:
        sub = Certificate(cls, cert.levelmap, _interp_or_all(cert, program), cert.modes, cert.depth, cert.pool,
                          cert.measure, cert.signature, cert.query, None, list(cert.guards))
        out[cls] = check_certificate(program, sub, query, depth, registry)
    return out
