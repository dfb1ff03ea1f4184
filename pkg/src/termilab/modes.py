"""Mode tables, simply/well-modedness, and simply-local substitutions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from termilab import core
from termilab.core import Clause, Program, Struct, Substitution, Var, vars_of
from termilab.measure import MissingMode

# Imaginary variable-free head used to treat a query as a clause.
QUERY_HEAD = Struct("$query")


class NotSimplyModed(ValueError):
    pass


class BodyTooLong(ValueError):
    pass


class ModeTable(dict):
    """Predicate key -> tuple of 'I'/'O'."""

    def spec(self, key: tuple[str, int]) -> tuple[str, ...]:
        if key == QUERY_HEAD.key:
            return ()
        try:
            return self[key]
        except KeyError:
            raise MissingMode(f"no mode for {key[0]}/{key[1]}") from None

    def inputs(self, a: Struct) -> tuple:
        return tuple(t for t, m in zip(a.args, self.spec(a.key)) if m == "I")

    def outputs(self, a: Struct) -> tuple:
        return tuple(t for t, m in zip(a.args, self.spec(a.key)) if m == "O")

    def input_positions(self, key) -> list[int]:
        """1-based input positions."""
        return [i + 1 for i, m in enumerate(self.spec(key)) if m == "I"]

    @classmethod
    def of(cls, modes) -> "ModeTable":
        return modes if isinstance(modes, ModeTable) else cls(modes or {})


@dataclass
class Verdict:
    ok: bool
    reason: str = ""
    clause_index: int | None = None
    atom: Struct | None = None
    position: int | None = None
    permutation: tuple | None = None
    permutations: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def _as_clause(x) -> Clause:
    if isinstance(x, Clause):
        return x
    return Clause(QUERY_HEAD, tuple(x))


def _vars(ts) -> set:
    return set(vars_of(ts))


# -- simply moded -------------------------------------------------------------

def _simply_moded_clause(c: Clause, m: ModeTable) -> Verdict:
    if not c.body:
        return Verdict(True)
    t0 = _vars(m.inputs(c.head))
    seen_out: set = set()
    s_upto: set = set()
    for i, b in enumerate(c.body, 1):
        s_upto |= _vars(m.inputs(b))
        spec = m.spec(b.key)
        for pos, (t, mode) in enumerate(zip(b.args, spec), 1):
            if mode != "O":
                continue
            if not isinstance(t, Var):
                return Verdict(False, f"output of {b} is not a variable", atom=b, position=pos)
            if t in seen_out:
                return Verdict(False, f"output variable {t} occurs twice", atom=b, position=pos)
            if t in t0:
                return Verdict(False, f"output variable {t} occurs in an input of the head", atom=b, position=pos)
            if t in s_upto:
                return Verdict(False, f"output variable {t} occurs in an earlier or same-atom input",
                               atom=b, position=pos)
            seen_out.add(t)
    return Verdict(True)


def _per_clause(x, m, fn) -> Verdict:
    m = ModeTable.of(m)
    if isinstance(x, Program):
        for ci, c in enumerate(x.clauses):
            v = fn(c, m)
            if not v:
                v.clause_index = ci
                return v
        return Verdict(True)
    return fn(_as_clause(x), m)


def check_simply_moded(x, m) -> Verdict:
    """Clause, query or program is simply moded; unit clauses always are."""
    return _per_clause(x, m, _simply_moded_clause)


# -- well moded -----------------------------------------------------------------

def _well_moded_clause(c: Clause, m: ModeTable) -> Verdict:
    produced = _vars(m.inputs(c.head))
    for b in c.body:
        need = _vars(m.inputs(b)) - produced
        if need:
            v = sorted(need, key=lambda x: x.name)[0]
            return Verdict(False, f"input variable {v} of {b} is not produced earlier", atom=b)
        produced |= _vars(m.outputs(b))
    if c.head != QUERY_HEAD:
        need = _vars(m.outputs(c.head)) - produced
        if need:
            v = sorted(need, key=lambda x: x.name)[0]
            return Verdict(False, f"output variable {v} of the head is not produced", atom=c.head)
    return Verdict(True)


def check_well_moded(x, m) -> Verdict:
    return _per_clause(x, m, _well_moded_clause)


# -- permutations -------------------------------------------------------------

def _perm_clause(c: Clause, m: ModeTable, base, limit: int) -> Verdict:
    n = len(c.body)
    if n > limit:
        raise BodyTooLong(f"body of length {n} exceeds the permutation limit {limit}")
    first_fail = None
    for perm in itertools.permutations(range(n)):
        v = base(Clause(c.head, tuple(c.body[i] for i in perm)), m)
        if v:
            return Verdict(True, permutation=perm)
        first_fail = first_fail or v
    first_fail.reason = "no permutation passes: " + first_fail.reason
    return first_fail


def check_permutation(x, m, which: str = "simply", limit: int = 8) -> Verdict:
    """Some reordering of each body passes the base check.

    Returns the lexicographically first passing permutation (as a tuple of
    body indices); for programs ``permutations`` maps clause index to it.
    """
    base = {"simply": _simply_moded_clause, "well": _well_moded_clause}[which]
    m = ModeTable.of(m)
    if isinstance(x, Program):
        perms = {}
        for ci, c in enumerate(x.clauses):
            v = _perm_clause(c, m, base, limit)
            if not v:
                v.clause_index = ci
                return v
            perms[ci] = v.permutation
        return Verdict(True, permutations=perms)
    return _perm_clause(_as_clause(x), m, base, limit)


def reorder_program(p: Program, m, which: str = "simply", limit: int = 8) -> Program:
    """Program with every body permuted to the first passing order."""
    v = check_permutation(p, m, which, limit)
    if not v:
        raise NotSimplyModed(v.reason)
    clauses = tuple(Clause(c.head, tuple(c.body[i] for i in v.permutations[ci]))
                    for ci, c in enumerate(p.clauses))
    return Program(clauses, p.modes)


# -- simply-local substitutions ----------------------------------------------

@dataclass
class SLDecomposition:
    sigmas: list  # Substitution per factor 0..n
    fresh: list   # set of fresh variables per factor


@dataclass
class SLResult:
    ok: bool
    decomposition: SLDecomposition | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _factors(c: Clause, m: ModeTable) -> tuple[list[list[Var]], list[tuple]]:
    """Domain vectors t_0..t_n (as ordered variable lists) and input vectors s_0..s_n."""
    ts = [list(vars_of(m.inputs(c.head)))]
    ss: list[tuple] = [()]
    for b in c.body:
        ts.append(list(vars_of(m.outputs(b))))
        ss.append(m.inputs(b))
    return ts, ss


def _require_simply_moded(c: Clause, m: ModeTable) -> None:
    v = _simply_moded_clause(c, m)
    if not v:
        raise NotSimplyModed(v.reason)


def is_simply_local(theta, c, m) -> SLResult:
    """Greedy factorisation: sigma_i is theta restricted to Vars(t_i).

    Exact for simply moded clauses, whose t_i are disjoint linear variable
    vectors that do not occur in earlier inputs.
    """
    m = ModeTable.of(m)
    c = _as_clause(c)
    _require_simply_moded(c, m)
    theta = theta if isinstance(theta, Substitution) else Substitution(theta)
    ts, ss = _factors(c, m)
    covered = set().union(*map(set, ts))
    extra = theta.domain - covered
    if extra:
        v = sorted(extra, key=lambda x: x.name)[0]
        return SLResult(False, reason=f"{v} is bound but is not in any t_i")
    cvars = set(vars_of(c))
    sigmas, fresh_sets = [], []
    used_fresh: set = set()
    acc = Substitution()
    for i, (t, s) in enumerate(zip(ts, ss)):
        sigma = theta.restrict(t)
        allowed = set(vars_of(core.apply(acc, s))) if i else set()
        fresh = sigma.range_vars - allowed
        bad = fresh & cvars
        if bad:
            v = sorted(bad, key=lambda x: x.name)[0]
            return SLResult(False, reason=f"factor {i} introduces clause variable {v}")
        if fresh & used_fresh:
            v = sorted(fresh & used_fresh, key=lambda x: x.name)[0]
            return SLResult(False, reason=f"fresh variable {v} is shared between factors")
        used_fresh |= fresh
        sigmas.append(sigma)
        fresh_sets.append(fresh)
        acc = acc.compose(sigma)
    return SLResult(True, SLDecomposition(sigmas, fresh_sets))


def _fresh_pool(i: int, pool: int, avoid: set) -> list[Var]:
    out = []
    j = 1
    while len(out) < pool:
        v = Var(f"_S{i}_{j}")
        if v not in avoid:
            out.append(v)
        j += 1
    return out


def _bind_vars(dom: Sequence[Var], budget: int, signature, leaves: list, fresh: list) -> Iterator[tuple[dict, int]]:
    """Bindings of ``dom`` (each var may stay unbound) with total size <= budget.

    Fresh variables are used in first-occurrence order so that bindings which
    differ only by a permutation of fresh names are produced once.
    """
    enum = core.TermEnumerator(signature, leaves=list(leaves) + list(fresh))
    consts, _ = core.split_signature(signature)
    dom = list(dom)
    if not dom:
        yield {}, 0
        return
    options_cache: dict[int, list] = {}

    def options(size: int):
        if size not in options_cache:
            opts = list(enum.of_size(size))
            options_cache[size] = opts
        return options_cache[size]

    fresh_index = {v: k for k, v in enumerate(fresh)}

    def canonical_fresh(binding: dict) -> bool:
        seen = -1
        for x in dom:
            t = binding.get(x)
            if t is None:
                continue
            for v in core.term_vars(t):
                k = fresh_index.get(v)
                if k is None:
                    continue
                if k > seen + 1:
                    return False
                seen = max(seen, k)
        return True

    for total in range(budget + 1):
        for parts in core._compositions(total, len(dom)):
            pools = []
            for x, p in zip(dom, parts):
                opts = options(p)
                pools.append(([None] + opts) if p == 0 else opts)
            for combo in itertools.product(*pools):
                binding = {x: t for x, t in zip(dom, combo) if t is not None}
                if fresh and not canonical_fresh(binding):
                    continue
                yield binding, total


def enumerate_simply_local(c, m, depth: int, pool: int, signature=None, *, restrict: Iterable[Var] | None = None,
                           upto: int | None = None, share: bool = True) -> Iterator[Substitution]:
    """Simply-local substitutions of bounded size.

    Factor sigma_i binds (a subset of) Vars(t_i) to terms over the signature
    whose leaves are constants, variables of s_i sigma_0..sigma_{i-1} (when
    ``share``) and at most ``pool`` fresh variables of its own. The total
    number of non-constant function symbols over all factors is at most
    ``depth``. ``restrict`` limits the domain; ``upto`` stops after factor
    ``upto`` (inclusive).
    """
    m = ModeTable.of(m)
    c = _as_clause(c)
    _require_simply_moded(c, m)
    sig = signature if signature is not None else core.signature_of(c)
    consts, _ = core.split_signature(sig)
    if not consts and not share and pool == 0:
        raise core.EmptyUniverse("no leaves for simply-local enumeration")
    ts, ss = _factors(c, m)
    last = len(ts) - 1 if upto is None else min(upto, len(ts) - 1)
    keep = None if restrict is None else set(restrict)
    cvars = set(vars_of(c))
    const_leaves = [Struct(k) for k in consts]

    def rec(i: int, acc: dict, budget: int) -> Iterator[dict]:
        if i > last:
            yield acc
            return
        dom = [x for x in ts[i] if keep is None or x in keep]
        shared = []
        if share and i > 0:
            shared = list(vars_of(core.apply(acc, ss[i])))
        fresh = _fresh_pool(i, pool, cvars)
        for binding, used in _bind_vars(dom, budget, sig, const_leaves + shared, fresh):
            nxt = dict(acc)
            nxt.update(binding)
            yield from rec(i + 1, nxt, budget - used)

    for b in rec(0, {}, depth):
        yield Substitution(b)


# -- simply moded atoms ---------------------------------------------------------

def simply_moded_atoms(key: tuple[str, int], m, depth: int, pool: int, signature) -> Iterator[Struct]:
    """Atoms whose outputs are distinct fresh variables and whose inputs have total size <= depth."""
    m = ModeTable.of(m)
    spec = m.spec(key)
    n_in = spec.count("I")
    pool_vars = [Var(f"_P{j}") for j in range(1, pool + 1)]
    consts, _ = core.split_signature(signature)
    outs = [Var(f"_O{j}") for j in range(len(spec) - n_in)]
    enum = core.TermEnumerator(signature, leaves=[Struct(k) for k in consts] + pool_vars)
    seen = set()
    for total in range(depth + 1):
        for parts in core._compositions(total, n_in):
            for combo in itertools.product(*[enum.of_size(p) for p in parts]):
                args, ii, oi = [], 0, 0
                for mode in spec:
                    if mode == "I":
                        args.append(combo[ii])
                        ii += 1
                    else:
                        args.append(outs[oi])
                        oi += 1
                a = core.canonical(Struct(key[0], tuple(args)))
                if a not in seen:
                    seen.add(a)
                    yield a
