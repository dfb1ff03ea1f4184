"""Norms, level mappings into N-infinity, and Herbrand interpretations.

Level mappings are per-predicate lists of guarded rules; each rule maps an
atom to a :class:`NormExpr` (or to :data:`INF`). The first rule whose guard
holds fires.

Norm evaluation follows the generalised-norm convention: a variable
contributes 0 to ``termsize``, ends a list for ``listlen`` and has list-max 0.
On ground atoms this is the ordinary norm. :func:`symbolic_level` is the
separate boundedness analysis over non-ground atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from termilab import core
from termilab.core import NIL, Program, Struct, Var, is_ground, numeral_value


class UnknownGuard(LookupError):
    pass


class UnknownNorm(LookupError):
    pass


class MissingLevel(LookupError):
    pass


class MissingMode(LookupError):
    pass


# -- N-infinity ----------------------------------------------------------------

class Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INF"

    __str__ = lambda self: "inf"  # noqa: E731

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()
NInf = Union[int, Infinity]


def gt_inf(n: NInf, m: NInf) -> bool:
    """n |> m  iff  n is infinite or n > m."""
    if n is INF:
        return True
    if m is INF:
        return False
    return n > m


def ge_inf(n: NInf, m: NInf) -> bool:
    return n == m or gt_inf(n, m)


# -- symbolic results -------------------------------------------------------

@dataclass(frozen=True)
class Finite:
    k: int


class _Unbounded:
    def __repr__(self):
        return "Unbounded"


UNBOUNDED = _Unbounded()
Symbolic = Union[Finite, _Unbounded]


# -- guard registry ---------------------------------------------------------

@dataclass
class Guard:
    name: str
    fn: Callable[..., object]
    kind: str = "bool"  # "bool" or "card"
    arity: int | None = None


def _list_items(t) -> tuple[list, object]:
    items = []
    while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def _arcs(e) -> list[tuple] | None:
    items, tail = _list_items(e)
    if tail != NIL:
        return None
    arcs = []
    for x in items:
        if not (isinstance(x, Struct) and x.functor == "arc" and x.arity == 2):
            return None
        arcs.append(x.args)
    return arcs


def _successors(arcs) -> dict:
    succ: dict = {}
    for a, b in arcs:
        succ.setdefault(a, set()).add(b)
    return succ


def _reach(x, succ) -> set:
    seen: set = set()
    stack = list(succ.get(x, ()))
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(succ.get(v, ()))
    return seen


def is_dag(e) -> bool:
    """``e`` is a nil-terminated list of ``arc(x,y)`` terms without cycles."""
    arcs = _arcs(e)
    if arcs is None:
        return False
    succ = _successors(arcs)
    return all(v not in _reach(v, succ) for v in succ)


def reach_count(x, e) -> int:
    """Card{v | x reaches v in e by one or more arcs}; 0 if e is not an arc list."""
    arcs = _arcs(e)
    if arcs is None:
        return 0
    return len(_reach(x, _successors(arcs)))


def in_list(x, e) -> bool:
    items, _ = _list_items(e)
    return x in items


def _even_nat(t) -> bool:
    n = numeral_value(t)
    return n is not None and n % 2 == 0


def _odd_nat(t) -> bool:
    n = numeral_value(t)
    return n is not None and n % 2 == 1


class GuardRegistry:
    def __init__(self, guards: Iterable[Guard] = ()):
        self.guards: dict[str, Guard] = {}
        for g in guards:
            self.register(g)

    def register(self, g: Guard) -> None:
        self.guards[g.name] = g

    def get(self, name: str) -> Guard:
        try:
            return self.guards[name]
        except KeyError:
            raise UnknownGuard(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.guards


def default_registry() -> GuardRegistry:
    return GuardRegistry([
        Guard("is_dag", is_dag, "bool", 1),
        Guard("in_list", in_list, "bool", 2),
        Guard("reach_count", reach_count, "card", 2),
        Guard("is_nat", lambda t: numeral_value(t) is not None, "bool", 1),
        Guard("is_even_nat", _even_nat, "bool", 1),
        Guard("is_odd_nat", _odd_nat, "bool", 1),
    ])


DEFAULT_REGISTRY = default_registry()


# -- norm expressions -----------------------------------------------------------

BUILTIN_NORMS = ("termsize", "listlen", "listmax")
NORM_ALIASES = {"size": "termsize", "lmax": "listmax", "len": "listlen"}


@dataclass(frozen=True)
class Const:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class Norm:
    """A norm applied to argument positions (1-based)."""
    kind: str
    args: tuple

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Add:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} + {_paren(self.right)}"


@dataclass(frozen=True)
class Monus:
    """Saturating subtraction."""
    left: object
    right: object

    def __str__(self):
        return f"{self.left} - {_paren(self.right)}"


@dataclass(frozen=True)
class Max:
    items: tuple

    def __str__(self):
        return f"max({', '.join(map(str, self.items))})"


@dataclass(frozen=True)
class Min:
    items: tuple

    def __str__(self):
        return f"min({', '.join(map(str, self.items))})"


NormExpr = Union[Const, Norm, Add, Monus, Max, Min]


def _paren(e) -> str:
    return f"({e})" if isinstance(e, (Add, Monus)) else str(e)


def norm_positions(e) -> set[int]:
    if isinstance(e, Norm):
        return set(e.args)
    if isinstance(e, (Add, Monus)):
        return norm_positions(e.left) | norm_positions(e.right)
    if isinstance(e, (Max, Min)):
        out: set[int] = set()
        for x in e.items:
            out |= norm_positions(x)
        return out
    return set()


# -- concrete norms ---------------------------------------------------------------

def termsize(t) -> int:
    return core.term_size(t)


def listlen(t) -> int:
    n = 0
    while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
        n += 1
        t = t.args[1]
    return n


def listmax(t) -> int:
    best = 0
    while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
        best = max(best, core.term_size(t.args[0]))
        t = t.args[1]
    return best


_NORM_FNS = {"termsize": termsize, "listlen": listlen, "listmax": listmax}


def eval_norm(e, a: Struct, registry: GuardRegistry = DEFAULT_REGISTRY) -> int:
    """Structural evaluation of a norm expression on an atom."""
    if isinstance(e, Const):
        return e.n
    if isinstance(e, Norm):
        fn = _NORM_FNS.get(e.kind)
        if fn is not None:
            return fn(a.args[e.args[0] - 1])
        g = registry.get(e.kind)
        args = [a.args[i - 1] for i in e.args]
        # card norms are defined on ground tuples; generalised value 0 otherwise
        if not all(is_ground(x) for x in args):
            return 0
        return int(g.fn(*args))
    if isinstance(e, Add):
        return eval_norm(e.left, a, registry) + eval_norm(e.right, a, registry)
    if isinstance(e, Monus):
        return max(eval_norm(e.left, a, registry) - eval_norm(e.right, a, registry), 0)
    if isinstance(e, Max):
        return max(eval_norm(x, a, registry) for x in e.items)
    if isinstance(e, Min):
        return min(eval_norm(x, a, registry) for x in e.items)
    raise TypeError(f"not a norm expression: {e!r}")


# -- guards and level maps ----------------------------------------------------------

@dataclass(frozen=True)
class Always:
    def __str__(self):
        return ""


@dataclass(frozen=True)
class InModel:
    def __str__(self):
        return "in_model"


@dataclass(frozen=True)
class NotInModel:
    def __str__(self):
        return "not in_model"


@dataclass(frozen=True)
class SemGuard:
    name: str
    args: tuple
    negated: bool = False

    def __str__(self):
        s = f"{self.name}({','.join(map(str, self.args))})"
        return f"not {s}" if self.negated else s


@dataclass(frozen=True)
class LevelRule:
    guard: object
    value: object  # NormExpr or INF


@dataclass
class LevelMap:
    rules: dict = field(default_factory=dict)  # (pred, arity) -> list[LevelRule]

    def add(self, key: tuple[str, int], rule: LevelRule) -> None:
        self.rules.setdefault(key, []).append(rule)

    def rules_for(self, key: tuple[str, int]) -> list[LevelRule]:
        try:
            return self.rules[key]
        except KeyError:
            raise MissingLevel(f"no level rule for {key[0]}/{key[1]}") from None

    def has_infinity(self) -> bool:
        return any(r.value is INF for rs in self.rules.values() for r in rs)

    def covers(self, program: Program) -> list[tuple[str, int]]:
        """Predicates of ``program`` lacking a rule."""
        return [k for k in program.predicates() if k not in self.rules]

    @classmethod
    def simple(cls, table: dict) -> "LevelMap":
        lm = cls()
        for key, expr in table.items():
            lm.add(key, LevelRule(Always(), expr))
        return lm


def _guard_holds(g, a: Struct, interp, registry) -> bool:
    if isinstance(g, Always):
        return True
    if isinstance(g, (InModel, NotInModel)):
        if interp is None:
            raise ValueError("model guard used without an interpretation")
        h = holds(interp, a, registry)
        return h if isinstance(g, InModel) else not h
    if isinstance(g, SemGuard):
        args = [a.args[i - 1] for i in g.args]
        # semantic guards only hold on ground argument tuples
        r = all(is_ground(x) for x in args) and bool(registry.get(g.name).fn(*args))
        return not r if g.negated else r
    raise TypeError(g)


def eval_level(lm: LevelMap, interp, a: Struct, registry: GuardRegistry = DEFAULT_REGISTRY) -> NInf:
    """Level of an atom: the first rule whose guard holds.

    On non-ground atoms this is the generalised level (variables weigh 0).
    """
    for rule in lm.rules_for(a.key):
        if _guard_holds(rule.guard, a, interp, registry):
            return INF if rule.value is INF else eval_norm(rule.value, a, registry)
    raise MissingLevel(f"no level rule fires for {a}")


# -- symbolic boundedness ---------------------------------------------------------

def _free(t, rigid) -> bool:
    """True if ``t`` contains a variable not in ``rigid``."""
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if x not in rigid:
                return True
        else:
            stack.extend(x.args)
    return False


def _sym_norm(kind: str, t, rigid) -> Symbolic:
    if kind == "termsize":
        return UNBOUNDED if _free(t, rigid) else Finite(termsize(t))
    if kind == "listlen":
        n = 0
        while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
            n += 1
            t = t.args[1]
        return UNBOUNDED if isinstance(t, Var) and t not in rigid else Finite(n)
    if kind == "listmax":
        best = 0
        while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
            if _free(t.args[0], rigid):
                return UNBOUNDED
            best = max(best, termsize(t.args[0]))
            t = t.args[1]
        return UNBOUNDED if isinstance(t, Var) and t not in rigid else Finite(best)
    raise UnknownNorm(kind)


def _sym_expr(e, a: Struct, rigid, registry) -> Symbolic:
    if isinstance(e, Const):
        return Finite(e.n)
    if isinstance(e, Norm):
        if e.kind in _NORM_FNS:
            return _sym_norm(e.kind, a.args[e.args[0] - 1], rigid)
        args = [a.args[i - 1] for i in e.args]
        if all(is_ground(x) for x in args):
            return Finite(int(registry.get(e.kind).fn(*args)))
        return UNBOUNDED
    if isinstance(e, Add):
        l, r = _sym_expr(e.left, a, rigid, registry), _sym_expr(e.right, a, rigid, registry)
        if l is UNBOUNDED or r is UNBOUNDED:
            return UNBOUNDED
        return Finite(l.k + r.k)
    if isinstance(e, Monus):
        l, r = _sym_expr(e.left, a, rigid, registry), _sym_expr(e.right, a, rigid, registry)
        if l is UNBOUNDED:
            return UNBOUNDED
        return Finite(l.k if r is UNBOUNDED else max(l.k - r.k, 0))
    if isinstance(e, Max):
        vals = [_sym_expr(x, a, rigid, registry) for x in e.items]
        if any(v is UNBOUNDED for v in vals):
            return UNBOUNDED
        return Finite(max(v.k for v in vals))
    if isinstance(e, Min):
        vals = [_sym_expr(x, a, rigid, registry) for x in e.items]
        fin = [v.k for v in vals if v is not UNBOUNDED]
        return Finite(min(fin)) if fin else UNBOUNDED
    raise TypeError(e)


def _guard_decided(g, a: Struct, interp, registry, rigid) -> bool | None:
    """Truth of a guard on a possibly non-ground atom, or None if undetermined."""
    if isinstance(g, Always):
        return True
    if isinstance(g, SemGuard):
        args = [a.args[i - 1] for i in g.args]
        if all(is_ground(x) for x in args):
            r = bool(registry.get(g.name).fn(*args))
            return not r if g.negated else r
        return None
    if isinstance(g, (InModel, NotInModel)):
        if interp is not None and is_ground(a):
            h = holds(interp, a, registry)
            return h if isinstance(g, InModel) else not h
        return None
    raise TypeError(g)


def symbolic_level(lm: LevelMap, a: Struct, interp=None, registry: GuardRegistry = DEFAULT_REGISTRY,
                   rigid: Iterable[Var] = ()) -> Symbolic:
    """Upper bound on the level of every ground instance of ``a``.

    Variables in ``rigid`` are treated as already instantiated (to a
    size-0 term), which is what the direct-cover test needs. Rules whose
    guard cannot be decided contribute pessimistically (max over branches).
    """
    rigid = frozenset(rigid)
    branches: list[Symbolic] = []
    for rule in lm.rules_for(a.key):
        d = _guard_decided(rule.guard, a, interp, registry, rigid)
        if d is False:
            continue
        branches.append(UNBOUNDED if rule.value is INF else _sym_expr(rule.value, a, rigid, registry))
        if d is True:
            break
    if not branches or any(b is UNBOUNDED for b in branches):
        return UNBOUNDED
    return Finite(max(b.k for b in branches))


def is_bounded_atom(lm: LevelMap, a: Struct, interp=None, registry: GuardRegistry = DEFAULT_REGISTRY,
                    rigid: Iterable[Var] = ()) -> tuple[bool, int | None]:
    """(bounded?, k) where k exceeds the level of every ground instance."""
    s = symbolic_level(lm, a, interp, registry, rigid)
    if s is UNBOUNDED:
        return False, None
    return True, s.k + 1


def unbounded_witness(lm: LevelMap, a: Struct, depths: Sequence[int], signature,
                      interp=None, registry: GuardRegistry = DEFAULT_REGISTRY, measure: str = "size") -> list[NInf]:
    """Max level of the ground instances of ``a`` for each enumeration bound."""
    out = []
    for d in depths:
        best: NInf = 0
        for g in core.ground_instances(a, d, signature, measure):
            v = eval_level(lm, interp, g, registry)
            if v is INF:
                best = INF
                break
            best = max(best, v)
        out.append(best)
    return out


# -- interpretations -------------------------------------------------------

@dataclass(frozen=True)
class AllAtoms:
    pred: tuple

    def __str__(self):
        return "all"


@dataclass(frozen=True)
class Extensional:
    pred: tuple
    atoms: frozenset

    def __str__(self):
        from termilab.parser import format_atom

        return "{" + ", ".join(sorted(format_atom(x) for x in self.atoms)) + "}"


@dataclass(frozen=True)
class Comparison:
    left: object
    op: str
    right: object

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


_OPS = {
    "=": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
}
OP_ALIASES = {"==": "=", "=<": "<="}


@dataclass(frozen=True)
class NormConstraint:
    pred: tuple
    relation: tuple  # conjunction of Comparison

    def __str__(self):
        return "constraint " + " and ".join(map(str, self.relation))


@dataclass(frozen=True)
class GuardedAtoms:
    pred: tuple
    guard: SemGuard

    def __str__(self):
        return f"guard {self.guard}"


@dataclass
class Interpretation:
    """Union of decidable atom-set descriptions; closed world."""
    clauses: list = field(default_factory=list)

    def add(self, c) -> None:
        self.clauses.append(c)

    def for_pred(self, key) -> list:
        return [c for c in self.clauses if c.pred == key]

    @classmethod
    def everything(cls, program: Program) -> "Interpretation":
        return cls([AllAtoms(k) for k in program.predicates()])


def holds(interp: Interpretation, a: Struct, registry: GuardRegistry = DEFAULT_REGISTRY) -> bool:
    """I |= a. Non-ground atoms are accepted only by ``all`` and constraint clauses."""
    ground = None
    for c in interp.clauses:
        if c.pred != a.key:
            continue
        if isinstance(c, AllAtoms):
            return True
        if isinstance(c, NormConstraint):
            if all(_OPS[cmp.op](eval_norm(cmp.left, a, registry), eval_norm(cmp.right, a, registry))
                   for cmp in c.relation):
                return True
        elif isinstance(c, Extensional):
            if a in c.atoms:
                return True
        elif isinstance(c, GuardedAtoms):
            if ground is None:
                ground = is_ground(a)
            if ground and _guard_holds(c.guard, a, None, registry):
                return True
        else:
            raise TypeError(c)
    return False


def holds_all(interp: Interpretation, atoms: Iterable[Struct], registry: GuardRegistry = DEFAULT_REGISTRY) -> bool:
    return all(holds(interp, a, registry) for a in atoms)


@dataclass
class ModelVerdict:
    ok: bool
    depth: int
    checked: int = 0
    clause_index: int | None = None
    instance: object = None

    def __bool__(self):
        return self.ok


def is_model(interp: Interpretation, program: Program, depth: int, signature=None,
             registry: GuardRegistry = DEFAULT_REGISTRY, measure: str = "size") -> ModelVerdict:
    """Model condition on every ground clause instance within the bound."""
    sig = signature if signature is not None else core.signature_of(program)
    checked = 0
    for ci, c in enumerate(program.clauses):
        for inst in core.ground_instances(c, depth, sig, measure):
            checked += 1
            if holds_all(interp, inst.body, registry) and not holds(interp, inst.head, registry):
                return ModelVerdict(False, depth, checked, ci, inst)
    return ModelVerdict(True, depth, checked)


# -- mode-related level map properties -------------------------------------------

def _guard_positions(g) -> set[int] | None:
    """Argument positions a guard reads; None if it reads the whole atom."""
    if isinstance(g, Always):
        return set()
    if isinstance(g, SemGuard):
        return set(g.args)
    return None


def is_moded_level_mapping(lm: LevelMap, modes) -> bool:
    """Every rule reads only input positions of its predicate."""
    for key, rules in lm.rules.items():
        if key not in modes:
            raise MissingMode(f"no mode for {key[0]}/{key[1]}")
        inputs = {i + 1 for i, m in enumerate(modes[key]) if m == "I"}
        for r in rules:
            gp = _guard_positions(r.guard)
            if gp is None or not gp <= inputs:
                return False
            if r.value is not INF and not norm_positions(r.value) <= inputs:
                return False
    return True


def forced_ground(e) -> set[int]:
    """Positions whose groundness is implied by boundedness of ``e``."""
    if isinstance(e, Norm):
        return set(e.args) if e.kind == "termsize" else set()
    if isinstance(e, Add):
        return forced_ground(e.left) | forced_ground(e.right)
    if isinstance(e, Max):
        out: set[int] = set()
        for x in e.items:
            out |= forced_ground(x)
        return out
    if isinstance(e, Min):
        sets = [forced_ground(x) for x in e.items]
        return set.intersection(*sets) if sets else set()
    return set()


def implies_matching_sufficient(lm: LevelMap, modes, program: Program) -> bool:
    """Sufficient test that bounded atoms match every unifiable clause head.

    An input position is safe if boundedness forces it ground, or if every
    clause head of the predicate carries there a variable occurring nowhere
    else among the head's input arguments.
    """
    for key in program.predicates():
        if key not in modes:
            raise MissingMode(f"no mode for {key[0]}/{key[1]}")
        inputs = [i for i, m in enumerate(modes[key]) if m == "I"]
        if not inputs:
            continue
        finite_rules = [r for r in lm.rules_for(key) if r.value is not INF]
        if not finite_rules:
            continue
        forced = set.intersection(*[forced_ground(r.value) for r in finite_rules])
        heads = [c.head for _, c in program.defining(key)]
        for i in inputs:
            if i + 1 in forced:
                continue
            for h in heads:
                t = h.args[i]
                if not isinstance(t, Var):
                    return False
                others = [h.args[j] for j in inputs if j != i]
                if any(core.occurs(t, o) for o in others):
                    return False
    return True


# -- positions read (used to prune enumerations) -------------------------------

def interp_positions(interp: Interpretation | None, key: tuple[str, int]) -> set[int]:
    """1-based argument positions on which membership in ``interp`` depends."""
    if interp is None:
        return set()
    out: set[int] = set()
    for c in interp.for_pred(key):
        if isinstance(c, NormConstraint):
            for cmp in c.relation:
                out |= norm_positions(cmp.left) | norm_positions(cmp.right)
        elif isinstance(c, Extensional):
            out |= set(range(1, key[1] + 1))
        elif isinstance(c, GuardedAtoms):
            out |= set(c.guard.args)
    return out


def interp_is_trivial(interp: Interpretation | None, key: tuple[str, int]) -> bool:
    return interp is not None and any(isinstance(c, AllAtoms) for c in interp.for_pred(key))


def level_positions(lm: LevelMap, interp: Interpretation | None, key: tuple[str, int]) -> set[int]:
    """Positions on which the level of a ``key`` atom depends."""
    out: set[int] = set()
    for r in lm.rules_for(key):
        gp = _guard_positions(r.guard)
        out |= interp_positions(interp, key) if gp is None else gp
        if r.value is not INF:
            out |= norm_positions(r.value)
    return out
