"""First-order terms, substitutions, unification and ground enumeration.

Atoms are represented as :class:`Struct` values whose functor is the
predicate symbol; queries are tuples of atoms.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union


class NoUnifier(Exception):
    """Raised when two terms have no unifier (occurs check included)."""


class EmptyUniverse(ValueError):
    """Raised when a signature has no constant to build ground terms from."""


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True, eq=False)
class Struct:
    functor: str
    args: tuple = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    ground: bool = field(default=True, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.functor, self.args)))
        object.__setattr__(self, "ground", all(type(a) is Struct and a.ground for a in self.args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not Struct or self._hash != other._hash:
            return False
        return self.functor == other.functor and self.args == other.args

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.functor, len(self.args))

    def __str__(self) -> str:
        from termilab.parser import format_term

        return format_term(self)


Term = Union[Var, Struct]
Atom = Struct
Query = tuple


@dataclass(frozen=True)
class Clause:
    head: Struct
    body: tuple = ()

    @property
    def is_unit(self) -> bool:
        return not self.body

    def atoms(self) -> tuple:
        return (self.head,) + self.body

    def __str__(self) -> str:
        from termilab.parser import format_clause

        return format_clause(self)


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    modes: Mapping | None = None

    def predicates(self) -> list[tuple[str, int]]:
        seen: dict[tuple[str, int], None] = {}
        for c in self.clauses:
            for a in c.atoms():
                seen.setdefault(a.key, None)
        return list(seen)

    def defining(self, key: tuple[str, int]) -> list[tuple[int, Clause]]:
        """Clauses (with 0-based program index) whose head has predicate ``key``."""
        return [(i, c) for i, c in enumerate(self.clauses) if c.head.key == key]

    def functors(self) -> set[tuple[str, int]]:
        out: set[tuple[str, int]] = set()
        for c in self.clauses:
            for a in c.atoms():
                for t in a.args:
                    out |= term_functors(t)
        return out

    def __str__(self) -> str:
        from termilab.parser import format_program

        return format_program(self)


# -- constructors ----------------------------------------------------------

NIL = Struct("[]")
ZERO = Struct("0")


def cons(head: Term, tail: Term) -> Struct:
    return Struct(".", (head, tail))


def make_list(items: Sequence[Term], tail: Term = NIL) -> Term:
    out = tail
    for x in reversed(items):
        out = cons(x, out)
    return out


def numeral(n: int, base: Term = ZERO) -> Term:
    """s^n(base)."""
    t = base
    for _ in range(n):
        t = Struct("s", (t,))
    return t


def numeral_value(t: Term) -> int | None:
    n = 0
    while isinstance(t, Struct) and t.functor == "s" and t.arity == 1:
        n += 1
        t = t.args[0]
    if t == ZERO:
        return n
    return None


# -- inspection -------------------------------------------------------------

def term_vars(t: Term, acc: dict | None = None) -> dict:
    """Variables of ``t`` in order of first occurrence (dict used as ordered set)."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            acc.setdefault(x, None)
        elif not x.ground:
            stack.extend(reversed(x.args))
    return acc


def vars_of(*items) -> dict:
    acc: dict = {}
    for it in items:
        if isinstance(it, (Var, Struct)):
            term_vars(it, acc)
        elif isinstance(it, Clause):
            for a in it.atoms():
                term_vars(a, acc)
        else:
            for x in it:
                acc.update(vars_of(x))
    return acc


def is_ground(t: Term) -> bool:
    return not isinstance(t, Var) and t.ground


def term_functors(t: Term) -> set[tuple[str, int]]:
    out = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Struct):
            out.add(x.key)
            stack.extend(x.args)
    return out


def nesting_depth(t: Term) -> int:
    """Maximum nesting of compounds; constants and variables have depth 0."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(nesting_depth(a) for a in t.args)


def term_size(t: Term) -> int:
    """Number of non-constant function symbols (variables count 0)."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + sum(term_size(a) for a in t.args)


def occurs(v: Var, t: Term) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if x == v:
            return True
        if isinstance(x, Struct):
            stack.extend(x.args)
    return False


# -- substitutions --------------------------------------------------------------

class Substitution:
    """Finite idempotent map from variables to terms."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Mapping[Var, Term] | None = None):
        b = {} if bindings is None else {k: v for k, v in bindings.items() if k != v}
        self.bindings: dict[Var, Term] = b

    def __contains__(self, v: Var) -> bool:
        return v in self.bindings

    def __getitem__(self, v: Var) -> Term:
        return self.bindings[v]

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def items(self):
        return self.bindings.items()

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self.bindings == other.bindings
        if isinstance(other, dict):
            return self.bindings == other
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.bindings.items()))

    def __repr__(self) -> str:
        return f"Substitution({self})"

    def __str__(self) -> str:
        from termilab.parser import format_substitution

        return format_substitution(self)

    @property
    def domain(self) -> set[Var]:
        return set(self.bindings)

    @property
    def range_vars(self) -> set[Var]:
        acc: dict = {}
        for t in self.bindings.values():
            term_vars(t, acc)
        return set(acc)

    def is_idempotent(self) -> bool:
        return not (self.domain & self.range_vars)

    def __call__(self, x):
        return apply(self, x)

    def compose(self, other: "Substitution") -> "Substitution":
        """``self`` followed by ``other``: x(self.compose(other)) = (x self) other."""
        out = {k: apply(other, v) for k, v in self.bindings.items()}
        for k, v in other.bindings.items():
            out.setdefault(k, v)
        return Substitution(out)

    def restrict(self, vs: Iterable[Var]) -> "Substitution":
        keep = set(vs)
        return Substitution({k: v for k, v in self.bindings.items() if k in keep})


def _apply_term(b: Mapping[Var, Term], t: Term) -> Term:
    if isinstance(t, Var):
        return b.get(t, t)
    if t.ground:
        return t
    new = tuple(_apply_term(b, a) for a in t.args)
    if all(x is y for x, y in zip(new, t.args)):
        return t
    return Struct(t.functor, new)


def apply(s: Substitution | Mapping, x):
    """Simultaneous replacement on a term, atom, clause, or sequence of those."""
    b = s.bindings if isinstance(s, Substitution) else s
    if not b:
        return x
    if isinstance(x, (Var, Struct)):
        return _apply_term(b, x)
    if isinstance(x, Clause):
        return Clause(_apply_term(b, x.head), tuple(_apply_term(b, a) for a in x.body))
    return tuple(apply(s, y) for y in x)


# -- unification -------------------------------------------------------------

def _walk(t: Term, b: dict) -> Term:
    while isinstance(t, Var) and t in b:
        t = b[t]
    return t


def _occurs_walk(v: Var, t: Term, b: dict) -> bool:
    stack = [t]
    while stack:
        x = _walk(stack.pop(), b)
        if x is v or x == v:
            return True
        if isinstance(x, Struct) and not x.ground:
            stack.extend(x.args)
    return False


def unify_into(pairs: Iterable[tuple[Term, Term]], b: dict) -> dict:
    """Extend the triangular binding map ``b`` so that every pair unifies.

    When both sides are variables, or only the right-hand side is, the
    right-hand variable is bound. This makes clause-head variables (passed on
    the right by the engine) the ones that get bound whenever possible.
    """
    stack = list(pairs)
    stack.reverse()
    while stack:
        x, y = stack.pop()
        x = _walk(x, b)
        y = _walk(y, b)
        if x == y:
            continue
        if isinstance(y, Var):
            if _occurs_walk(y, x, b):
                raise NoUnifier(f"occurs check: {y} in {x}")
            b[y] = x
        elif isinstance(x, Var):
            if _occurs_walk(x, y, b):
                raise NoUnifier(f"occurs check: {x} in {y}")
            b[x] = y
        else:
            if x.functor != y.functor or len(x.args) != len(y.args):
                raise NoUnifier(f"clash: {x.functor}/{len(x.args)} vs {y.functor}/{len(y.args)}")
            stack.extend(reversed(list(zip(x.args, y.args))))
    return b


def _resolve(t: Term, b: dict) -> Term:
    t = _walk(t, b)
    if isinstance(t, Var) or t.ground:
        return t
    new = tuple(_resolve(a, b) for a in t.args)
    if all(x is y for x, y in zip(new, t.args)):
        return t
    return Struct(t.functor, new)


def solved_form(b: dict) -> Substitution:
    return Substitution({v: _resolve(t, b) for v, t in b.items()})


def mgu(a: Term, b: Term) -> Substitution:
    """Idempotent most general unifier of ``a`` and ``b``; raises :class:`NoUnifier`."""
    return solved_form(unify_into([(a, b)], {}))


def unifiable(a: Term, b: Term) -> bool:
    try:
        unify_into([(a, b)], {})
    except NoUnifier:
        return False
    return True


def match(pattern: Term, t: Term, b: dict | None = None) -> dict | None:
    """One-way matching: a map m with pattern m == t, or None."""
    b = {} if b is None else b
    stack = [(pattern, t)]
    while stack:
        p, x = stack.pop()
        if isinstance(p, Var):
            if p in b:
                if b[p] != x:
                    return None
            else:
                b[p] = x
        elif isinstance(x, Var) or p.functor != x.functor or len(p.args) != len(x.args):
            return None
        else:
            stack.extend(zip(p.args, x.args))
    return b


def is_instance_of(t: Term, pattern: Term) -> bool:
    return match(pattern, t) is not None


def variant_of(a, b) -> bool:
    """True iff ``a`` and ``b`` are equal up to a bijective variable renaming."""
    fwd: dict = {}
    bwd: dict = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if isinstance(x, Var) or isinstance(y, Var):
            if not (isinstance(x, Var) and isinstance(y, Var)):
                return False
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
        elif isinstance(x, Struct) and isinstance(y, Struct):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        else:
            if len(x) != len(y):
                return False
            stack.extend(zip(x, y))
    return True


def canonical(x, prefix: str = "_V"):
    """Rename variables of ``x`` by order of first occurrence; equal iff variants."""
    vs = vars_of(x)
    ren = {v: Var(f"{prefix}{i}") for i, v in enumerate(vs)}
    return apply(ren, x)


# -- renaming ----------------------------------------------------------------

_TRAILING_DIGITS = re.compile(r"\d+$")


class FreshNames:
    """Deterministic counter of fresh variable names."""

    def __init__(self, start: int = 1):
        self.next = start

    def fresh(self, base: str, avoid) -> Var:
        stem = _TRAILING_DIGITS.sub("", base) or "V"
        while True:
            v = Var(f"{stem}{self.next}")
            self.next += 1
            if v not in avoid:
                return v

    def copy(self) -> "FreshNames":
        return FreshNames(self.next)


def rename_apart(c: Clause, avoid: Iterable[Var] = (), fresh: FreshNames | None = None) -> Clause:
    """Variant of ``c`` sharing no variable with ``avoid``."""
    fresh = FreshNames() if fresh is None else fresh
    avoid = set(avoid)
    cvars = vars_of(c)
    blocked = avoid | set(cvars)
    ren = {}
    for v in cvars:
        nv = fresh.fresh(v.name, blocked)
        blocked.add(nv)
        ren[v] = nv
    return apply(ren, c)


# -- ground enumeration ---------------------------------------------------------

def split_signature(signature: Iterable[tuple[str, int]]):
    consts = sorted(f for f, n in signature if n == 0)
    funcs = sorted((f, n) for f, n in signature if n > 0)
    return consts, funcs


class TermEnumerator:
    """Ground (or leaf-extended) terms by exact size, memoised.

    ``leaves`` are size-0 terms (constants, and optionally variables).
    """

    def __init__(self, signature: Iterable[tuple[str, int]], leaves: Sequence[Term] | None = None):
        consts, funcs = split_signature(signature)
        self.funcs = funcs
        self.leaves = list(leaves) if leaves is not None else [Struct(c) for c in consts]
        self._by_size: dict[int, list[Term]] = {0: list(self.leaves)}

    def of_size(self, n: int) -> list[Term]:
        if n in self._by_size:
            return self._by_size[n]
        out: list[Term] = []
        for f, k in self.funcs:
            for parts in _compositions(n - 1, k):
                pools = [self.of_size(p) for p in parts]
                for args in itertools.product(*pools):
                    out.append(Struct(f, tuple(args)))
        self._by_size[n] = out
        return out

    def of_depth(self, d: int) -> list[Term]:
        """All terms with nesting depth <= d."""
        level = list(self.leaves)
        for _ in range(d):
            nxt = list(self.leaves)
            for f, k in self.funcs:
                for args in itertools.product(level, repeat=k):
                    nxt.append(Struct(f, tuple(args)))
            level = nxt
        return level


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered k-tuples of naturals summing to n."""
    if k == 0:
        if n == 0:
            yield ()
        return
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def ground_substitutions(vs: Sequence[Var], depth: int, signature, measure: str = "size",
                         enum: TermEnumerator | None = None) -> Iterator[dict]:
    """Ground substitutions for ``vs`` within the bound.

    ``measure="size"``: the substituted terms contain at most ``depth``
    non-constant function symbols in total.
    ``measure="nesting"``: every substituted term has nesting depth <= ``depth``.
    """
    vs = list(vs)
    if not vs:
        yield {}
        return
    enum = enum or TermEnumerator(signature)
    if not enum.leaves:
        raise EmptyUniverse("signature has no constant")
    if measure == "nesting":
        pool = enum.of_depth(depth)
        for combo in itertools.product(pool, repeat=len(vs)):
            yield dict(zip(vs, combo))
        return
    if measure != "size":
        raise ValueError(f"unknown measure {measure!r}")
    for total in range(depth + 1):
        for parts in _compositions(total, len(vs)):
            pools = [enum.of_size(p) for p in parts]
            if any(not p for p in pools):
                continue
            for combo in itertools.product(*pools):
                yield dict(zip(vs, combo))


def ground_instances(c, depth: int, signature, measure: str = "size") -> Iterator:
    """All ground instances of a clause/atom/query within the enumeration bound.

    Deterministic order (by growing size), duplicate-free.
    """
    vs = list(vars_of(c))
    for theta in ground_substitutions(vs, depth, signature, measure):
        yield apply(theta, c)


def signature_of(*items) -> set[tuple[str, int]]:
    out: set[tuple[str, int]] = set()
    for it in items:
        if isinstance(it, Program):
            out |= it.functors()
        elif isinstance(it, Clause):
            for a in it.atoms():
                for t in a.args:
                    out |= term_functors(t)
        elif isinstance(it, Struct):
            for t in it.args:
                out |= term_functors(t)
        elif it is not None:
            for x in it:
                out |= signature_of(x)
    return out
