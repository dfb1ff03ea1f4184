"""Certificate files: a class tag, a level map, an interpretation and check parameters.

One record per line, ``#`` or ``%`` starts a comment::

    class acceptable
    depth 3
    pool 2
    measure size
    signature 0/0 []/0 arc/2 ./2
    mode trans(i,o,i)
    level trans(X,Y,E) = listlen(3) + 1 + reach_count(1,3) if is_dag(3) else inf
    level member/2 = listlen(2)
    model trans/3 all
    model member/2 guard in_list(1,2)
    model even/1 {even(0), even(s(s(0)))}
    model cons/2 constraint listlen(1) = termsize(2)
    query trans(0,Y,[arc(0,s(0))])
    querybound 3
    guard is_dag

Level rules for one predicate accumulate in file order; the first rule whose
guard holds fires.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from termilab import measure as M
from termilab.core import Struct
from termilab.parser import ParseError, format_atom, format_query, parse_atom, parse_mode_spec, parse_query

CLASS_TAGS = ("recurrent", "simply-acceptable", "delay-recurrent", "acceptable", "fair-bounded", "bounded")


class UnknownClassTag(ValueError):
    pass


class MalformedConstraint(ValueError):
    pass


class CertificateError(ValueError):
    pass


@dataclass
class Certificate:
    cls: str
    levelmap: M.LevelMap = field(default_factory=M.LevelMap)
    interpretation: M.Interpretation | None = None
    modes: dict | None = None
    depth: int = 3
    pool: int = 2
    measure: str = "size"
    signature: set | None = None
    query: tuple | None = None
    querybound: int | None = None
    guards: list = field(default_factory=list)


def normalize_tag(tag: str) -> str:
    t = tag.strip().lower().replace("_", "-")
    if t not in CLASS_TAGS:
        raise UnknownClassTag(f"unknown class tag {tag!r}; expected one of {', '.join(CLASS_TAGS)}")
    return t


# -- expression reader ------------------------------------------------------------

_EXPR_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(<=|=<|>=|==|!=|[-+(),<>=]))")


def _lex(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise CertificateError(f"unexpected character {text[pos]!r} in {text!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


class _ExprReader:
    def __init__(self, tokens: list[str], registry: M.GuardRegistry, arity: int | None):
        self.toks = tokens
        self.i = 0
        self.registry = registry
        self.arity = arity

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want: str | None = None) -> str:
        t = self.peek()
        if t is None or (want is not None and t != want):
            raise CertificateError(f"expected {want or 'a token'!r}, found {t or 'end of line'!r}")
        self.i += 1
        return t

    def expr(self):
        left = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            right = self.term()
            left = M.Add(left, right) if op == "+" else M.Monus(left, right)
        return left

    def _args(self) -> list:
        self.take("(")
        items = [self.expr()]
        while self.peek() == ",":
            self.take()
            items.append(self.expr())
        self.take(")")
        return items

    def _index(self) -> int:
        t = self.take()
        if not t.isdigit():
            raise CertificateError(f"expected an argument index, found {t!r}")
        n = int(t)
        if n < 1 or (self.arity is not None and n > self.arity):
            raise CertificateError(f"argument index {n} out of range")
        return n

    def term(self):
        t = self.take()
        if t.isdigit():
            return M.Const(int(t))
        if t == "(":
            e = self.expr()
            self.take(")")
            return e
        name = t.lower()
        if name in ("max", "min"):
            items = tuple(self._args())
            return M.Max(items) if name == "max" else M.Min(items)
        if name == "monus":
            items = self._args()
            if len(items) != 2:
                raise CertificateError("monus takes two arguments")
            return M.Monus(items[0], items[1])
        kind = M.NORM_ALIASES.get(name, name)
        if kind in M.BUILTIN_NORMS:
            self.take("(")
            n = self._index()
            self.take(")")
            return M.Norm(kind, (n,))
        if kind in self.registry and self.registry.get(kind).kind == "card":
            self.take("(")
            idx = [self._index()]
            while self.peek() == ",":
                self.take()
                idx.append(self._index())
            self.take(")")
            return M.Norm(kind, tuple(idx))
        raise M.UnknownNorm(f"unknown norm {t!r}")

    def at_end(self) -> bool:
        return self.i >= len(self.toks)


def parse_norm_expr(text: str, registry: M.GuardRegistry = M.DEFAULT_REGISTRY, arity: int | None = None):
    r = _ExprReader(_lex(text), registry, arity)
    e = r.expr()
    if not r.at_end():
        raise CertificateError(f"trailing input in expression {text!r}")
    return e


def parse_guard(text: str, registry: M.GuardRegistry = M.DEFAULT_REGISTRY, arity: int | None = None):
    t = text.strip()
    neg = False
    if t.startswith("not "):
        neg, t = True, t[4:].strip()
    if t == "in_model":
        return M.NotInModel() if neg else M.InModel()
    m = re.fullmatch(r"([a-z_][A-Za-z0-9_]*)\s*\(([\d\s,]*)\)", t)
    if not m:
        raise CertificateError(f"bad guard {text!r}")
    name = m.group(1)
    if name not in registry or registry.get(name).kind != "bool":
        raise M.UnknownGuard(f"unknown guard {name!r}")
    idx = tuple(int(x) for x in m.group(2).replace(" ", "").split(",") if x)
    if arity is not None and any(i < 1 or i > arity for i in idx):
        raise CertificateError(f"guard index out of range in {text!r}")
    return M.SemGuard(name, idx, neg)


_CMP_RE = re.compile(r"(<=|=<|>=|==|!=|<|>|=)")


def parse_constraint(text: str, registry: M.GuardRegistry = M.DEFAULT_REGISTRY,
                     arity: int | None = None) -> tuple:
    parts = [p.strip() for p in re.split(r"\band\b", text)]
    rel = []
    for p in parts:
        bits = _CMP_RE.split(p)
        if len(bits) != 3 or not bits[0].strip() or not bits[2].strip():
            raise MalformedConstraint(f"malformed constraint {p!r}")
        op = M.OP_ALIASES.get(bits[1], bits[1])
        try:
            left = parse_norm_expr(bits[0], registry, arity)
            right = parse_norm_expr(bits[2], registry, arity)
        except CertificateError as exc:
            raise MalformedConstraint(f"malformed constraint {p!r}: {exc}") from None
        rel.append(M.Comparison(left, op, right))
    return tuple(rel)


# -- line reader ----------------------------------------------------------------

_PRED_RE = re.compile(r"^\s*([a-z][A-Za-z0-9_]*|'[^']*')\s*/\s*(\d+)")


def _split_pred(text: str) -> tuple[tuple[str, int], str]:
    """Read ``p/n`` or ``p(A,..)`` at the start of ``text``; return key and remainder."""
    m = _PRED_RE.match(text)
    if m:
        name = m.group(1).strip("'")
        return (name, int(m.group(2))), text[m.end():]
    depth = 0
    for j, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return parse_atom(text[: j + 1]).key, text[j + 1:]
        elif depth == 0 and ch in " =\t":
            break
    head = re.match(r"\s*([a-z][A-Za-z0-9_]*)", text)
    if not head:
        raise CertificateError(f"expected a predicate in {text!r}")
    return (head.group(1), 0), text[head.end():]


def _strip_comment(line: str) -> str:
    for mark in ("#", "%"):
        j = line.find(mark)
        if j >= 0:
            line = line[:j]
    return line.strip()


def _parse_level(rest: str, cert: Certificate, registry) -> None:
    key, tail = _split_pred(rest)
    tail = tail.strip()
    if not tail.startswith("="):
        raise CertificateError("level rule needs '='")
    body = tail[1:].strip()
    else_part = None
    m = re.search(r"\belse\b", body)
    if m:
        body, else_part = body[: m.start()].strip(), body[m.end():].strip()
    guard = M.Always()
    m = re.search(r"\bif\b", body)
    if m:
        guard = parse_guard(body[m.end():], registry, key[1])
        body = body[: m.start()].strip()
    value = M.INF if body == "inf" else parse_norm_expr(body, registry, key[1])
    cert.levelmap.add(key, M.LevelRule(guard, value))
    if else_part is not None:
        ev = M.INF if else_part == "inf" else parse_norm_expr(else_part, registry, key[1])
        cert.levelmap.add(key, M.LevelRule(M.Always(), ev))


def _parse_model(rest: str, cert: Certificate, registry) -> None:
    key, tail = _split_pred(rest)
    tail = tail.strip()
    if cert.interpretation is None:
        cert.interpretation = M.Interpretation()
    interp = cert.interpretation
    if tail == "all":
        interp.add(M.AllAtoms(key))
    elif tail.startswith("{"):
        if not tail.endswith("}"):
            raise CertificateError("unterminated atom set")
        inner = tail[1:-1].strip()
        atoms = parse_query(inner) if inner else ()
        for a in atoms:
            if a.key != key:
                raise CertificateError(f"atom {format_atom(a)} does not belong to {key[0]}/{key[1]}")
            if not _ground(a):
                raise CertificateError(f"extensional atom {format_atom(a)} is not ground")
        interp.add(M.Extensional(key, frozenset(atoms)))
    elif tail.startswith("constraint"):
        interp.add(M.NormConstraint(key, parse_constraint(tail[len("constraint"):], registry, key[1])))
    elif tail.startswith("guard"):
        g = parse_guard(tail[len("guard"):], registry, key[1])
        interp.add(M.GuardedAtoms(key, g))
    else:
        raise CertificateError(f"bad model clause {tail!r}")


def _ground(a: Struct) -> bool:
    from termilab.core import is_ground

    return is_ground(a)


def parse_certificate(text: str, registry: M.GuardRegistry = M.DEFAULT_REGISTRY) -> Certificate:
    cert: Certificate | None = None
    pending: list[tuple[int, str, str]] = []
    for n, raw in enumerate(text.split("\n"), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "class":
            if cert is not None:
                raise CertificateError(f"line {n}: duplicate class record")
            cert = Certificate(normalize_tag(rest))
        else:
            pending.append((n, kw, rest))
    if cert is None:
        raise UnknownClassTag("certificate has no class record")
    for n, kw, rest in pending:
        try:
            _apply_record(cert, kw, rest, registry, n)
        except ParseError as exc:
            raise CertificateError(f"line {n}: {exc}") from None
        except (M.UnknownNorm, M.UnknownGuard, MalformedConstraint, CertificateError) as exc:
            raise type(exc)(f"line {n}: {exc.args[0] if exc.args else exc}") from None
    return cert


def _apply_record(cert: Certificate, kw: str, rest: str, registry, n: int) -> None:
    if kw in ("depth", "pool", "querybound"):
        if not rest.isdigit():
            raise CertificateError(f"{kw} needs a natural number")
        setattr(cert, kw, int(rest))
    elif kw == "measure":
        if rest not in ("size", "nesting"):
            raise CertificateError(f"unknown measure {rest!r}")
        cert.measure = rest
    elif kw == "signature":
        sig = set()
        for item in rest.split():
            f, _, k = item.rpartition("/")
            if not f or not k.isdigit():
                raise CertificateError(f"bad signature item {item!r}")
            sig.add((f.strip("'"), int(k)))
        cert.signature = sig
    elif kw == "mode":
        key, spec = parse_mode_spec(rest, n)
        cert.modes = dict(cert.modes or {})
        cert.modes[key] = spec
    elif kw == "level":
        _parse_level(rest, cert, registry)
    elif kw == "model":
        _parse_model(rest, cert, registry)
    elif kw == "query":
        cert.query = parse_query(rest)
    elif kw == "guard":
        if rest not in registry:
            raise M.UnknownGuard(f"unknown guard {rest!r}")
        cert.guards.append(rest)
    else:
        raise CertificateError(f"unknown record {kw!r}")


# -- printer -------------------------------------------------------------------

def _fmt_key(key) -> str:
    from termilab.parser import format_name

    return f"{format_name(key[0])}/{key[1]}"


def _fmt_guard(g) -> str:
    return "" if isinstance(g, M.Always) else f" if {g}"


def format_certificate(cert: Certificate) -> str:
    lines = [f"class {cert.cls}", f"depth {cert.depth}", f"pool {cert.pool}", f"measure {cert.measure}"]
    if cert.signature is not None:
        lines.append("signature " + " ".join(f"{f}/{k}" for f, k in sorted(cert.signature)))
    for g in cert.guards:
        lines.append(f"guard {g}")
    for (p, _), spec in (cert.modes or {}).items():
        lines.append(f"mode {p}({','.join(m.lower() for m in spec)})" if spec else f"mode {p}")
    for key, rules in cert.levelmap.rules.items():
        for r in rules:
            v = "inf" if r.value is M.INF else str(r.value)
            lines.append(f"level {_fmt_key(key)} = {v}{_fmt_guard(r.guard)}")
    if cert.interpretation is not None:
        for c in cert.interpretation.clauses:
            lines.append(f"model {_fmt_key(c.pred)} {c}")
    if cert.query is not None:
        lines.append(f"query {format_query(cert.query)}")
    if cert.querybound is not None:
        lines.append(f"querybound {cert.querybound}")
    return "\n".join(lines) + "\n"
