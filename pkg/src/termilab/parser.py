"""Reader and printer for program files, queries and substitutions.

The syntax is a small Prolog subset: clauses ``h.`` / ``h :- b1, ..., bn.``,
list sugar, ``%`` comments, ``%% mode p(i,o).`` directives and the infix
functor ``/\\`` (used by the SAT corpus). Certificate files are handled in
:mod:`termilab.certificate`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from termilab.core import NIL, Clause, Program, Struct, Substitution, Var

_NAME = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.msg = msg
        self.line = line
        self.col = col


class ArityClash(ParseError):
    pass


class DuplicateModeDirective(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # name, var, int, punct, op, end
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<op>:-|/\\)
  | (?P<nil>\[\])
  | (?P<punct>[()\[\],|.])
    """,
    re.VERBOSE,
)


def tokenize(text: str, line0: int = 1) -> list[Token]:
    toks: list[Token] = []
    line, pos, linestart = line0, 0, 0
    while pos < len(text):
        ch = text[pos]
        if ch == "%":
            end = text.find("\n", pos)
            pos = len(text) if end < 0 else end
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", line, pos - linestart + 1)
        kind = m.lastgroup
        col = pos - linestart + 1
        if kind == "nl":
            line += 1
            linestart = m.end()
        elif kind == "ws":
            pass
        elif kind == "quoted":
            toks.append(Token("name", m.group()[1:-1].replace("\\'", "'"), line, col))
        elif kind == "nil":
            toks.append(Token("name", "[]", line, col))
        else:
            toks.append(Token(kind, m.group(), line, col))
        pos = m.end()
    toks.append(Token("end", "", line, pos - linestart + 1))
    return toks


class _Reader:
    def __init__(self, text: str, line0: int = 1):
        self.toks = tokenize(text, line0)
        self.i = 0
        self.anon = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg: str):
        t = self.tok
        raise ParseError(msg, t.line, t.col)

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind) or t.kind == "end" and text:
            want = text or kind
            self.fail(f"expected {want!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "op")

    # term := primary ('/\' primary)*
    def term(self):
        left = self.primary()
        while self.at("/\\"):
            self.take()
            right = self.primary()
            left = Struct("/\\", (left, right))
        return left

    def primary(self):
        t = self.tok
        if t.kind == "var":
            self.i += 1
            if t.text == "_":
                self.anon += 1
                return Var(f"_{self.anon}")
            return Var(t.text)
        if t.kind in ("name", "int"):
            self.i += 1
            if self.at("(") and self.toks[self.i].col == t.col + len(_raw(t)):
                self.take("(")
                args = [self.term()]
                while self.at(","):
                    self.take()
                    args.append(self.term())
                self.take(")")
                return Struct(t.text, tuple(args))
            return Struct(t.text)
        if self.at("["):
            self.take()
            items = [self.term()]
            while self.at(","):
                self.take()
                items.append(self.term())
            tail = NIL
            if self.at("|"):
                self.take()
                tail = self.term()
            self.take("]")
            out = tail
            for x in reversed(items):
                out = Struct(".", (x, out))
            return out
        if self.at("("):
            self.take()
            inner = self.term()
            self.take(")")
            return inner
        self.fail(f"unexpected {t.text or 'end of input'!r}")

    def atom(self) -> Struct:
        t = self.tok
        a = self.term()
        if not isinstance(a, Struct):
            raise ParseError("expected an atom, found a variable", t.line, t.col)
        return a

    def conjunction(self) -> tuple:
        atoms = [self.atom()]
        while self.at(","):
            self.take()
            atoms.append(self.atom())
        return tuple(atoms)

    def clause(self) -> Clause:
        self.anon = 0
        head = self.atom()
        body: tuple = ()
        if self.at(":-"):
            self.take()
            body = self.conjunction()
        self.take(".")
        return Clause(head, body)


def _raw(t: Token) -> str:
    if t.kind == "name" and not (_NAME.match(t.text) or t.text == "[]"):
        return "'" + t.text.replace("'", "\\'") + "'"
    return t.text


_MODE_RE = re.compile(r"^\s*%%\s*mode\s+(.*?)\s*\.?\s*$")


def parse_mode_spec(text: str, line: int = 0) -> tuple[tuple[str, int], tuple[str, ...]]:
    r = _Reader(text, line or 1)
    a = r.atom()
    modes = []
    for x in a.args:
        name = x.name if isinstance(x, Var) else x.functor
        if (isinstance(x, Struct) and x.args) or name.upper() not in ("I", "O"):
            raise ParseError(f"bad mode {format_term(x)}", line, 1)
        modes.append(name.upper())
    if r.tok.kind != "end":
        r.fail("trailing input after mode")
    return a.key, tuple(modes)


def parse_program(text: str) -> Program:
    modes: dict = {}
    lines = text.split("\n")
    for n, line in enumerate(lines, 1):
        m = _MODE_RE.match(line)
        if m:
            key, spec = parse_mode_spec(m.group(1), n)
            if key in modes:
                raise DuplicateModeDirective(f"duplicate mode for {key[0]}/{key[1]}", n, 1)
            modes[key] = spec
    r = _Reader(text)
    clauses = []
    while r.tok.kind != "end":
        clauses.append(r.clause())
    prog = Program(tuple(clauses), modes or None)
    check_arities(prog)
    return prog


def check_arities(prog: Program) -> None:
    seen: dict[str, int] = {}
    for c in prog.clauses:
        stack = list(c.atoms())
        while stack:
            t = stack.pop()
            if isinstance(t, Struct):
                if t.functor != "." and seen.setdefault(t.functor, t.arity) != t.arity:
                    raise ArityClash(f"{t.functor} used with arities {seen[t.functor]} and {t.arity}")
                stack.extend(t.args)


def parse_term(text: str):
    r = _Reader(text)
    t = r.term()
    if r.tok.kind != "end":
        r.fail("trailing input")
    return t


def parse_atom(text: str) -> Struct:
    r = _Reader(text)
    a = r.atom()
    if r.at("."):
        r.take()
    if r.tok.kind != "end":
        r.fail("trailing input")
    return a


def parse_query(text: str) -> tuple:
    text = text.strip()
    if text.startswith("?-"):
        text = text[2:]
    r = _Reader(text)
    if r.tok.kind == "end":
        return ()
    q = r.conjunction()
    if r.at("."):
        r.take()
    if r.tok.kind != "end":
        r.fail("trailing input")
    return q


def parse_clause(text: str) -> Clause:
    r = _Reader(text)
    c = r.clause()
    if r.tok.kind != "end":
        r.fail("trailing input")
    return c


# -- printing ----------------------------------------------------------------

def format_name(f: str) -> str:
    if _NAME.match(f) or f == "[]" or f.isdigit():
        return f
    return "'" + f.replace("'", "\\'") + "'"


def format_term(t, anonymous: frozenset = frozenset()) -> str:
    if isinstance(t, Var):
        return "_" if t in anonymous else t.name
    if t.functor == "." and t.arity == 2:
        items = []
        while isinstance(t, Struct) and t.functor == "." and t.arity == 2:
            items.append(format_term(t.args[0], anonymous))
            t = t.args[1]
        body = ",".join(items)
        if t == NIL:
            return f"[{body}]"
        return f"[{body}|{format_term(t, anonymous)}]"
    if t.functor == "/\\" and t.arity == 2:
        left, right = t.args
        ls = format_term(left, anonymous)
        rs = format_term(right, anonymous)
        if isinstance(right, Struct) and right.functor == "/\\" and right.arity == 2:
            rs = f"({rs})"
        return f"{ls} /\\ {rs}"
    if not t.args:
        return format_name(t.functor)
    inner = ",".join(_arg(a, anonymous) for a in t.args)
    return f"{format_name(t.functor)}({inner})"


def _arg(a, anonymous) -> str:
    return format_term(a, anonymous)


def format_atom(a: Struct, anonymous: frozenset = frozenset()) -> str:
    return format_term(a, anonymous)


def format_query(q, anonymous: frozenset = frozenset()) -> str:
    return ", ".join(format_atom(a, anonymous) for a in q)


def _singletons(c: Clause) -> frozenset:
    counts: dict = {}
    stack = list(c.atoms())
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            counts[t] = counts.get(t, 0) + 1
        else:
            stack.extend(t.args)
    return frozenset(v for v, n in counts.items() if n == 1 and v.name.startswith("_"))


def format_clause(c: Clause, anonymous: bool = False) -> str:
    anon = _singletons(c) if anonymous else frozenset()
    head = format_atom(c.head, anon)
    if not c.body:
        return f"{head}."
    return f"{head} :- {format_query(c.body, anon)}."


def format_modes(modes) -> list[str]:
    out = []
    for (p, _), spec in modes.items():
        args = f"({','.join(m.lower() for m in spec)})" if spec else ""
        out.append(f"%% mode {format_name(p)}{args}.")
    return out


def format_program(p: Program, anonymous: bool = False) -> str:
    lines = format_modes(p.modes) if p.modes else []
    lines += [format_clause(c, anonymous) for c in p.clauses]
    return "\n".join(lines) + ("\n" if lines else "")


def format_substitution(s) -> str:
    items = s.items() if isinstance(s, Substitution) else s.items()
    return "{" + ", ".join(f"{v.name}/{format_term(t)}" for v, t in items) + "}"


def pretty_print(x) -> str:
    """Canonical text of a program, clause, query, atom, substitution or certificate."""
    from termilab.certificate import Certificate, format_certificate

    if isinstance(x, Program):
        return format_program(x)
    if isinstance(x, Clause):
        return format_clause(x)
    if isinstance(x, (Struct, Var)):
        return format_term(x)
    if isinstance(x, Substitution):
        return format_substitution(x)
    if isinstance(x, Certificate):
        return format_certificate(x)
    if isinstance(x, dict):
        return format_substitution(Substitution(x))
    return format_query(x)
