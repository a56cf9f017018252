"""Formula syntax for the BD and ABD interval logics.

The AST has five node kinds (letters, truth, negation, disjunction and the
existential modalities).  Everything else is sugar that expands at
construction time, so two formulas that mean the same derived operator
compare equal structurally.  Double negations are cancelled by :func:`neg`,
which keeps the closure an involution on negation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

RELATIONS = ("B", "D", "A")
RESERVED = {"T", "F", "pi"}


class Formula:
    """Base class for AST nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return neg(self)


@dataclass(frozen=True, eq=True, repr=False)
class Prop(Formula):
    name: str

    def __repr__(self) -> str:
        return f"Prop({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Top(Formula):
    def __repr__(self) -> str:
        return "Top()"


@dataclass(frozen=True, eq=True, repr=False)
class Not(Formula):
    child: Formula

    def __repr__(self) -> str:
        return f"Not({self.child!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self) -> str:
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Diamond(Formula):
    rel: str
    child: Formula

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    def __repr__(self) -> str:
        return f"Diamond({self.rel!r}, {self.child!r})"


TOP = Top()
BOTTOM = Not(TOP)
# The point-interval marker: no proper prefix exists.
PI = Not(Diamond("B", TOP))


def neg(f: Formula) -> Formula:
    """Negate ``f``, cancelling a leading negation instead of stacking one."""
    return f.child if isinstance(f, Not) else Not(f)


def conj(a: Formula, b: Formula) -> Formula:
    return neg(Or(neg(a), neg(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(implies(a, b), implies(b, a))


def diamond(rel: str, f: Formula) -> Formula:
    return Diamond(rel, f)


def box(rel: str, f: Formula) -> Formula:
    return neg(Diamond(rel, neg(f)))


def globally(f: Formula) -> Formula:
    """Truth on every sub-interval of the current initial interval.

    Only meaningful when evaluated at the full interval ``[0, N]``.
    """
    return conj_all([f, box("B", f), box("A", f), box("B", box("A", f))])


def conj_all(fs: Iterable[Formula]) -> Formula:
    items = list(fs)
    if not items:
        return TOP
    out = items[-1]
    for f in reversed(items[:-1]):
        out = conj(f, out)
    return out


def disj_all(fs: Iterable[Formula]) -> Formula:
    items = list(fs)
    if not items:
        return BOTTOM
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Diamond)):
        return (f.child,)
    if isinstance(f, Or):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: set[Formula] = set()
    out: list[Formula] = []
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen.add(node)
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(children(node)):
            if c not in seen:
                stack.append((c, False))
    return out


def letters(f: Formula) -> list[str]:
    return sorted({s.name for s in subformulas(f) if isinstance(s, Prop)})


def relations(f: Formula) -> set[str]:
    return {s.rel for s in subformulas(f) if isinstance(s, Diamond)}


def size(f: Formula) -> int:
    """Number of AST nodes, counting every occurrence."""
    return 1 + sum(size(c) for c in children(f))


def in_dialect(f: Formula, dialect: str) -> bool:
    return dialect == "abd" or "A" not in relations(f)


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int) -> None:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|<[BDAG]>|\[[BDAG]\]|[!&|()~])|(?P<id>[A-Za-z_][A-Za-z0-9_]*))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", text, i)
        kind = "op" if m.group("op") else "id"
        tok = m.group("op") or m.group("id")
        toks.append(_Tok(kind, tok, m.start(kind)))
        i = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


@dataclass
class _Parser:
    text: str
    dialect: str
    toks: list[_Tok] = field(default_factory=list)
    i: int = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, expected: str | None = None) -> _Tok:
        tok = self.toks[self.i]
        if expected is not None and tok.text != expected:
            what = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {expected!r}, found {what}", self.text, tok.pos)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        self.toks = _tokenize(self.text)
        f = self.iff_level()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {tok.text!r}", self.text, tok.pos)
        return f

    def iff_level(self) -> Formula:
        left = self.implies_level()
        if self.peek().text == "<->":
            self.take()
            return iff(left, self.iff_level())
        return left

    def implies_level(self) -> Formula:
        left = self.or_level()
        if self.peek().text == "->":
            self.take()
            return implies(left, self.implies_level())
        return left

    def or_level(self) -> Formula:
        out = self.and_level()
        while self.peek().text == "|":
            self.take()
            out = Or(out, self.and_level())
        return out

    def and_level(self) -> Formula:
        out = self.unary()
        while self.peek().text == "&":
            self.take()
            out = conj(out, self.unary())
        return out

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text in ("!", "~"):
            self.take()
            return neg(self.unary())
        if tok.kind == "op" and len(tok.text) == 3 and tok.text[1] in "BDAG":
            self.take()
            rel = tok.text[1]
            if rel in "AG" and self.dialect != "abd":
                raise ParseError(f"operator {tok.text} needs the abd dialect", self.text, tok.pos)
            body = self.unary()
            if rel == "G":
                g = globally(body) if tok.text[0] == "[" else neg(globally(neg(body)))
                return g
            return diamond(rel, body) if tok.text[0] == "<" else box(rel, body)
        if tok.text == "(":
            self.take()
            inner = self.iff_level()
            self.take(")")
            return inner
        if tok.kind == "id":
            self.take()
            if tok.text == "T":
                return TOP
            if tok.text == "F":
                return BOTTOM
            if tok.text == "pi":
                return PI
            return Prop(tok.text)
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {what}", self.text, tok.pos)


def parse(text: str, dialect: str = "abd") -> Formula:
    """Parse the ASCII syntax.  ``dialect='bd'`` rejects the A modality."""
    if dialect not in ("bd", "abd"):
        raise ValueError(f"unknown dialect {dialect!r}")
    return _Parser(text, dialect).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3


def _as_box(f: Formula) -> tuple[str, Formula] | None:
    if isinstance(f, Not) and isinstance(f.child, Diamond):
        return f.child.rel, neg(f.child.child)
    return None


def _render(f: Formula) -> tuple[str, int]:
    if isinstance(f, Prop):
        return f.name, _PREC_UNARY
    if isinstance(f, Top):
        return "T", _PREC_UNARY
    if f == BOTTOM:
        return "F", _PREC_UNARY
    if f == PI:
        return "pi", _PREC_UNARY
    if isinstance(f, Diamond):
        return f"<{f.rel}> " + _wrap(f.child, _PREC_UNARY), _PREC_UNARY
    if isinstance(f, Or):
        return _wrap(f.left, _PREC_OR) + " | " + _wrap(f.right, _PREC_AND), _PREC_OR
    assert isinstance(f, Not)
    inner = f.child
    if isinstance(inner, Or):
        a, b = neg(inner.left), neg(inner.right)
        return _wrap(a, _PREC_AND) + " & " + _wrap(b, _PREC_UNARY), _PREC_AND
    boxed = _as_box(f)
    if boxed is not None:
        rel, body = boxed
        return f"[{rel}] " + _wrap(body, _PREC_UNARY), _PREC_UNARY
    return "!" + _wrap(inner, _PREC_UNARY), _PREC_UNARY


def _wrap(f: Formula, need: int) -> str:
    text, prec = _render(f)
    return text if prec >= need else f"({text})"


def to_text(f: Formula) -> str:
    """Render ``f`` so that ``parse(to_text(f)) == f``."""
    return _render(f)[0]


def iter_tree(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from iter_tree(c)
