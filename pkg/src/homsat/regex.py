"""Restricted star-free expressions with prefix and infix operators.

Words are nonempty.  ``Pre(e)`` matches ``w v`` and ``Inf(e)`` matches
``u w v`` with ``w`` in ``e`` and ``u, v`` nonempty.  An expression maps to a
BD formula over its letters whose models, read point by point, spell the
words of the language.

Concrete syntax: ``%`` is the empty language, ``~`` complement, ``+``
union, ``Pre(..)`` and ``Inf(..)`` the two operators.  Files hold an
``alphabet: a b`` header line followed by the expression.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .formula import BOTTOM, PI, Formula, Prop, box, conj, conj_all, diamond, disj_all, implies, neg
from .semantics import Model
from .solver import SearchConfig, Status, Verdict, certificate_model, solve


class RegexError(ValueError):
    pass


class Expr:
    """Base class of restricted expressions."""

    def __str__(self) -> str:
        return expr_text(self)


@dataclass(frozen=True, repr=False)
class Empty(Expr):
    pass


@dataclass(frozen=True, repr=False)
class Letter(Expr):
    name: str


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Pre(Expr):
    child: Expr


@dataclass(frozen=True, repr=False)
class Inf(Expr):
    child: Expr


def expr_text(e: Expr) -> str:
    if isinstance(e, Empty):
        return "%"
    if isinstance(e, Letter):
        return e.name
    if isinstance(e, Neg):
        inner = expr_text(e.child)
        return f"~({inner})" if isinstance(e.child, Union) else f"~{inner}"
    if isinstance(e, Union):
        return f"{expr_text(e.left)} + {expr_text(e.right)}"
    if isinstance(e, Pre):
        return f"Pre({expr_text(e.child)})"
    if isinstance(e, Inf):
        return f"Inf({expr_text(e.child)})"
    raise TypeError(e)


def letters_of(e: Expr) -> set[str]:
    if isinstance(e, Letter):
        return {e.name}
    if isinstance(e, (Neg, Pre, Inf)):
        return letters_of(e.child)
    if isinstance(e, Union):
        return letters_of(e.left) | letters_of(e.right)
    return set()


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(Pre|Inf)\s*\(|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokens(text: str) -> list[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            out.append(m.group(1) + "(")
        elif m.group(2):
            out.append(m.group(2))
        elif m.group(3):
            out.append(m.group(3))
        pos = m.end()
    return out


def parse_regex(text: str, alphabet: Sequence[str] | None = None) -> Expr:
    """Parse an expression; letters must come from ``alphabet`` when given."""
    toks = _tokens(text)
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def take(want: str | None = None) -> str:
        nonlocal pos
        tok = peek()
        if tok is None or (want is not None and tok != want):
            raise RegexError(f"expected {want or 'a term'} at token {pos} in {text!r}")
        pos += 1
        return tok

    def union() -> Expr:
        e = unary()
        while peek() == "+":
            take("+")
            e = Union(e, unary())
        return e

    def unary() -> Expr:
        tok = take()
        if tok == "~":
            return Neg(unary())
        if tok == "%":
            return Empty()
        if tok == "(":
            e = union()
            take(")")
            return e
        if tok in ("Pre(", "Inf("):
            e = union()
            take(")")
            return Pre(e) if tok == "Pre(" else Inf(e)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            if alphabet is not None and tok not in alphabet:
                raise RegexError(f"letter {tok!r} not in the alphabet")
            return Letter(tok)
        raise RegexError(f"unexpected {tok!r} in {text!r}")

    if not toks:
        raise RegexError("empty expression")
    e = union()
    if peek() is not None:
        raise RegexError(f"trailing input at token {pos} in {text!r}")
    return e


def parse_regex_file(text: str) -> tuple[list[str], Expr]:
    """Read the ``alphabet:`` header line and the expression below it."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("alphabet:"):
        raise RegexError("expected an 'alphabet:' line followed by the expression")
    alphabet = lines[0][len("alphabet:"):].split()
    if not alphabet or len(set(alphabet)) != len(alphabet):
        raise RegexError("alphabet must list distinct letters")
    return alphabet, parse_regex(" ".join(lines[1:]), alphabet)


# ---------------------------------------------------------------------------
# Languages


def member(e: Expr, word: Sequence[str]) -> bool:
    """Whether the nonempty ``word`` belongs to the language of ``e``."""
    w = tuple(word)
    if not w:
        return False

    @lru_cache(maxsize=None)
    def mem(node: Expr, i: int, j: int) -> bool:
        if isinstance(node, Empty):
            return False
        if isinstance(node, Letter):
            return j - i == 1 and w[i] == node.name
        if isinstance(node, Neg):
            return not mem(node.child, i, j)
        if isinstance(node, Union):
            return mem(node.left, i, j) or mem(node.right, i, j)
        if isinstance(node, Pre):
            return any(mem(node.child, i, k) for k in range(i + 1, j))
        if isinstance(node, Inf):
            return any(mem(node.child, a, b) for a in range(i + 1, j - 1) for b in range(a + 1, j))
        raise TypeError(node)

    return mem(e, 0, len(w))


def words(alphabet: Sequence[str], max_len: int) -> Iterator[tuple[str, ...]]:
    """All nonempty words up to ``max_len``, shortest first."""
    for n in range(1, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def shortest_member(e: Expr, alphabet: Sequence[str], max_len: int) -> tuple[str, ...] | None:
    for w in words(alphabet, max_len):
        if member(e, w):
            return w
    return None


# ---------------------------------------------------------------------------
# Translation


def expr_formula(e: Expr) -> Formula:
    """The formula for ``e`` alone, without the one-letter-per-point constraint."""
    if isinstance(e, Empty):
        return BOTTOM
    if isinstance(e, Letter):
        return conj(PI, Prop(e.name))
    if isinstance(e, Neg):
        return neg(expr_formula(e.child))
    if isinstance(e, Union):
        return expr_formula(e.left) | expr_formula(e.right)
    if isinstance(e, Pre):
        return diamond("B", expr_formula(e.child))
    if isinstance(e, Inf):
        return diamond("D", expr_formula(e.child))
    raise TypeError(e)


def one_letter(alphabet: Sequence[str]) -> Formula:
    """Points carry exactly one letter, on the current interval and all its sub-intervals.

    The last point is only seen through the current interval; see
    :func:`conform` for how models are read back.
    """
    props = [Prop(a) for a in alphabet]
    some = disj_all(props)
    at_most = conj_all(neg(conj(a, b)) for a, b in itertools.combinations(props, 2))
    local = implies(PI, conj(some, at_most))
    return conj_all([local, box("B", local), box("D", local)])


def translate(e: Expr, alphabet: Sequence[str]) -> Formula:
    missing = letters_of(e) - set(alphabet)
    if missing:
        raise RegexError(f"letters {sorted(missing)} not in the alphabet")
    return conj(expr_formula(e), one_letter(alphabet))


# ---------------------------------------------------------------------------
# Words and models


def word_to_model(word: Sequence[str]) -> Model:
    if not word:
        raise RegexError("words are nonempty")
    return Model.of([{a} for a in word])


def model_to_word(model: Model, alphabet: Sequence[str] | None = None) -> tuple[str, ...]:
    out = []
    for x, pts in enumerate(model.points):
        labels = sorted(pts if alphabet is None else set(pts) & set(alphabet))
        if len(labels) != 1:
            raise RegexError(f"point {x} carries {len(labels)} letters")
        out.append(labels[0])
    return tuple(out)


def conform(model: Model, alphabet: Sequence[str]) -> Model:
    """Relabel the last point with a single letter when it has none or several.

    Formulas from :func:`translate` cannot observe the last point of a
    model with more than one point, so this keeps them true.
    """
    pts = [set(p) & set(alphabet) for p in model.points]
    if len(pts) > 1 and len(pts[-1]) != 1:
        pts[-1] = {min(pts[-1]) if pts[-1] else alphabet[0]}
    return Model.of(pts)


@dataclass
class EmptinessResult:
    verdict: Verdict
    witness: tuple[str, ...] | None

    @property
    def empty(self) -> bool:
        """True only for a decided empty language; an exhausted search is neither."""
        return self.verdict.status is Status.UNSAT

    @property
    def exhausted(self) -> bool:
        return self.verdict.status is Status.EXHAUSTED


def emptiness(e: Expr, alphabet: Sequence[str], cfg: SearchConfig | None = None) -> EmptinessResult:
    """Decide emptiness with the solver; a nonempty verdict carries a word."""
    v = solve(translate(e, alphabet), "bd", cfg)
    witness = None
    if v.sat and v.certificate is not None:
        witness = model_to_word(conform(certificate_model(v.certificate), alphabet), alphabet)
    return EmptinessResult(v, witness)


def random_expr(rng: random.Random, size: int, alphabet: Sequence[str]) -> Expr:
    """A random expression with roughly ``size`` nodes."""
    if size <= 1:
        return Empty() if rng.random() < 0.1 else Letter(rng.choice(list(alphabet)))
    r = rng.random()
    if r < 0.25:
        return Neg(random_expr(rng, size - 1, alphabet))
    if r < 0.45:
        return Pre(random_expr(rng, size - 1, alphabet))
    if r < 0.65:
        return Inf(random_expr(rng, size - 1, alphabet))
    left = rng.randint(1, max(1, size - 2))
    return Union(random_expr(rng, left, alphabet), random_expr(rng, max(1, size - 1 - left), alphabet))
