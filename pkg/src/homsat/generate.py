"""Enumeration and random generation of formulas by AST size.

Size counts AST nodes: letters and truth have size 1, negation and the
diamonds add 1, disjunction adds 1 to the sizes of both sides.  Double
negations are skipped since :func:`neg` would cancel them anyway.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import Iterator, Sequence

from .formula import TOP, Diamond, Formula, Not, Or, Prop


def _relations(dialect: str) -> tuple[str, ...]:
    return ("B", "D", "A") if dialect == "abd" else ("B", "D")


def enumerate_formulas(size: int, alphabet: Sequence[str], dialect: str = "bd",
                       with_top: bool = True) -> Iterator[Formula]:
    """Every formula with exactly ``size`` nodes, without double negations."""
    yield from _enum(size, tuple(alphabet), _relations(dialect), with_top)


@lru_cache(maxsize=None)
def _enum(size: int, alphabet: tuple[str, ...], rels: tuple[str, ...], with_top: bool) -> tuple[Formula, ...]:
    out: list[Formula] = []
    if size == 1:
        out.extend(Prop(a) for a in alphabet)
        if with_top:
            out.append(TOP)
        return tuple(out)
    for f in _enum(size - 1, alphabet, rels, with_top):
        if not isinstance(f, Not):
            out.append(Not(f))
        out.extend(Diamond(r, f) for r in rels)
    for left in range(1, size - 1):
        for a in _enum(left, alphabet, rels, with_top):
            for b in _enum(size - 1 - left, alphabet, rels, with_top):
                out.append(Or(a, b))
    return tuple(out)


def all_formulas_up_to(size: int, alphabet: Sequence[str], dialect: str = "bd") -> list[Formula]:
    out: list[Formula] = []
    for s in range(1, size + 1):
        out.extend(enumerate_formulas(s, alphabet, dialect))
    return out


def random_formula(rng: random.Random, size: int, alphabet: Sequence[str], dialect: str = "bd") -> Formula:
    """A random formula with exactly ``size`` nodes."""
    rels = _relations(dialect)
    if size <= 1:
        return TOP if rng.random() < 0.1 else Prop(rng.choice(list(alphabet)))
    if size == 2 or rng.random() < 0.55:
        inner = random_formula(rng, size - 1, alphabet, dialect)
        choice = rng.random()
        if choice < 0.3 and not isinstance(inner, Not):
            return Not(inner)
        return Diamond(rng.choice(rels), inner)
    left = rng.randint(1, size - 2)
    return Or(random_formula(rng, left, alphabet, dialect),
              random_formula(rng, size - 1 - left, alphabet, dialect))


def random_corpus(seed: int, count: int, max_size: int, alphabet: Sequence[str],
                  dialect: str = "bd") -> list[Formula]:
    rng = random.Random(seed)
    return [random_formula(rng, rng.randint(1, max_size), alphabet, dialect) for _ in range(count)]
