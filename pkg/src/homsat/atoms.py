"""Closure tables, atoms, successor relations and the column potential.

Closure members come in complementary pairs.  Pair ``i`` holds a positive
representative (never a negation) at member index ``2*i`` and its negation at
``2*i + 1``; pair 0 is always ``<B>T``.  Truth itself is not a member: it is
implicitly contained in every atom.

An atom is stored as a bitmask over pairs (bit ``i`` set when the positive
member of pair ``i`` belongs to the atom).  Only letters and diamonds are
independent; disjunctions follow from them, so an atom is fixed by its
letters and its requests.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .formula import (
    BOTTOM,
    TOP,
    Diamond,
    Formula,
    Not,
    Or,
    Prop,
    Top,
    neg,
    relations,
    subformulas,
    to_text,
)

LIT_TOP = -1
LIT_BOTTOM = -2

ENUM_LIMIT = 1 << 18


class Mark(enum.IntEnum):
    """Status of an A-request of the column's starting point."""

    PENDING = 0
    SATISFIED = 1
    FORBIDDEN = 2


class ClosureError(ValueError):
    pass


@dataclass
class ClosureTable:
    """Closure of a formula, indexed for bitmask atoms."""

    formula: Formula
    dialect: str
    positives: list[Formula]
    kinds: list[str]
    lit_a: list[int]
    lit_b: list[int]
    index: dict[Formula, int]
    letters: list[str]
    letter_pairs: list[int]
    diamonds: dict[str, list[int]]
    diamond_args: dict[str, list[int]]
    base_pairs: list[int]
    or_pairs: list[int]

    @property
    def members(self) -> list[Formula]:
        out: list[Formula] = []
        for p in self.positives:
            out.extend((p, Not(p)))
        return out

    def __len__(self) -> int:
        return 2 * len(self.positives)

    @property
    def phi_size(self) -> int:
        """The formula length measure used by the counting bounds: |CL|/2."""
        return len(self.positives)

    def literal(self, f: Formula) -> int:
        if isinstance(f, Top):
            return LIT_TOP
        if f == BOTTOM:
            return LIT_BOTTOM
        try:
            return self.index[f]
        except KeyError:
            raise ClosureError(f"{to_text(f)} is not in the closure") from None

    def member(self, lit: int) -> Formula:
        if lit == LIT_TOP:
            return TOP
        if lit == LIT_BOTTOM:
            return BOTTOM
        p = self.positives[lit >> 1]
        return Not(p) if lit & 1 else p

    def n(self, rel: str) -> int:
        return len(self.diamonds[rel])


def build_closure(phi: Formula, dialect: str = "abd") -> ClosureTable:
    """Closure of ``phi``: subformulas, their negations, and <B>T, [B]F."""
    if dialect not in ("bd", "abd"):
        raise ValueError(f"unknown dialect {dialect!r}")
    if dialect == "bd" and "A" in relations(phi):
        raise ClosureError("the A modality is not part of the bd dialect")
    positives: list[Formula] = [Diamond("B", TOP)]
    seen = {positives[0]}
    for s in subformulas(phi):
        rep = s.child if isinstance(s, Not) else s
        if isinstance(rep, Top) or rep in seen:
            continue
        seen.add(rep)
        positives.append(rep)
    index: dict[Formula, int] = {}
    for i, p in enumerate(positives):
        index[p] = 2 * i
        index[Not(p)] = 2 * i + 1

    def lit(f: Formula) -> int:
        if isinstance(f, Top):
            return LIT_TOP
        if f == BOTTOM:
            return LIT_BOTTOM
        return index[f]

    kinds, lit_a, lit_b = [], [], []
    diamonds: dict[str, list[int]] = {r: [] for r in "BDA"}
    diamond_args: dict[str, list[int]] = {r: [] for r in "BDA"}
    letter_items: list[tuple[str, int]] = []
    for i, p in enumerate(positives):
        if isinstance(p, Prop):
            kinds.append("prop")
            lit_a.append(0)
            lit_b.append(0)
            letter_items.append((p.name, i))
        elif isinstance(p, Or):
            kinds.append("or")
            lit_a.append(lit(p.left))
            lit_b.append(lit(p.right))
        else:
            assert isinstance(p, Diamond)
            kinds.append(p.rel)
            lit_a.append(lit(p.child))
            lit_b.append(0)
            diamonds[p.rel].append(i)
            diamond_args[p.rel].append(lit(p.child))
    letter_items.sort()
    return ClosureTable(
        formula=phi,
        dialect=dialect,
        positives=positives,
        kinds=kinds,
        lit_a=lit_a,
        lit_b=lit_b,
        index=index,
        letters=[name for name, _ in letter_items],
        letter_pairs=[i for _, i in letter_items],
        diamonds=diamonds,
        diamond_args=diamond_args,
        base_pairs=[i for i, k in enumerate(kinds) if k != "or"],
        or_pairs=[i for i, k in enumerate(kinds) if k == "or"],
    )


def lit_true(bits: int, lit: int) -> bool:
    if lit == LIT_TOP:
        return True
    if lit == LIT_BOTTOM:
        return False
    return bool((bits >> (lit >> 1)) & 1) != bool(lit & 1)


def _mask(flags: Sequence[bool]) -> int:
    out = 0
    for k, flag in enumerate(flags):
        if flag:
            out |= 1 << k
    return out


@dataclass(frozen=True, eq=False)
class Atom:
    """A maximal consistent subset of the closure, optionally with markings.

    Request and observable masks are indexed by the position of a diamond in
    ``table.diamonds[rel]``.  ``pending``/``satisfied`` only matter in the
    ABD dialect; every A-diamond whose bit is in neither mask is forbidden.
    """

    table: ClosureTable = field(repr=False)
    bits: int
    pending: int = 0
    satisfied: int = 0
    props: int = field(init=False)
    req_b: int = field(init=False)
    obs_b: int = field(init=False)
    req_d: int = field(init=False)
    obs_d: int = field(init=False)
    req_a: int = field(init=False)
    obs_a: int = field(init=False)

    def __post_init__(self) -> None:
        t, bits = self.table, self.bits
        put = object.__setattr__
        put(self, "props", _mask([(bits >> i) & 1 for i in t.letter_pairs]))
        for rel in "BDA":
            put(self, f"req_{rel.lower()}", _mask([(bits >> i) & 1 for i in t.diamonds[rel]]))
            put(self, f"obs_{rel.lower()}", _mask([lit_true(bits, a) for a in t.diamond_args[rel]]))

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.bits, self.pending, self.satisfied)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Atom) or self.key != other.key:
            return False
        return self.table is other.table or self.table.positives == other.table.positives

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: Atom) -> bool:
        return self.key < other.key

    def __contains__(self, f: Formula) -> bool:
        lit = self.table.literal(f)
        return lit_true(self.bits, lit)

    @property
    def is_point(self) -> bool:
        return not (self.bits & 1)

    def mark(self, k: int) -> Mark:
        if (self.pending >> k) & 1:
            return Mark.PENDING
        if (self.satisfied >> k) & 1:
            return Mark.SATISFIED
        return Mark.FORBIDDEN

    @property
    def n_pending(self) -> int:
        return bin(self.pending).count("1")

    @property
    def is_final(self) -> bool:
        return self.pending == 0

    def base(self) -> Atom:
        return self if not (self.pending or self.satisfied) else Atom(self.table, self.bits)

    def member_list(self) -> list[str]:
        """Sorted textual closure members, the debug dump format."""
        t = self.table
        out = []
        for i, p in enumerate(t.positives):
            out.append(to_text(p) if (self.bits >> i) & 1 else to_text(neg(p)))
        if t.dialect == "abd":
            for k, lit in enumerate(t.diamond_args["A"]):
                name = {Mark.PENDING: "pending", Mark.SATISFIED: "satisfied", Mark.FORBIDDEN: "forbidden"}
                out.append(f"@{name[self.mark(k)]}({to_text(t.member(lit))})")
        return sorted(out)

    def __repr__(self) -> str:
        return "{" + ", ".join(self.member_list()) + "}"


def or_closure(table: ClosureTable, base_bits: int) -> int:
    """Complete a letters-and-diamonds assignment with its disjunctions."""
    bits = base_bits
    for i in table.or_pairs:
        if lit_true(bits, table.lit_a[i]) or lit_true(bits, table.lit_b[i]):
            bits |= 1 << i
        else:
            bits &= ~(1 << i)
    return bits


def base_bits(table: ClosureTable, props: int, req_b: int, req_d: int, req_a: int = 0) -> int:
    bits = 0
    for k, i in enumerate(table.letter_pairs):
        if (props >> k) & 1:
            bits |= 1 << i
    for rel, mask in (("B", req_b), ("D", req_d), ("A", req_a)):
        for k, i in enumerate(table.diamonds[rel]):
            if (mask >> k) & 1:
                bits |= 1 << i
    return bits


def make_atom(table: ClosureTable, props: int, req_b: int, req_d: int, req_a: int = 0,
              pending: int = 0, satisfied: int = 0) -> Atom:
    """The unique atom with the given letters and requests."""
    return Atom(table, or_closure(table, base_bits(table, props, req_b, req_d, req_a)),
                pending, satisfied)


def point_marking(atom: Atom) -> tuple[int, int]:
    """Markings of a point atom: fixed by its A-requests and observables."""
    sat = atom.obs_a
    return atom.req_a & ~sat, sat


def is_consistent(atom: Atom) -> bool:
    """Check the atom conditions, including markings in the ABD dialect."""
    t = atom.table
    if or_closure(t, atom.bits) != atom.bits:
        return False
    full = (1 << t.n("A")) - 1
    if t.dialect == "bd":
        return atom.pending == 0 and atom.satisfied == 0
    if atom.pending & atom.satisfied or (atom.pending | atom.satisfied) & ~full:
        return False
    if atom.obs_a & ~atom.satisfied:
        return False
    if atom.is_point:
        # [A]psi at a point forces psi; equivalently obs_A is inside req_A.
        if atom.obs_a & ~atom.req_a:
            return False
        return (atom.pending, atom.satisfied) == point_marking(atom)
    return True


def base_assignments(table: ClosureTable) -> Iterator[int]:
    base = table.base_pairs
    if len(base) > 62 or (1 << len(base)) > ENUM_LIMIT:
        raise ClosureError(f"closure too large to enumerate ({len(base)} independent members)")
    for combo in range(1 << len(base)):
        bits = 0
        for j, i in enumerate(base):
            if (combo >> j) & 1:
                bits |= 1 << i
        yield or_closure(table, bits)


def markings(atom: Atom) -> Iterator[tuple[int, int]]:
    """All (pending, satisfied) masks compatible with a base atom."""
    if atom.is_point:
        yield point_marking(atom)
        return
    n = atom.table.n("A")
    free = [k for k in range(n) if not (atom.obs_a >> k) & 1]
    for choice in itertools.product((Mark.PENDING, Mark.SATISFIED, Mark.FORBIDDEN), repeat=len(free)):
        pend, sat = 0, atom.obs_a
        for k, m in zip(free, choice):
            if m is Mark.PENDING:
                pend |= 1 << k
            elif m is Mark.SATISFIED:
                sat |= 1 << k
        yield pend, sat


def enumerate_atoms(table: ClosureTable, dialect: str | None = None) -> list[Atom]:
    """All atoms of the closure, marked ones in the ABD dialect."""
    dialect = dialect or table.dialect
    out: list[Atom] = []
    for bits in base_assignments(table):
        a = Atom(table, bits)
        if dialect == "bd":
            out.append(a)
            continue
        if a.is_point and a.obs_a & ~a.req_a:
            continue
        for pend, sat in markings(a):
            out.append(Atom(table, bits, pend, sat))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# Projections


_ATTR = {"B": ("req_b", "obs_b"), "D": ("req_d", "obs_d"), "A": ("req_a", "obs_a")}


def _formulas(table: ClosureTable, rel: str, mask: int) -> frozenset[Formula]:
    return frozenset(table.member(a) for k, a in enumerate(table.diamond_args[rel]) if (mask >> k) & 1)


def req(atom: Atom, rel: str) -> frozenset[Formula]:
    return _formulas(atom.table, rel, getattr(atom, _ATTR[rel][0]))


def obs(atom: Atom, rel: str) -> frozenset[Formula]:
    return _formulas(atom.table, rel, getattr(atom, _ATTR[rel][1]))


def box_(atom: Atom, rel: str) -> frozenset[Formula]:
    """Formulas psi with [rel]psi in the atom."""
    t = atom.table
    mask = getattr(atom, _ATTR[rel][0])
    return frozenset(neg(t.member(a)) for k, a in enumerate(t.diamond_args[rel]) if not (mask >> k) & 1)


def is_initial(atom: Atom) -> bool:
    return atom.req_b == 0


def b_succ(upper: Atom, lower: Atom) -> bool:
    """``upper ->_B lower``: ``upper`` may label the one-point extension of ``lower``."""
    if upper.req_b != lower.req_b | lower.obs_b:
        return False
    if upper.table.dialect != "abd":
        return True
    keep = lower.satisfied | ~(lower.pending | lower.satisfied)  # satisfied or forbidden
    keep |= ~upper.obs_a & lower.pending
    n = (1 << upper.table.n("A")) - 1
    keep &= n
    return (upper.pending & keep) == (lower.pending & keep) and (upper.satisfied & keep) == (lower.satisfied & keep)


def d_succ(outer: Atom, inner: Atom) -> bool:
    """``outer ->_D inner``: ``inner`` may label an interval strictly inside."""
    return (inner.req_d | inner.obs_d) & ~outer.req_d == 0


def is_b_reflexive(atom: Atom) -> bool:
    return b_succ(atom, atom)


def is_d_reflexive(atom: Atom) -> bool:
    return d_succ(atom, atom)


def mark_step(upper_bits_obs_a: int, lower: Atom) -> tuple[int, int]:
    """Markings forced on the atom above ``lower`` whose A-observables are given."""
    pend = lower.pending & ~upper_bits_obs_a
    sat = lower.satisfied | (lower.pending & upper_bits_obs_a)
    return pend, sat


def potential(n_b: int, req_b: int, obs_b_only: int, n_d: int, req_d: int, true_letters: int,
              pending: int = 0) -> int:
    """Column potential from counts: B part, D part, letters, pending marks."""
    return (2 * n_b - 2 * req_b - obs_b_only) + (n_d - req_d) + true_letters + pending


def _popcount(x: int) -> int:
    return bin(x).count("1")


def delta_up(atom: Atom) -> int:
    """Upper bound on the number of distinct atoms above ``atom`` in a column."""
    t = atom.table
    return potential(
        t.n("B"),
        _popcount(atom.req_b),
        _popcount(atom.obs_b & ~atom.req_b),
        t.n("D"),
        _popcount(atom.req_d),
        _popcount(atom.props),
        atom.n_pending if t.dialect == "abd" else 0,
    )


def potential_bound(table: ClosureTable) -> int:
    return 4 * table.phi_size + 1
