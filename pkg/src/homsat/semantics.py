"""Reference semantics: homogeneous models, brute-force search and compass structures.

Everything here is deliberately direct.  The solver is tested against these
functions, so they avoid any of the solver's shortcuts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import kernels
from .atoms import (
    Atom,
    ClosureTable,
    b_succ,
    build_closure,
    is_consistent,
)
from .formula import Diamond, Formula, Not, Or, Prop, Top, letters, relations, subformulas


@dataclass(frozen=True)
class Model:
    """A finite linear order 0..N with the letters true at each point."""

    points: tuple[frozenset[str], ...]

    @classmethod
    def of(cls, points: Iterable[Iterable[str]]) -> Model:
        pts = tuple(frozenset(p) for p in points)
        if not pts:
            raise ValueError("a model needs at least one point")
        return cls(pts)

    @property
    def N(self) -> int:
        return len(self.points) - 1

    def letters_on(self, x: int, y: int) -> frozenset[str]:
        """Letters true at every point of [x, y]."""
        out = self.points[x]
        for z in range(x + 1, y + 1):
            out = out & self.points[z]
        return out

    def to_json(self) -> str:
        return json.dumps({"N": self.N, "points": [sorted(p) for p in self.points]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Model:
        data = json.loads(text)
        model = cls.of(data["points"])
        if data.get("N", model.N) != model.N:
            raise ValueError("N does not match the number of points")
        return model


@dataclass(frozen=True)
class Program:
    """Post-order node list for the evaluation kernels."""

    ops: tuple[int, ...]
    arg_a: tuple[int, ...]
    arg_b: tuple[int, ...]
    index: dict
    letters: tuple[str, ...]

    @property
    def raw(self):
        return (list(self.ops), list(self.arg_a), list(self.arg_b))


def compile_program(roots: Sequence[Formula], alphabet: Sequence[str] | None = None) -> Program:
    """Compile every subformula of ``roots``; the last node evaluates the last root."""
    names = sorted(set(alphabet) if alphabet is not None else {n for r in roots for n in letters(r)})
    slot = {n: i for i, n in enumerate(names)}
    index: dict[Formula, int] = {}
    ops: list[int] = []
    arg_a: list[int] = []
    arg_b: list[int] = []

    def emit(op: int, a: int, b: int) -> None:
        ops.append(op)
        arg_a.append(a)
        arg_b.append(b)

    for r in roots:
        for f in subformulas(r):
            if f in index:
                continue
            index[f] = len(ops)
            if isinstance(f, Prop):
                emit(kernels.OP_PROP, slot[f.name], 0)
            elif isinstance(f, Top):
                emit(kernels.OP_TOP, 0, 0)
            elif isinstance(f, Not):
                emit(kernels.OP_NOT, index[f.child], 0)
            elif isinstance(f, Or):
                emit(kernels.OP_OR, index[f.left], index[f.right])
            else:
                assert isinstance(f, Diamond)
                emit({"B": kernels.OP_B, "D": kernels.OP_D, "A": kernels.OP_A}[f.rel], index[f.child], 0)
    root = index[roots[-1]]
    if root != len(ops) - 1:
        # The kernels read the last node; alias the root there.
        emit(kernels.OP_OR, root, root)
    return Program(tuple(ops), tuple(arg_a), tuple(arg_b), index, tuple(names))


class TruthTable:
    """Truth of compiled formulas on every interval of one model."""

    def __init__(self, prog: Program, model: Model) -> None:
        slot = {n: i for i, n in enumerate(prog.letters)}
        masks = []
        for p in model.points:
            m = 0
            for name in p:
                if name in slot:
                    m |= 1 << slot[name]
            masks.append(m)
        self.prog = prog
        self.n = len(model.points)
        self.data = kernels.eval_table(prog.raw, masks)

    def holds(self, f: Formula, x: int, y: int) -> bool:
        if not 0 <= x <= y < self.n:
            raise IndexError(f"[{x}, {y}] is not an interval of the model")
        i = self.prog.index[f]
        return bool(self.data[i * self.n * self.n + x * self.n + y])


def _check_dialect(f: Formula, dialect: str) -> None:
    if dialect not in ("bd", "abd"):
        raise ValueError(f"unknown dialect {dialect!r}")
    if dialect == "bd" and "A" in relations(f):
        raise ValueError("the A modality is not part of the bd dialect")


def eval_formula(f: Formula, model: Model, x: int = 0, y: int | None = None) -> bool:
    """Truth of ``f`` on ``[x, y]`` (default: the whole model)."""
    y = model.N if y is None else y
    return TruthTable(compile_program([f]), model).holds(f, x, y)


def decode_model(index: int, alphabet: Sequence[str], npoints: int) -> Model:
    L = len(alphabet)
    pts = []
    for x in range(npoints):
        mask = (index >> (L * (npoints - 1 - x))) & ((1 << L) - 1)
        pts.append({alphabet[j] for j in range(L) if (mask >> j) & 1})
    return Model.of(pts)


# Largest valuation space (in bits) the brute-force search will walk.
MAX_ENUM_BITS = 40


class EnumerationBudget(ValueError):
    pass


def brute_force_sat(f: Formula, max_n: int, dialect: str = "abd") -> Model | None:
    """First model of size at most ``max_n + 1`` satisfying ``f`` on [0, N].

    Models are tried by increasing N, then in lexicographic order of the
    point valuations (point 0 first, letters sorted).
    """
    _check_dialect(f, dialect)
    prog = compile_program([f])
    alphabet = prog.letters
    if len(alphabet) * (max_n + 1) > MAX_ENUM_BITS:
        raise EnumerationBudget(f"{len(alphabet)} letters over {max_n + 1} points exceeds the enumeration budget")
    for n in range(max_n + 1):
        idx = kernels.first_model(prog.raw, len(alphabet), n + 1)
        if idx >= 0:
            return decode_model(idx, alphabet, n + 1)
    return None


def enumerate_models(alphabet: Sequence[str], max_n: int) -> Iterator[Model]:
    """All models up to ``max_n`` in the brute-force search order."""
    L = len(alphabet)
    for n in range(max_n + 1):
        for idx in range(1 << (L * (n + 1))):
            yield decode_model(idx, sorted(alphabet), n + 1)


# ---------------------------------------------------------------------------
# Compass structures


@dataclass
class Violation:
    kind: str
    x: int
    y: int
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} at ({self.x},{self.y}) {self.detail}".rstrip()


class Compass:
    """Atoms on the triangle ``0 <= x <= y <= N``; ``rows[y][x]`` labels ``[x, y]``."""

    def __init__(self, table: ClosureTable, rows: list[list[Atom]]) -> None:
        self.table = table
        self.rows = rows
        for y, row in enumerate(rows):
            if len(row) != y + 1:
                raise ValueError(f"row {y} has {len(row)} cells, expected {y + 1}")

    @property
    def N(self) -> int:
        return len(self.rows) - 1

    def at(self, x: int, y: int) -> Atom:
        return self.rows[y][x]

    def atoms(self) -> list[Atom]:
        return sorted({a for row in self.rows for a in row})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Compass) and self.rows == other.rows

    def to_json(self) -> str:
        atoms = self.atoms()
        idx = {a: i for i, a in enumerate(atoms)}
        data = {
            "N": self.N,
            "atoms": [a.member_list() for a in atoms],
            "grid": [[idx[a] for a in row] for row in self.rows],
        }
        return json.dumps(data, sort_keys=True)

    def render(self) -> str:
        """Triangle with row N on top; cells are atom indices from :meth:`to_json`."""
        atoms = self.atoms()
        idx = {a: i for i, a in enumerate(atoms)}
        width = max(1, len(str(len(atoms) - 1)))
        ywidth = len(str(self.N))
        lines = []
        for y in range(self.N, -1, -1):
            cells = " ".join(str(idx[a]).rjust(width) for a in self.rows[y])
            lines.append(f"{str(y).rjust(ywidth)} | {cells}")
        lines.append(" " * ywidth + " +" + "-" * ((width + 1) * (self.N + 1)))
        lines.append(" " * (ywidth + 3) + " ".join(str(x % 10).rjust(width) for x in range(self.N + 1)))
        return "\n".join(lines)


    def to_dot(self) -> str:
        """Graphviz grid: one node per cell, placed at its coordinates, labelled with its atom index."""
        atoms = self.atoms()
        idx = {a: i for i, a in enumerate(atoms)}
        lines = ["digraph compass {", "  node [shape=box, fontname=monospace];"]
        for y, row in enumerate(self.rows):
            for x, a in enumerate(row):
                lines.append(f'  "c{x}_{y}" [label="{idx[a]}", pos="{x},{y}!"];')
        for y in range(self.N):
            for x in range(y + 1):
                lines.append(f'  "c{x}_{y + 1}" -> "c{x}_{y}";')
        legend = "\\l".join(f"{i}: {' '.join(a.member_list())}" for i, a in enumerate(atoms))
        lines.append(f'  legend [shape=note, label="{legend}\\l"];')
        lines.append("}")
        return "\n".join(lines)


def compass_from_json(text: str, f: Formula, dialect: str = "abd") -> Compass:
    """Rebuild a compass from its JSON dump, resolving atoms against ``CL(f)``."""
    from .formula import parse

    table = build_closure(f, dialect)
    data = json.loads(text)
    names = {"pending": 0, "satisfied": 1, "forbidden": 2}
    atoms = []
    for members in data["atoms"]:
        bits = pend = sat = 0
        a_args = {arg: k for k, arg in enumerate(table.diamond_args["A"])}
        for m in members:
            if m.startswith("@"):
                status, _, rest = m[1:].partition("(")
                k = a_args[table.literal(parse(rest[:-1]))]
                if names[status] == 0:
                    pend |= 1 << k
                elif names[status] == 1:
                    sat |= 1 << k
                continue
            lit = table.literal(parse(m))
            if not lit & 1:
                bits |= 1 << (lit >> 1)
        atoms.append(Atom(table, bits, pend, sat))
    rows = [[atoms[i] for i in row] for row in data["grid"]]
    if len(rows) != data["N"] + 1:
        raise ValueError("grid height does not match N")
    return Compass(table, rows)


def model_to_compass(model: Model, f: Formula, dialect: str = "abd") -> Compass:
    """The compass structure induced by a model; markings track A-requests of each column's start."""
    _check_dialect(f, dialect)
    table = build_closure(f, dialect)
    pos = table.positives
    prog = compile_program(list(pos) + [f])
    tt = TruthTable(prog, model)
    n = model.N
    a_args = [table.member(lit) for lit in table.diamond_args["A"]]
    a_diamonds = [table.positives[i] for i in table.diamonds["A"]]
    rows: list[list[Atom]] = []
    for y in range(n + 1):
        row = []
        for x in range(y + 1):
            bits = 0
            for i, p in enumerate(pos):
                if tt.holds(p, x, y):
                    bits |= 1 << i
            pend = sat = 0
            if dialect == "abd":
                for k, (arg, dia) in enumerate(zip(a_args, a_diamonds)):
                    if any(_holds_lit(tt, arg, x, z) for z in range(x, y + 1)):
                        sat |= 1 << k
                    elif tt.holds(dia, x, x):
                        pend |= 1 << k
            row.append(Atom(table, bits, pend, sat))
        rows.append(row)
    return Compass(table, rows)


def _holds_lit(tt: TruthTable, f: Formula, x: int, y: int) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Not) and isinstance(f.child, Top):
        return False
    if isinstance(f, Not) and f not in tt.prog.index:
        return not tt.holds(f.child, x, y)
    return tt.holds(f, x, y)


def compass_to_model(compass: Compass) -> Model:
    t = compass.table
    pts = []
    for x in range(compass.N + 1):
        a = compass.at(x, x)
        pts.append({t.letters[k] for k in range(len(t.letters)) if (a.props >> k) & 1})
    return Model.of(pts)


def validate_compass(compass: Compass, f: Formula | None = None) -> list[Violation]:
    """All violated compass conditions; empty means the structure is valid.

    ``f`` (default: the closure's formula) must hold at the root.
    """
    t = compass.table
    f = t.formula if f is None else f
    n = compass.N
    out: list[Violation] = []
    abd = t.dialect == "abd"
    for y in range(n + 1):
        for x in range(y + 1):
            a = compass.at(x, y)
            if not is_consistent(a):
                out.append(Violation("AtomConsistency", x, y))
    if f not in compass.at(0, n):
        out.append(Violation("InitialFormula", 0, n, "formula not in the root atom"))
    for x in range(n + 1):
        if compass.at(x, x).req_b != 0:
            out.append(Violation("DiagonalBRequest", x, x, "B-requests on a point"))
        for y in range(x, n):
            up, low = compass.at(x, y + 1), compass.at(x, y)
            if up.req_b != low.req_b | low.obs_b:
                out.append(Violation("BConsistency", x, y + 1))
            elif not b_succ(up, low):
                out.append(Violation("MarkingTransition", x, y + 1))
    # Unions over the intervals strictly inside [x, y], by dynamic programming.
    size = n + 1
    ends_g = [[0] * size for _ in range(size)]
    ends_o = [[0] * size for _ in range(size)]
    for y in range(size):
        acc_g = acc_o = 0
        for x in range(y - 1, -1, -1):
            a = compass.at(x + 1, y)
            acc_g |= a.req_d | a.obs_d
            acc_o |= a.obs_d
            ends_g[x][y] = acc_g
            ends_o[x][y] = acc_o
    for x in range(size):
        in_g = in_o = 0
        for y in range(x, size):
            a = compass.at(x, y)
            if in_g & ~a.req_d:
                out.append(Violation("DConsistency", x, y, "inner D-requests or observables not requested"))
            if a.req_d & ~in_o:
                out.append(Violation("DFulfilment", x, y, "D-request not fulfilled inside"))
            in_g |= ends_g[x][y]
            in_o |= ends_o[x][y]
    for x in range(size):
        common = compass.at(x, x).props
        for y in range(x, size):
            common &= compass.at(y, y).props
            if compass.at(x, y).props != common:
                out.append(Violation("Homogeneity", x, y))
    if abd:
        for y in range(size):
            for x in range(y + 1):
                if compass.at(x, y).req_a != compass.at(y, y).req_a:
                    out.append(Violation("AConsistency", x, y))
        for x in range(size):
            if not compass.at(x, n).is_final:
                out.append(Violation("AFulfilment", x, n, "pending A-request at the top row"))
    out.sort(key=lambda v: (v.y, v.x))
    return out
