"""Exponential-corridor tiling instances and their ABD encoding.

A tiling covers ``N x {0..C}`` with tiles ``0..T``: every column starts
with tile 0 and ends with tile ``T``, horizontal neighbours are related by
``h`` and vertical ones by ``v``.  ``C = 2^c - 1`` is given by its bit width.
A positive instance has an eventually periodic tiling, so a finite grid of
columns ``0..prefix+period`` whose column ``prefix`` repeats as the last one
is enough.

Models of the encoding list the grid column by column: point ``n`` stands
for cell ``(n // (C+1), n % (C+1))`` and carries one tile letter ``t<i>``,
the row number in bits ``b1..bc`` (``b1`` most significant) and an optional
marker ``p`` for the repeated column.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .formula import (
    PI,
    TOP,
    Formula,
    Prop,
    box,
    conj,
    conj_all,
    diamond,
    disj_all,
    globally,
    iff,
    implies,
    neg,
)
from .semantics import Model


class TilingError(ValueError):
    pass


class ConformanceError(ValueError):
    """A model is not shaped like an encoded grid; ``part`` names the broken conjunct."""

    def __init__(self, part: str, message: str) -> None:
        super().__init__(f"{part}: {message}")
        self.part = part


@dataclass(frozen=True)
class TilingInstance:
    tiles: int
    bits: int
    h: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    v: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.tiles < 0:
            raise TilingError("tile count must be non-negative")
        if self.bits < 1:
            raise TilingError("need at least one bit")
        for i, j in itertools.chain(self.h, self.v):
            if not (0 <= i <= self.tiles and 0 <= j <= self.tiles):
                raise TilingError(f"pair ({i},{j}) uses an unknown tile")

    @property
    def height(self) -> int:
        """``C``: the top row index."""
        return (1 << self.bits) - 1

    @classmethod
    def parse(cls, text: str) -> TilingInstance:
        """Read ``tiles: T``, ``bits: c`` and any number of ``h: i j`` / ``v: i j`` lines."""
        tiles = bits = None
        h: set[tuple[int, int]] = set()
        v: set[tuple[int, int]] = set()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(":")
            key, vals = key.strip(), rest.split()
            try:
                nums = [int(x) for x in vals]
            except ValueError:
                raise TilingError(f"line {lineno}: expected integers") from None
            if key in ("tiles", "bits") and len(nums) == 1:
                if key == "tiles":
                    tiles = nums[0]
                else:
                    bits = nums[0]
            elif key in ("h", "v") and len(nums) == 2:
                (h if key == "h" else v).add((nums[0], nums[1]))
            else:
                raise TilingError(f"line {lineno}: cannot read {raw.strip()!r}")
        if tiles is None or bits is None:
            raise TilingError("missing 'tiles:' or 'bits:' line")
        return cls(tiles, bits, frozenset(h), frozenset(v))

    def dump(self) -> str:
        lines = [f"tiles: {self.tiles}", f"bits: {self.bits}"]
        lines += [f"h: {i} {j}" for i, j in sorted(self.h)]
        lines += [f"v: {i} {j}" for i, j in sorted(self.v)]
        return "\n".join(lines) + "\n"


def grid_point(x: int, y: int, height: int) -> int:
    """Model point of grid cell ``(x, y)``."""
    return x * (height + 1) + y


def grid_cell(n: int, height: int) -> tuple[int, int]:
    return n // (height + 1), n % (height + 1)


@dataclass
class TilingWitness:
    prefix: int
    period: int
    columns: list[tuple[int, ...]]

    def tile(self, x: int, y: int) -> int:
        return self.columns[x][y]

    def problems(self, inst: TilingInstance) -> list[str]:
        """Broken tiling conditions; empty for a valid witness."""
        out = []
        top = inst.height
        if self.prefix < 0 or self.period < 1:
            out.append("prefix must be >= 0 and period >= 1")
        if len(self.columns) != self.prefix + self.period + 1:
            out.append("column count must be prefix + period + 1")
            return out
        for x, col in enumerate(self.columns):
            if len(col) != top + 1:
                out.append(f"column {x} has {len(col)} cells")
                continue
            if col[0] != 0 or col[top] != inst.tiles:
                out.append(f"column {x} does not run from 0 to {inst.tiles}")
            for y in range(top):
                if (col[y], col[y + 1]) not in inst.v:
                    out.append(f"vertical ({x},{y})")
        for x in range(len(self.columns) - 1):
            for y in range(top + 1):
                if (self.columns[x][y], self.columns[x + 1][y]) not in inst.h:
                    out.append(f"horizontal ({x},{y})")
        if self.columns[self.prefix] != self.columns[-1]:
            out.append("column prefix differs from the last column")
        return out

    def to_dict(self) -> dict:
        return {"prefix": self.prefix, "period": self.period, "columns": [list(c) for c in self.columns]}


def legal_columns(inst: TilingInstance) -> list[tuple[int, ...]]:
    """Columns meeting the boundary and vertical conditions."""
    top = inst.height
    out = []

    def grow(col: list[int]) -> None:
        if len(col) == top + 1:
            if col[-1] == inst.tiles:
                out.append(tuple(col))
            return
        for t in range(inst.tiles + 1):
            if (col[-1], t) in inst.v:
                grow(col + [t])

    grow([0])
    return out


def brute_force_tiling(inst: TilingInstance, max_prefix: int, max_period: int) -> TilingWitness | None:
    """First witness by ``(prefix + period, prefix)``, searching column sequences."""
    cols = legal_columns(inst)
    nxt = {a: [b for b in cols if all((p, q) in inst.h for p, q in zip(a, b))] for a in cols}

    def paths(length: int) -> Iterator[list[tuple[int, ...]]]:
        def go(seq: list[tuple[int, ...]]) -> Iterator[list[tuple[int, ...]]]:
            if len(seq) == length:
                yield seq
                return
            for b in nxt[seq[-1]]:
                yield from go(seq + [b])

        for a in cols:
            yield from go([a])

    for total in range(1, max_prefix + max_period + 1):
        for prefix in range(0, min(max_prefix, total - 1) + 1):
            period = total - prefix
            if period > max_period:
                continue
            for seq in paths(total + 1):
                if seq[prefix] == seq[-1]:
                    return TilingWitness(prefix, period, list(seq))
    return None


def oracle_cap(inst: TilingInstance, max_prefix: int, max_period: int) -> int:
    """Largest model size needed to hold any witness within the bounds."""
    return (max_prefix + max_period + 1) * (inst.height + 1) - 1


# ---------------------------------------------------------------------------
# Encoding


def tile_letter(i: int) -> Prop:
    return Prop(f"t{i}")


def bit_letter(i: int) -> Prop:
    return Prop(f"b{i}")


MARK = Prop("p")


def _start(f: Formula) -> Formula:
    """``f`` at the first point (for intervals longer than a point)."""
    return diamond("B", conj(PI, f))


def _end(f: Formula) -> Formula:
    """``f`` at the last point."""
    return diamond("A", conj(PI, f))


def _pair(i: int, j: int) -> Formula:
    return conj(_start(tile_letter(i)), _end(tile_letter(j)))


def encode_parts(inst: TilingInstance) -> dict[str, Formula]:
    """Named conjuncts of the encoding, in assembly order."""
    tiles = [tile_letter(i) for i in range(inst.tiles + 1)]
    bits = [bit_letter(i) for i in range(1, inst.bits + 1)]
    c = inst.bits
    two_points = conj(diamond("B", TOP), box("B", PI))
    all_zero = conj_all(neg(b) for b in bits)
    all_one = conj_all(bits)

    exists = globally(implies(PI, disj_all(tiles)))
    unique = globally(implies(PI, conj_all(
        neg(conj(a, b)) for a, b in itertools.combinations(tiles, 2))))
    boundaries = conj(_start(all_zero), box("A", all_one))

    def same_from(k: int) -> Formula:
        return conj_all(iff(_start(bits[j]), _end(bits[j])) for j in range(k, c))

    increments = []
    for k in range(c):
        increments.append(conj_all([
            _start(neg(bits[k])),
            _end(bits[k]),
            conj_all(iff(_start(bits[j]), _end(bits[j])) for j in range(k)),
            conj_all(conj(_start(bits[j]), _end(neg(bits[j]))) for j in range(k + 1, c)),
        ]))
    wrap = conj(conj_all(_start(b) for b in bits), conj_all(_end(neg(b)) for b in bits))
    counter = globally(implies(two_points, wrap | disj_all(increments)))

    same_row = conj(neg(PI), same_from(0))
    next_in_row = conj(same_row, box("B", neg(same_row)))
    top_bottom = globally(conj(
        implies(conj(PI, all_zero), tiles[0]),
        implies(conj(PI, all_one), tiles[-1]),
    ))
    horizontal = globally(implies(
        conj(PI, diamond("A", same_row)),
        diamond("A", conj(next_in_row, disj_all(_pair(i, j) for i, j in sorted(inst.h)))),
    ))
    vertical = globally(implies(
        conj(two_points, neg(conj_all(_start(b) for b in bits))),
        disj_all(_pair(i, j) for i, j in sorted(inst.v)),
    ))
    marked_column = diamond("B", diamond("A", conj_all([
        MARK, _start(all_zero), conj_all(_end(b) for b in bits)])))
    repeats_last = globally(implies(conj(MARK, PI), diamond("A", conj_all([
        same_row,
        box("A", neg(same_row)),
        conj_all(iff(_start(t), _end(t)) for t in tiles),
    ]))))
    return {
        "exists": exists,
        "unique": unique,
        "boundaries": boundaries,
        "counter": counter,
        "top_bottom": top_bottom,
        "horizontal": horizontal,
        "vertical": vertical,
        "marked_column": marked_column,
        "repeats_last": repeats_last,
    }


def encode(inst: TilingInstance) -> Formula:
    return conj_all(encode_parts(inst).values())


def encode_letters(inst: TilingInstance) -> list[str]:
    return ([f"t{i}" for i in range(inst.tiles + 1)]
            + [f"b{i}" for i in range(1, inst.bits + 1)] + ["p"])


def witness_model(inst: TilingInstance, w: TilingWitness) -> Model:
    """The model encoding a witness, with the ``prefix`` column marked."""
    top = inst.height
    points = []
    for x, col in enumerate(w.columns):
        for y in range(top + 1):
            pt = {f"t{col[y]}"}
            pt |= {f"b{i + 1}" for i in range(inst.bits) if (y >> (inst.bits - 1 - i)) & 1}
            if x == w.prefix:
                pt.add("p")
            points.append(pt)
    return Model.of(points)


def decode_model(model: Model, inst: TilingInstance) -> TilingWitness:
    """Read the grid back from a model of the encoding."""
    top = inst.height
    n = len(model.points)
    grid: list[int] = []
    for k, pt in enumerate(model.points):
        here = [i for i in range(inst.tiles + 1) if f"t{i}" in pt]
        if not here:
            raise ConformanceError("exists", f"point {k} has no tile")
        if len(here) > 1:
            raise ConformanceError("unique", f"point {k} has tiles {here}")
        grid.append(here[0])
        row = sum(1 << (inst.bits - 1 - i) for i in range(inst.bits) if f"b{i + 1}" in pt)
        if row != k % (top + 1):
            raise ConformanceError("counter", f"point {k} encodes row {row}")
    if n % (top + 1):
        raise ConformanceError("boundaries", f"{n} points is not a multiple of {top + 1}")
    width = n // (top + 1)
    columns = [tuple(grid[x * (top + 1):(x + 1) * (top + 1)]) for x in range(width)]
    marked = [x for x in range(width)
              if all("p" in model.points[grid_point(x, y, top)] for y in range(top + 1))]
    if not marked or marked[0] >= width - 1:
        raise ConformanceError("marked_column", "no marked column before the last one")
    prefix = marked[0]
    return TilingWitness(prefix, width - 1 - prefix, columns)
