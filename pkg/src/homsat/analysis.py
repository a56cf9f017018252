"""Column shapes, fingerprints and covering on compass structures.

A column ``x`` of a compass is read bottom-up: ``L(x,x), L(x,x+1), ...,
L(x,N)``.  Its shading groups equal consecutive atoms into blocks.  Two
columns share a class when they visit the same atoms in the same order; in
the ABD dialect the class keeps only the first atom reaching each value of
the potential, since A-requests may flicker along a column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from .atoms import Atom, b_succ, delta_up, is_b_reflexive, is_initial
from .semantics import Compass


@dataclass(frozen=True)
class Shading:
    """Run-length encoded column: ``blocks[i] = (atom, exponent)``."""

    blocks: tuple[tuple[Atom, int], ...]

    @classmethod
    def of(cls, atoms: Sequence[Atom]) -> Shading:
        blocks: list[list] = []
        for a in atoms:
            if blocks and blocks[-1][0] == a:
                blocks[-1][1] += 1
            else:
                blocks.append([a, 1])
        return cls(tuple((a, k) for a, k in blocks))

    def __len__(self) -> int:
        return sum(k for _, k in self.blocks)

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(a for a, _ in self.blocks)

    def expand(self) -> list[Atom]:
        return [a for a, k in self.blocks for _ in range(k)]

    def __getitem__(self, i: int) -> Atom:
        """1-based position lookup: the block whose cumulative range contains ``i``."""
        if not 1 <= i <= len(self):
            raise IndexError(i)
        acc = 0
        for a, k in self.blocks:
            acc += k
            if i <= acc:
                return a
        raise IndexError(i)


@dataclass(frozen=True)
class ShadingClass:
    """Block atoms of a shading with the exponents forgotten."""

    atoms: tuple[Atom, ...]

    def __len__(self) -> int:
        return len(self.atoms)

    def __getitem__(self, i: int) -> Atom:
        return self.atoms[i]

    def next(self, atom: Atom) -> Atom | None:
        """Atom of the block after the one holding ``atom``; ``None`` at the end."""
        i = self.atoms.index(atom)
        return self.atoms[i + 1] if i + 1 < len(self.atoms) else None


def class_of(shading: Shading) -> ShadingClass:
    return ShadingClass(shading.atoms)


class Interner:
    """Hash-consing table handing out dense ids in first-seen order."""

    def __init__(self) -> None:
        self.items: list[Hashable] = []
        self._ids: dict[Hashable, int] = {}

    def __call__(self, item: Hashable) -> int:
        i = self._ids.get(item)
        if i is None:
            i = len(self.items)
            self._ids[item] = i
            self.items.append(item)
        return i

    def __len__(self) -> int:
        return len(self.items)


def is_b_sequence(atoms: Sequence[Atom]) -> bool:
    """Initial start, ->_B steps, growing D-requests and shrinking letters upward."""
    if not atoms or not is_initial(atoms[0]):
        return False
    for lower, upper in zip(atoms, atoms[1:]):
        if not b_succ(upper, lower):
            return False
        if lower.req_d & ~upper.req_d or upper.props & ~lower.props:
            return False
    return True


def is_flat(atoms: Sequence[Atom]) -> bool:
    """Equal atoms only occur in one consecutive block."""
    seen: set[Atom] = set()
    prev = None
    for a in atoms:
        if a != prev and a in seen:
            return False
        seen.add(a)
        prev = a
    return True


def is_decreasing(atoms: Sequence[Atom]) -> bool:
    """The potential strictly drops whenever the atom changes."""
    for lower, upper in zip(atoms, atoms[1:]):
        if lower != upper and not delta_up(upper) < delta_up(lower):
            return False
    return True


def equivalent(s1: Shading, s2: Shading) -> bool:
    return s1.atoms == s2.atoms


def dominates(s1: Shading, s2: Shading) -> bool:
    """``s1 < s2``: the longer ``s1`` reaches every block no later than ``s2`` (aligned at the top)."""
    if not equivalent(s1, s2):
        raise ValueError("dominance compares equivalent shadings only")
    if len(s1) <= len(s2):
        return False
    gap = len(s1) - len(s2)
    acc1 = acc2 = 0
    for (_, k), (_, h) in zip(s1.blocks, s2.blocks):
        acc1 += k
        acc2 += h
        if acc1 > gap + acc2:
            return False
    return True


def column(compass: Compass, x: int) -> list[Atom]:
    return [compass.at(x, y) for y in range(x, compass.N + 1)]


def column_shading(compass: Compass, x: int) -> Shading:
    return Shading.of(column(compass, x))


def minimal_samples(atoms: Sequence[Atom]) -> list[tuple[Atom, int]]:
    """For each potential value along the column, its first atom and offset."""
    out: list[tuple[Atom, int]] = []
    seen: set[int] = set()
    for i, a in enumerate(atoms):
        d = delta_up(a)
        if d not in seen:
            seen.add(d)
            out.append((a, i))
    return out


def shading(compass: Compass, x: int) -> Shading:
    """Shading of column ``x``.

    In ABD one block per potential value, starting where that value is
    first reached and running up to the next such row.
    """
    atoms = column(compass, x)
    if compass.table.dialect == "abd":
        samples = minimal_samples(atoms)
        ends = [i for _, i in samples[1:]] + [len(atoms)]
        return Shading(tuple((a, end - i) for (a, i), end in zip(samples, ends)))
    return Shading.of(atoms)


def shading_class(compass: Compass, x: int) -> ShadingClass:
    return class_of(shading(compass, x))


CLASS_MODES = ("shading", "prefix", "none")


class Analysis:
    """Cached fingerprints, covering and witnesses of one compass.

    ``class_mode`` picks the column class stored in fingerprints:
    ``shading`` uses the whole column, ``prefix`` only the part up to the
    current row (what a left-to-right search can see), ``none`` drops it.
    """

    def __init__(self, compass: Compass, class_mode: str = "shading", extra: int = 1) -> None:
        if class_mode not in CLASS_MODES:
            raise ValueError(f"unknown class mode {class_mode!r}")
        self.compass = compass
        self.class_mode = class_mode
        self.extra = extra
        self.class_ids = Interner()
        self.atom_ids = Interner()
        self._full: dict[int, ShadingClass] = {}
        self._rows: dict[int, list[tuple]] = {}
        self._wit: dict[int, list[int]] = {}

    def cls(self, x: int, y: int) -> Hashable:
        """Class of column ``x`` as seen from row ``y``."""
        if self.class_mode == "none":
            return ()
        if self.class_mode == "prefix":
            atoms = [self.compass.at(x, yy) for yy in range(x, y + 1)]
            if self.compass.table.dialect == "abd":
                return ShadingClass(tuple(a for a, _ in minimal_samples(atoms)))
            return class_of(Shading.of(atoms))
        if x not in self._full:
            self._full[x] = shading_class(self.compass, x)
        return self._full[x]

    def pair(self, x: int, y: int) -> tuple[Hashable, Atom]:
        return self.cls(x, y), self.compass.at(x, y)

    def s_right(self, x: int, y: int) -> frozenset:
        """Pairs of the columns strictly right of ``x`` on row ``y``."""
        return frozenset(self.pair(x2, y) for x2 in range(x + 1, y + 1))

    def _fingerprints(self, y: int) -> list[tuple]:
        if y not in self._rows:
            fps: list[tuple] = [()] * (y + 1)
            right: frozenset = frozenset()
            for x in range(y, -1, -1):
                here = self.pair(x, y)
                fps[x] = (here[0], here[1], right)
                right = right | {here}
            self._rows[y] = fps
        return self._rows[y]

    def fingerprint(self, x: int, y: int) -> tuple:
        return self._fingerprints(y)[x]

    def required(self, x: int, y: int) -> int:
        """Equal-fingerprint columns needed to the right for ``(x, y)`` to be covered."""
        return max(1, delta_up(self.compass.at(x, y)) + self.extra)

    def cover(self, x: int, y: int) -> list[int] | None:
        """The covering columns of ``(x, y)``, or ``None`` when it is a witness."""
        fps = self._fingerprints(y)
        need = self.required(x, y)
        same = [x2 for x2 in range(x + 1, y + 1) if fps[x2] == fps[x]]
        return same[:need] if len(same) >= need else None

    def is_covered(self, x: int, y: int) -> bool:
        return self.cover(x, y) is not None

    def witnesses(self, y: int) -> list[int]:
        if y not in self._wit:
            self._wit[y] = [x for x in range(y + 1) if not self.is_covered(x, y)]
        return self._wit[y]

    def blueprint(self, y: int) -> list[tuple[Hashable, Atom]]:
        return [self.pair(x, y) for x in self.witnesses(y)]

    def dump_blueprint(self, y: int) -> str:
        """One ``classId:atomId`` line per witness."""
        return "\n".join(f"{self.class_ids(c)}:{self.atom_ids(a)}" for c, a in self.blueprint(y))

    def closest_witness(self, x: int, y: int) -> int:
        """``x`` itself when uncovered, else the nearest witness to the right sharing its fingerprint."""
        wit = set(self.witnesses(y))
        if x in wit:
            return x
        fp = self.fingerprint(x, y)
        for x2 in range(x + 1, y + 1):
            if x2 in wit and self.fingerprint(x2, y) == fp:
                return x2
        raise ValueError(f"no witness covers ({x},{y})")


def is_covered_in_sequence(seq: Sequence[tuple[Hashable, Atom]], i: int, extra: int = 1) -> bool:
    """Coverage computed on a pair sequence alone, as for a row blueprint."""
    if not 0 <= i < len(seq):
        raise IndexError(i)

    def right(j: int) -> frozenset:
        return frozenset(seq[j + 1:])

    need = max(1, delta_up(seq[i][1]) + extra)
    mine = right(i)
    same = sum(1 for j in range(i + 1, len(seq)) if seq[j] == seq[i] and right(j) == mine)
    return same >= need


def contract(compass: Compass, y: int, y2: int, analysis: Analysis | None = None) -> Compass:
    """Remove rows ``y+1..y2`` when rows ``y`` and ``y2`` have the same blueprint.

    Rows up to ``y`` are kept; cells above ``y`` on old columns copy the
    closest witness column from row ``y2 + delta`` onward; new columns are
    shifted down by ``delta``.
    """
    an = analysis or Analysis(compass)
    if not y < y2 <= compass.N:
        raise ValueError("need y < y2 <= N")
    if an.blueprint(y) != an.blueprint(y2):
        raise ValueError("rows do not share a blueprint")
    delta = y2 - y
    wit_y, wit_y2 = an.witnesses(y), an.witnesses(y2)
    bij = dict(zip(wit_y, wit_y2))
    n_new = compass.N - delta
    rows: list[list[Atom]] = []
    for yy in range(n_new + 1):
        row = []
        for xx in range(yy + 1):
            if yy <= y:
                row.append(compass.at(xx, yy))
            elif xx > y:
                row.append(compass.at(xx + delta, yy + delta))
            else:
                target = bij[an.closest_witness(xx, y)]
                row.append(compass.at(target, yy + delta))
        rows.append(row)
    return Compass(compass.table, rows)


def repeated_blueprints(an: Analysis) -> list[tuple[int, int]]:
    """Pairs ``y < y2`` of rows with equal blueprints, closest pairs first."""
    seen: dict[tuple, int] = {}
    out = []
    for y in range(an.compass.N + 1):
        key = tuple(an.blueprint(y))
        if key in seen:
            out.append((seen[key], y))
        seen[key] = y
    return out


def contract_fully(compass: Compass, class_mode: str = "shading") -> Compass:
    """Contract repeatedly until all row blueprints differ."""
    while True:
        an = Analysis(compass, class_mode)
        pairs = repeated_blueprints(an)
        if not pairs:
            return compass
        y, y2 = pairs[0]
        compass = contract(compass, y, y2, an)


# ---------------------------------------------------------------------------
# Structural checks.  Each returns human-readable violations, empty when fine.


def check_b_step(compass: Compass) -> list[str]:
    """A column step that adds B-requests starts from a B-irreflexive atom."""
    out = []
    for x in range(compass.N + 1):
        for y in range(x, compass.N):
            low, up = compass.at(x, y), compass.at(x, y + 1)
            if low.req_b != up.req_b and is_b_reflexive(low):
                out.append(f"bstep at ({x},{y})")
    return out


def _same_unmarked(a: Atom, b: Atom) -> bool:
    return (a.props, a.req_b, a.req_d) == (b.props, b.req_b, b.req_d)


def check_b_determinization(compass: Compass) -> list[str]:
    """Adjacent column cells agree iff the lower one is B-reflexive with equal letters and D-requests.

    In ABD atoms are compared without their A-part, which follows the diagonal.
    """
    out = []
    abd = compass.table.dialect == "abd"
    for x in range(compass.N + 1):
        for y in range(x, compass.N):
            low, up = compass.at(x, y), compass.at(x, y + 1)
            same = _same_unmarked(low, up) if abd else low == up
            cond = is_b_reflexive(low) and low.props == up.props and low.req_d == up.req_d
            if same != cond:
                out.append(f"bdeterminization at ({x},{y})")
    return out


def check_flat_shadings(compass: Compass) -> list[str]:
    """Columns are decreasing flat B-sequences with at most ``4|phi|+2`` blocks."""
    out = []
    limit = 4 * compass.table.phi_size + 2
    for x in range(compass.N + 1):
        sh = shading(compass, x)
        seq = sh.expand()
        if compass.table.dialect == "bd" and not (is_b_sequence(column(compass, x)) and is_flat(seq)):
            out.append(f"column {x} is not a flat B-sequence")
        if not is_decreasing(seq):
            out.append(f"column {x} is not decreasing")
        if len(sh.blocks) > limit:
            out.append(f"column {x} has {len(sh.blocks)} blocks > {limit}")
    return out


def check_shading_order(compass: Compass) -> list[str]:
    """Equivalent columns are ordered by dominance from left to right."""
    out = []
    shs = [shading(compass, x) for x in range(compass.N + 1)]
    for x in range(compass.N + 1):
        for x2 in range(x + 1, compass.N + 1):
            if equivalent(shs[x], shs[x2]) and not dominates(shs[x], shs[x2]):
                out.append(f"shadingorder {x} vs {x2}")
    return out


def check_covered_stability(an: Analysis) -> list[str]:
    """A covered cell's column agrees with its first covering column from there up."""
    out = []
    g = an.compass
    for y in range(g.N + 1):
        for x in range(y + 1):
            cov = an.cover(x, y)
            if cov is None:
                continue
            for y2 in range(y, g.N + 1):
                if g.at(x, y2) != g.at(cov[0], y2):
                    out.append(f"coveredstability ({x},{y}) by {cov[0]} breaks at row {y2}")
                    break
    return out


def check_covered_monotone(an: Analysis) -> list[str]:
    """Once covered, a column stays covered on every higher row."""
    out = []
    g = an.compass
    for x in range(g.N + 1):
        covered = False
        for y in range(x, g.N + 1):
            now = an.is_covered(x, y)
            if covered and not now:
                out.append(f"coveredismonotone ({x},{y})")
            covered = covered or now
    return out


def check_a_requests(compass: Compass) -> list[str]:
    """Cells sharing their right endpoint share their A-requests."""
    out = []
    for y in range(compass.N + 1):
        want = compass.at(y, y).req_a
        for x in range(y):
            if compass.at(x, y).req_a != want:
                out.append(f"A-requests differ at ({x},{y})")
    return out


def check_inbetween(an: Analysis) -> list[str]:
    """Equal fingerprints keep equal labels until the first atom change above."""
    out = []
    g = an.compass
    abd = g.table.dialect == "abd"
    for y in range(g.N + 1):
        for x in range(y + 1):
            for x2 in range(x + 1, y + 1):
                if an.fingerprint(x, y) != an.fingerprint(x2, y):
                    continue
                base = g.at(x, y)
                for y2 in range(y, g.N + 1):
                    here = g.at(x, y2)
                    changed = not _same_unmarked(here, base) if abd else here != base
                    if changed:
                        break
                    other = g.at(x2, y2)
                    if not (_same_unmarked(here, other) if abd else here == other):
                        out.append(f"inbetween ({x},{x2}) on rows {y}..{y2}")
                        break
    return out


def invariant_violations(compass: Compass, extra: int = 1) -> dict[str, list[str]]:
    """Every structural check on one compass, keyed by check name."""
    an = Analysis(compass, extra=extra)
    out = {
        "bstep": check_b_step(compass),
        "bdeterminization": check_b_determinization(compass),
        "flat_shadings": check_flat_shadings(compass),
        "shading_order": check_shading_order(compass),
        "covered_stability": check_covered_stability(an),
        "covered_monotone": check_covered_monotone(an),
        "inbetween": check_inbetween(an),
    }
    if compass.table.dialect == "abd":
        out["a_requests"] = check_a_requests(compass)
    return out
