"""Row-blueprint search for satisfiability of BD and ABD formulas.

A row of the search keeps one ``(class, atom)`` pair per witness column.
Every cell above the diagonal is fixed by the cells below it, so once the
diagonal atom of the next row is chosen the whole next row follows:

* letters are the intersection of the old letters and the new point's;
* B-requests absorb the B-observables one row down;
* D-requests absorb every D-observable of the columns to the right;
* A-requests are copied from the new diagonal, and markings advance.

By default pairs carry no column class.  The ``prefix`` mode instead tags
each pair with the column's shading read so far (its distinct atoms in BD,
the first atom of each potential value in ABD).  Pairs that end up covered,
i.e. with enough equal-fingerprint pairs to their right, are dropped; with
``saturate`` a pair whose atom already requests every D-formula is also
dropped once an equal pair sits to its right.  Atoms whose requests can
never be witnessed are pruned up front, and a formula that no reachable
column atom contains is rejected before searching.  A found trace is
checked by replaying the full compass from its diagonal atoms and
validating it.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .atoms import (
    Atom,
    ClosureError,
    ClosureTable,
    base_assignments,
    lit_true,
    build_closure,
    delta_up,
    is_consistent,
    make_atom,
    point_marking,
)
from .formula import Formula, parse, to_text
from .semantics import Compass, Model, compass_to_model, validate_compass


class SearchOrder(str, enum.Enum):
    BFS = "bfs"
    DFS = "dfs"


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    EXHAUSTED = "exhausted"


CLASS_MODES = ("none", "prefix")


@dataclass
class SearchConfig:
    max_states: int = 200_000
    max_queue: int = 1_000_000
    order: SearchOrder = SearchOrder.BFS
    report_bound: bool = True
    class_mode: str = "none"
    extra: int = 1
    saturate: bool = True
    canonical: bool = False

    def __post_init__(self) -> None:
        if self.max_states <= 0 or self.max_queue <= 0:
            raise ValueError("search budgets must be positive")
        if self.class_mode not in CLASS_MODES:
            raise ValueError(f"unknown class mode {self.class_mode!r}")
        if self.extra < 0:
            raise ValueError("extra must be non-negative")
        self.order = SearchOrder(self.order)


@dataclass(frozen=True)
class SolverRow:
    """Witness pairs ``(class id, atom id)`` in increasing column order."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def dump(self) -> str:
        return "\n".join(f"{c}:{a}" for c, a in self.pairs)


@dataclass
class Certificate:
    """Diagonal atoms of a satisfying trace and the column where the formula holds."""

    formula: Formula
    dialect: str
    diagonals: list[Atom]
    offset: int
    witness_atoms: list[tuple[Atom, ...]] = field(default_factory=list)
    columns: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def height(self) -> int:
        return len(self.diagonals) - 1 - self.offset

    def to_dict(self) -> dict:
        t = self.diagonals[0].table if self.diagonals else build_closure(self.formula, self.dialect)
        a_args = [to_text(t.member(lit)) for lit in t.diamond_args["A"]]
        diag = []
        for d in self.diagonals:
            letters = [t.letters[k] for k in range(len(t.letters)) if (d.props >> k) & 1]
            requests = [a_args[k] for k in range(len(a_args)) if (d.req_a >> k) & 1]
            diag.append({"letters": letters, "requests": requests})
        return {
            "formula": to_text(self.formula),
            "dialect": self.dialect,
            "offset": self.offset,
            "diagonals": diag,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> Certificate:
        dialect = data.get("dialect", "abd")
        f = parse(data["formula"], dialect)
        t = build_closure(f, dialect)
        a_index = {to_text(t.member(lit)): k for k, lit in enumerate(t.diamond_args["A"])}
        l_index = {name: k for k, name in enumerate(t.letters)}
        diagonals = []
        for item in data["diagonals"]:
            props = sum(1 << l_index[name] for name in item.get("letters", []) if name in l_index)
            req_a = sum(1 << a_index[name] for name in item.get("requests", []))
            diagonals.append(_point_atom(t, props, req_a))
        return cls(f, dialect, diagonals, int(data.get("offset", 0)))

    @classmethod
    def from_json(cls, text: str) -> Certificate:
        return cls.from_dict(json.loads(text))


@dataclass
class Stats:
    states: int = 0
    transitions: int = 0
    frontier_peak: int = 0
    max_row_length: int = 0
    height: int | None = None

    def to_dict(self) -> dict:
        return {
            "states": self.states,
            "transitions": self.transitions,
            "frontier_peak": self.frontier_peak,
            "max_row_length": self.max_row_length,
            "height": self.height,
        }


@dataclass
class Verdict:
    status: Status
    certificate: Certificate | None = None
    stats: Stats = field(default_factory=Stats)
    bound: dict | None = None

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    def to_dict(self) -> dict:
        out: dict = {"status": self.status.value, "stats": self.stats.to_dict()}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
            out["N"] = self.certificate.height
            out["model"] = json.loads(compass_to_model(reconstruct_compass(self.certificate)).to_json())
        if self.bound is not None:
            out["bound"] = self.bound
        return out


def _point_atom(table: ClosureTable, props: int, req_a: int = 0) -> Atom:
    base = make_atom(table, props, 0, 0, req_a)
    if table.dialect != "abd":
        return base
    pend, sat = point_marking(base)
    return Atom(table, base.bits, pend, sat)


def point_atoms(table: ClosureTable) -> list[Atom]:
    """Every consistent atom that can label a point, in a fixed order."""
    n_letters = len(table.letters)
    n_a = table.n("A") if table.dialect == "abd" else 0
    out = []
    for props in range(1 << n_letters):
        for req_a in range(1 << n_a):
            a = _point_atom(table, props, req_a)
            if is_consistent(a):
                out.append(a)
    return out


def blueprint_bound(phi_size: int) -> dict:
    """Symbolic size of the row-blueprint space and of the step bound it implies."""
    n = phi_size
    inner = 8 * n * n + 14 * n + 6
    factor = 2 * (n + 1) * (4 * n * n + 7 * n + 3)
    return {
        "phi_size": n,
        "max_row_length": f"{4 * n + 2} * 2^{inner}",
        "log2_rows": f"{factor} * 2^{inner}",
        "log2_log2_rows": round(math.log2(factor) + inner, 3),
    }


def viable_atoms(table: ClosureTable) -> set[int] | None:
    """Base atoms (as bit sets) that can occur in some compass; ``None`` when too large.

    Greatest fixpoint: an atom stays while each of its B- and D-requests has
    a surviving witness atom that could sit below it in its column (B) or
    strictly inside it (D), and each A-request holds in some surviving atom.
    In ABD a point also meets itself, so it requests what it observes, and
    every atom needs a surviving point with its A-requests and letters.
    """
    try:
        pool = [Atom(table, bits) for bits in base_assignments(table)]
    except ClosureError:
        return None
    abd = table.dialect == "abd"
    if abd:
        pool = [a for a in pool if not (a.is_point and a.obs_a & ~a.req_a)]
    args = {r: table.diamond_args[r] for r in ("B", "D", "A")}
    while True:
        ends: dict[int, list[int]] = {}
        if abd:
            for w in pool:
                if w.is_point:
                    ends.setdefault(w.req_a, []).append(w.props)
        d_wit: list[set] = [set() for _ in args["D"]]
        b_wit: list[set] = [set() for _ in args["B"]]
        a_ok = 0
        for w in pool:
            for k, lit in enumerate(args["D"]):
                if lit_true(w.bits, lit):
                    d_wit[k].add((w.req_d | w.obs_d, w.props))
            for k, lit in enumerate(args["B"]):
                if lit_true(w.bits, lit):
                    b_wit[k].add((w.req_b | w.obs_b, w.props, w.req_d))
            for k, lit in enumerate(args["A"]):
                if lit_true(w.bits, lit):
                    a_ok |= 1 << k

        def ok(a: Atom) -> bool:
            if a.req_a & ~a_ok:
                return False
            if abd and not any(not (a.props & ~pr) for pr in ends.get(a.req_a, ())):
                return False
            for k in range(len(args["D"])):
                if (a.req_d >> k) & 1 and not any(
                        not (g & ~a.req_d) and not (a.props & ~pr) for g, pr in d_wit[k]):
                    return False
            for k in range(len(args["B"])):
                if (a.req_b >> k) & 1 and not any(
                        not (g & ~a.req_b) and not (a.props & ~pr) and not (rd & ~a.req_d)
                        for g, pr, rd in b_wit[k]):
                    return False
            return True

        kept = [a for a in pool if ok(a)]
        if len(kept) == len(pool):
            return {a.bits for a in pool}
        pool = kept


def dead_requests(table: ClosureTable) -> tuple[int, int, int]:
    """Request masks (B, D, A) whose argument holds in no viable atom."""
    alive = viable_atoms(table)
    if alive is None:
        return 0, 0, 0
    out = []
    for r in ("B", "D", "A"):
        mask = 0
        for k, lit in enumerate(table.diamond_args[r]):
            if not any(lit_true(bits, lit) for bits in alive):
                mask |= 1 << k
        out.append(mask)
    return out[0], out[1], out[2]


class RowSystem:
    """Transition system over witness rows of one formula.

    Atoms and classes are interned so that rows are tuples of small ints.
    """

    def __init__(self, phi: Formula, dialect: str = "bd", class_mode: str = "none",
                 extra: int = 1, saturate: bool = True) -> None:
        self.saturate = saturate
        self.phi = phi
        self.class_mode = class_mode
        self.extra = extra
        self.dialect = dialect
        self.table = build_closure(phi, dialect)
        self.atoms: list[Atom] = []
        self._atom_ids: dict[Atom, int] = {}
        self.classes: list[tuple[int, ...]] = []
        self._class_ids: dict[tuple[int, ...], int] = {}
        self._delta: list[int] = []
        self._obs_d: list[int] = []
        self._has_phi: list[bool] = []
        self._final: list[bool] = []
        self._saturated: list[bool] = []
        self._full_d = (1 << self.table.n("D")) - 1
        self._step_cache: dict[tuple[int, int, int], int | None] = {}
        self._grow_cache: dict[tuple[int, int], int] = {}
        self.alive = viable_atoms(self.table)
        self.diagonals = [self.atom_id(a) for a in point_atoms(self.table) if self.viable(a)]

    # -- interning ---------------------------------------------------------

    def atom_id(self, atom: Atom) -> int:
        i = self._atom_ids.get(atom)
        if i is None:
            i = len(self.atoms)
            self._atom_ids[atom] = i
            self.atoms.append(atom)
            self._delta.append(delta_up(atom))
            self._obs_d.append(atom.obs_d)
            self._has_phi.append(self.phi in atom)
            self._final.append(atom.is_final)
            self._saturated.append(atom.req_d == self._full_d)
        return i

    def class_id(self, seq: tuple[int, ...]) -> int:
        i = self._class_ids.get(seq)
        if i is None:
            i = len(self.classes)
            self._class_ids[seq] = i
            self.classes.append(seq)
        return i

    def delta(self, atom_id: int) -> int:
        return self._delta[atom_id]

    def viable(self, atom: Atom) -> bool:
        """False when some request of the atom can never be witnessed."""
        return self.alive is None or atom.bits in self.alive

    # -- single steps ------------------------------------------------------

    def step_atom(self, atom_id: int, inner_obs: int, diag_id: int) -> int | None:
        """Atom one row up in the same column, or ``None`` when no atom fits."""
        key = (atom_id, inner_obs, diag_id)
        if key in self._step_cache:
            return self._step_cache[key]
        old, d = self.atoms[atom_id], self.atoms[diag_id]
        t = self.table
        new = make_atom(t, old.props & d.props, old.req_b | old.obs_b, old.req_d | inner_obs, d.req_a)
        result: int | None
        if self.dialect == "abd":
            pend = old.pending & ~new.obs_a
            sat = old.satisfied | (old.pending & new.obs_a)
            new = Atom(t, new.bits, pend, sat)
            ok = is_consistent(new)
        else:
            ok = True
        result = self.atom_id(new) if ok and self.viable(new) else None
        self._step_cache[key] = result
        return result

    def grow_class(self, class_id: int, atom_id: int) -> int:
        """Class of a column after its atom became ``atom_id``."""
        key = (class_id, atom_id)
        c = self._grow_cache.get(key)
        if c is None:
            seq = self.classes[class_id]
            if self.class_mode == "none":
                self._grow_cache[key] = class_id
                return class_id
            last = seq[-1]
            if self.dialect == "abd":
                grow = self._delta[atom_id] < self._delta[last]
            else:
                grow = atom_id != last
            c = self.class_id(seq + (atom_id,)) if grow else class_id
            self._grow_cache[key] = c
        return c

    def covered_mask(self, pairs: Sequence[tuple[int, int]]) -> list[bool]:
        """In-sequence coverage: enough equal fingerprints further right."""
        out = [False] * len(pairs)
        right: frozenset = frozenset()
        counts: dict = {}
        for i in range(len(pairs) - 1, -1, -1):
            fp = (pairs[i], right)
            c = counts.get(fp, 0)
            out[i] = c >= self._delta[pairs[i][1]] + self.extra or (
                self.saturate and self._saturated[pairs[i][1]] and pairs[i] in right)
            counts[fp] = c + 1
            if pairs[i] not in right:
                right = right | {pairs[i]}
        return out

    # -- rows --------------------------------------------------------------

    def initial_rows(self) -> list[SolverRow]:
        return [SolverRow(((self.start_class(d), d),)) for d in self.diagonals]

    def start_class(self, diag_id: int) -> int:
        return self.class_id(() if self.class_mode == "none" else (diag_id,))

    def advance(self, row: SolverRow, diag_id: int) -> tuple[SolverRow, list[int]] | None:
        """The row after adding ``diag_id`` on the diagonal, with the surviving indices.

        Indices refer to the old pairs followed by the new diagonal pair.
        """
        pairs = row.pairs
        n = len(pairs)
        updated: list[tuple[int, int]] = [(0, 0)] * (n + 1)
        inner = 0
        for i in range(n - 1, -1, -1):
            c, a = pairs[i]
            new = self.step_atom(a, inner, diag_id)
            if new is None:
                return None
            updated[i] = (self.grow_class(c, new), new)
            inner |= self._obs_d[a]
        updated[n] = (self.start_class(diag_id), diag_id)
        covered = self.covered_mask(updated)
        kept = [i for i in range(n + 1) if not covered[i]]
        return SolverRow(tuple(updated[i] for i in kept)), kept

    def successors(self, row: SolverRow) -> list[tuple[int, SolverRow, list[int]]]:
        out = []
        for d in self.diagonals:
            nxt = self.advance(row, d)
            if nxt is not None:
                out.append((d, nxt[0], nxt[1]))
        return out

    def column_atoms(self, limit: int = 4000, max_inner_bits: int = 6) -> set[int] | None:
        """Every atom some column can reach, or ``None`` when too costly to enumerate.

        Over-approximates the D-observables arriving from the right by all
        subsets, so the result contains every atom of every compass.
        """
        n_d = self.table.n("D")
        if n_d > max_inner_bits:
            return None
        seen = set(self.diagonals)
        stack = list(seen)
        while stack:
            a = stack.pop()
            for inner in range(1 << n_d):
                for d in self.diagonals:
                    b = self.step_atom(a, inner, d)
                    if b is not None and b not in seen:
                        if len(seen) >= limit:
                            return None
                        seen.add(b)
                        stack.append(b)
        return seen

    def may_accept(self) -> bool:
        """Static filter: some atom with the formula can sit on an accepting row.

        ABD rows accept only when their diagonal is final, which pins the
        row's A-requests to those of a final point.  Returns ``True`` when
        the closure is too large to enumerate.
        """
        t = self.table
        lit = t.literal(self.phi)
        allowed = None
        if self.dialect == "abd":
            allowed = {self.atoms[d].req_a for d in self.diagonals if self._final[d]}
            if not allowed:
                return False
        try:
            for bits in base_assignments(t):
                if not lit_true(bits, lit):
                    continue
                atom = Atom(t, bits)
                if self.viable(atom) and (allowed is None or atom.req_a in allowed):
                    return self._column_may_accept()
        except ClosureError:
            return self._column_may_accept()
        return False

    def _column_may_accept(self) -> bool:
        reach = self.column_atoms()
        return reach is None or any(self._has_phi[a] for a in reach)

    def canonical_key(self, row: SolverRow):
        """Order-free summary: fingerprint counts."""
        counts: dict = {}
        right: frozenset = frozenset()
        for p in reversed(row.pairs):
            fp = (p, right)
            counts[fp] = counts.get(fp, 0) + 1
            right = right | {p}
        return frozenset(counts.items())

    def accepting_index(self, row: SolverRow) -> int | None:
        """Leftmost pair whose sub-triangle is a model, if any."""
        pairs = row.pairs
        if self.dialect == "abd":
            best = None
            for i in range(len(pairs) - 1, -1, -1):
                if not self._final[pairs[i][1]]:
                    break
                if self._has_phi[pairs[i][1]]:
                    best = i
            return best
        for i, (_, a) in enumerate(pairs):
            if self._has_phi[a]:
                return i
        return None

    def is_accepting(self, row: SolverRow) -> bool:
        return self.accepting_index(row) is not None

    def row_of_compass(self, compass: Compass, y: int, witnesses: Iterable[int]) -> SolverRow:
        """Encode the given columns of row ``y`` with read-so-far classes."""
        pairs = []
        for x in witnesses:
            c = self.start_class(self.atom_id(compass.at(x, x)))
            for yy in range(x + 1, y + 1):
                c = self.grow_class(c, self.atom_id(compass.at(x, yy)))
            pairs.append((c, self.atom_id(compass.at(x, y))))
        return SolverRow(tuple(pairs))


def solve(phi: Formula, dialect: str = "bd", cfg: SearchConfig | None = None) -> Verdict:
    """Search the row system of ``phi`` for an accepting row."""
    cfg = cfg or SearchConfig()
    system = RowSystem(phi, dialect, cfg.class_mode, cfg.extra, cfg.saturate)
    bound = blueprint_bound(system.table.phi_size) if cfg.report_bound else None
    stats = Stats()
    parents: list[int] = []
    diags: list[int] = []
    rows: list[SolverRow] = []
    cols: list[tuple[int, ...]] = []
    depth: list[int] = []
    visited: set = set()
    canon = system.canonical_key if cfg.canonical else (lambda r: r)
    if not system.may_accept():
        return Verdict(Status.UNSAT, None, stats, bound)
    frontier: deque[int] = deque()

    def add(row: SolverRow, parent: int, diag: int, columns: tuple[int, ...], y: int) -> int:
        node = len(rows)
        parents.append(parent)
        diags.append(diag)
        rows.append(row)
        cols.append(columns)
        depth.append(y)
        visited.add(canon(row))
        stats.states += 1
        stats.max_row_length = max(stats.max_row_length, len(row))
        return node

    def finish(node: int, idx: int) -> Verdict:
        chain = []
        while node >= 0:
            chain.append(node)
            node = parents[node]
        chain.reverse()
        cert = Certificate(
            formula=phi,
            dialect=dialect,
            diagonals=[system.atoms[diags[n]] for n in chain],
            offset=cols[chain[-1]][idx],
            witness_atoms=[tuple(system.atoms[a] for _, a in rows[n].pairs) for n in chain],
            columns=[cols[n] for n in chain],
        )
        stats.height = cert.height
        return Verdict(Status.SAT, cert, stats, bound)

    for row in system.initial_rows():
        if canon(row) in visited:
            continue
        node = add(row, -1, row.pairs[0][1], (0,), 0)
        idx = system.accepting_index(row)
        if idx is not None:
            return finish(node, idx)
        frontier.append(node)
    stats.frontier_peak = len(frontier)

    while frontier:
        node = frontier.popleft() if cfg.order is SearchOrder.BFS else frontier.pop()
        y = depth[node]
        for d, nxt, kept in system.successors(rows[node]):
            stats.transitions += 1
            if canon(nxt) in visited:
                continue
            old_cols = cols[node]
            columns = tuple(old_cols[i] if i < len(old_cols) else y + 1 for i in kept)
            child = add(nxt, node, d, columns, y + 1)
            idx = system.accepting_index(nxt)
            if idx is not None:
                return finish(child, idx)
            frontier.append(child)
            if stats.states >= cfg.max_states or len(frontier) > cfg.max_queue:
                stats.frontier_peak = max(stats.frontier_peak, len(frontier))
                return Verdict(Status.EXHAUSTED, None, stats, bound)
        stats.frontier_peak = max(stats.frontier_peak, len(frontier))
    return Verdict(Status.UNSAT, None, stats, bound)


class TraceError(RuntimeError):
    """A certificate does not replay to what the search recorded."""


def replay(phi: Formula, dialect: str, diagonals: Sequence[Atom]) -> list[list[Atom]] | None:
    """Full rows determined by a diagonal sequence, or ``None`` if some cell has no atom."""
    system = RowSystem(phi, dialect)
    ids = [system.atom_id(d) for d in diagonals]
    rows: list[list[int]] = []
    for y, d in enumerate(ids):
        if y == 0:
            rows.append([d])
            continue
        prev = rows[-1]
        new = [0] * (y + 1)
        inner = 0
        for x in range(y - 1, -1, -1):
            a = system.step_atom(prev[x], inner, d)
            if a is None:
                return None
            new[x] = a
            inner |= system._obs_d[prev[x]]
        new[y] = d
        rows.append(new)
    return [[system.atoms[a] for a in row] for row in rows]


def reconstruct_compass(cert: Certificate) -> Compass:
    """Rebuild the certified compass: replay every column, then re-root at the offset."""
    if not cert.diagonals:
        raise TraceError("empty certificate")
    table = cert.diagonals[0].table
    full = replay(cert.formula, cert.dialect, cert.diagonals)
    if full is None:
        raise TraceError("diagonal sequence has no compass")
    if cert.witness_atoms:
        for y, (atoms, columns) in enumerate(zip(cert.witness_atoms, cert.columns)):
            if tuple(full[y][x] for x in columns) != atoms:
                raise TraceError(f"row {y} disagrees with its replay")
    x0 = cert.offset
    top = len(full) - 1
    rows = [[_retable(full[y][x], table) for x in range(x0, y + 1)] for y in range(x0, top + 1)]
    return Compass(table, rows)


def _retable(atom: Atom, table: ClosureTable) -> Atom:
    return atom if atom.table is table else Atom(table, atom.bits, atom.pending, atom.satisfied)


def check_certificate(cert: Certificate) -> list[str]:
    """Problems with a certificate; empty when it yields a valid compass and model."""
    from .semantics import eval_formula

    try:
        compass = reconstruct_compass(cert)
    except TraceError as exc:
        return [str(exc)]
    problems = [str(v) for v in validate_compass(compass, cert.formula)]
    model = compass_to_model(compass)
    if not eval_formula(cert.formula, model):
        problems.append("formula false on the decoded model")
    return problems


def certificate_model(cert: Certificate) -> Model:
    return compass_to_model(reconstruct_compass(cert))
