import itertools

import pytest
from hypothesis import given, settings

from homsat.atoms import (
    Mark, b_succ, box_, build_closure, d_succ, delta_up, enumerate_atoms, is_b_reflexive,
    is_consistent, is_d_reflexive, is_initial, make_atom, obs, potential, potential_bound, req,
)
from homsat.formula import BOTTOM, PI, TOP, Prop, neg, parse, size
from homsat.semantics import Model, model_to_compass

from helpers import RUNNING_FORMULA, RUNNING_POINTS, formulas

p, q = Prop("p"), Prop("q")


def atoms_of(text, dialect="bd"):
    f = parse(text, dialect)
    return f, enumerate_atoms(build_closure(f, dialect))


def test_b_diamond_has_eight_atoms():
    f, atoms = atoms_of("<B> p")
    assert len(atoms) == 8
    assert all(is_consistent(a) for a in atoms)


def test_disjunction_rule():
    f, atoms = atoms_of("p | q")
    for a in atoms:
        assert (f in a) == (p in a or q in a)
        if neg(f) in a:
            assert neg(p) in a and neg(q) in a


def test_abd_without_a_matches_bd():
    _, bd = atoms_of("p", "bd")
    _, abd = atoms_of("p", "abd")
    assert len(bd) == len(abd) == 4
    assert all(a.pending == a.satisfied == 0 for a in abd)


def test_requests_and_observables():
    f = parse("<B> p", "bd")
    t = build_closure(f, "bd")
    big = make_atom(t, 0, req_b=0b11, req_d=0)
    assert req(big, "B") == {p, TOP}
    point = make_atom(t, 1, 0, 0)
    assert PI in point and p in point
    assert req(point, "B") == frozenset()
    assert obs(point, "B") == {p, TOP}
    assert b_succ(make_atom(t, 0, 0b11, 0), point)


def test_every_argument_is_requested_or_boxed():
    f = parse("<B> p & <D> !q", "bd")
    for a in enumerate_atoms(build_closure(f, "bd")):
        for rel in "BD":
            r, bx = req(a, rel), box_(a, rel)
            args = {a.table.member(x) for x in a.table.diamond_args[rel]}
            assert all((psi in r) != (neg(psi) in bx) for psi in args)


def test_empty_request_self_step_needs_no_observable():
    _, atoms = atoms_of("<B> p & <D> q")
    for a in atoms:
        if a.req_b == 0:
            assert b_succ(a, a) == (a.obs_b == 0)


@pytest.fixture(scope="module")
def running():
    f = parse(RUNNING_FORMULA, "bd")
    return f, model_to_compass(Model.of(RUNNING_POINTS), f, "bd")


def test_running_example_reflexivity(running):
    f, g = running
    l47, l46, l02, l03 = g.at(4, 7), g.at(4, 6), g.at(0, 2), g.at(0, 3)
    assert p in box_(l47, "B") and neg(p) in l47 and not is_b_reflexive(l47)
    assert q in box_(l47, "D") and q in l47 and is_d_reflexive(l47)
    assert is_b_reflexive(l46) and is_d_reflexive(l46)
    assert p in box_(l02, "B") and p in l02 and is_b_reflexive(l02)
    assert q in box_(l02, "D") and neg(q) in l02 and not is_d_reflexive(l02)
    assert not is_b_reflexive(l03) and not is_d_reflexive(l03)
    assert b_succ(l47, l46)
    assert box_(l47, "B") <= {m for m in l46.table.members if m in l46} | {BOTTOM}


def test_d_example():
    f = parse("<D> !q", "bd")
    t = build_closure(f, "bd")
    outer = make_atom(t, 0, 1, 1)
    inner = make_atom(t, 0, 1, 0)
    assert req(outer, "D") == {neg(q)}
    assert obs(inner, "D") == {neg(q)} and req(inner, "D") == frozenset()
    assert d_succ(outer, inner)


def test_empty_inner_requests_always_fit():
    _, atoms = atoms_of("<D> q")
    for inner in atoms:
        if inner.req_d == 0 and inner.obs_d == 0:
            assert all(d_succ(a, inner) for a in atoms)


@pytest.mark.parametrize("text", ["<D> !q", "<D> (p & <D> q)", "<B> p & <D> !p"])
def test_d_succ_transitive_and_box(text):
    _, atoms = atoms_of(text)
    for f, g in itertools.product(atoms, repeat=2):
        if d_succ(f, g):
            assert all(psi in g for psi in box_(f, "D"))
            for h in atoms:
                if d_succ(g, h):
                    assert d_succ(f, h)
        if b_succ(f, g):
            assert all(psi in g for psi in box_(f, "B"))


def test_potential_worked_example():
    # One B-argument psi1, no D-arguments, one letter true throughout.
    assert potential(1, 0, 0, 0, 0, 1) == 3
    assert potential(1, 0, 1, 0, 0, 1) == 2
    assert potential(1, 1, 0, 0, 0, 1) == 1


@pytest.mark.parametrize("text,dialect", [
    ("<B> p & <D> !q", "bd"), ("<D> (p | <B> q)", "bd"), ("<A> p & <B> !p", "abd"), ("<A> (q & <D> p)", "abd"),
])
def test_potential_bounds_and_monotone(text, dialect):
    f, atoms = atoms_of(text, dialect)
    bound = potential_bound(atoms[0].table)
    assert all(0 <= delta_up(a) <= bound for a in atoms)
    if dialect == "bd":
        for upper, lower in itertools.product(atoms, repeat=2):
            grows = not (lower.req_d & ~upper.req_d) and not (upper.props & ~lower.props)
            if grows and b_succ(upper, lower):
                assert delta_up(upper) <= delta_up(lower)


def test_final_markings():
    _, atoms = atoms_of("<A> p", "abd")
    t = atoms[0].table
    for a in atoms:
        assert a.is_final == all(a.mark(k) is not Mark.PENDING for k in range(t.n("A")))
        if a.is_point and a.req_a and not a.obs_a:
            assert a.mark(0) is Mark.PENDING and not a.is_final
    _, plain = atoms_of("p", "abd")
    assert all(a.is_final for a in plain)


def test_marked_atom_conditions():
    _, atoms = atoms_of("<A> p & [A] (q | <B> p)", "abd")
    for a in atoms:
        t = a.table
        for k, lit in enumerate(t.diamond_args["A"]):
            psi = t.member(lit)
            if a.mark(k) is Mark.FORBIDDEN:
                assert neg(psi) in a
            if psi in a:
                assert a.mark(k) is Mark.SATISFIED
            if a.is_point and a.mark(k) is Mark.PENDING:
                assert (a.req_a >> k) & 1 and psi not in a
        if a.is_point:
            assert a.obs_a & ~a.req_a == 0


@pytest.mark.parametrize("text", ["<B> p & <D> !q", "<D> (p | <B> q)", "p | <B> <D> q"])
def test_atom_determinacy(text):
    _, atoms = atoms_of(text)
    keys = {(a.req_b, a.req_d, a.props) for a in atoms}
    assert len(keys) == len(atoms)


@pytest.mark.parametrize("text", ["<A> p & <B> !p", "<A> (q & <D> p)"])
def test_atom_determinacy_marked(text):
    _, atoms = atoms_of(text, "abd")
    keys = {(a.req_b, a.req_d, a.req_a, a.props, a.pending, a.satisfied) for a in atoms}
    assert len(keys) == len(atoms)


@settings(max_examples=60, deadline=None)
@given(formulas("bd", max_leaves=5))
def test_bd_atom_count_bound(f):
    t = build_closure(f, "bd")
    atoms = enumerate_atoms(t)
    assert len(atoms) <= 2 ** (t.phi_size + 1)
    assert len(t) <= 2 * size(f) + 2


@settings(max_examples=40, deadline=None)
@given(formulas("abd", max_leaves=4))
def test_abd_atom_count_bound(f):
    t = build_closure(f, "abd")
    assert len(enumerate_atoms(t)) <= 2 ** (2 * t.phi_size)


def test_initial_atoms_have_no_b_request():
    _, atoms = atoms_of("<B> p")
    assert [a for a in atoms if is_initial(a)] == [a for a in atoms if a.req_b == 0]
