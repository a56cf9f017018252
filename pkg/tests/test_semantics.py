import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsat import _kernels_py, kernels
from homsat.atoms import Atom, build_closure
from homsat.formula import BOTTOM, PI, TOP, Diamond, Not, Or, Prop, Top, box, diamond, neg, parse, subformulas
from homsat.generate import all_formulas_up_to, random_corpus
from homsat.semantics import (
    Compass,
    EnumerationBudget,
    Model,
    brute_force_sat,
    compass_from_json,
    compass_to_model,
    compile_program,
    enumerate_models,
    eval_formula,
    model_to_compass,
    validate_compass,
)

from helpers import formulas, models

p, q = Prop("p"), Prop("q")


def naive(f, m, x, y):
    """Direct transcription of the semantic clauses, no tables or kernels."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Prop):
        return all(f.name in m.points[z] for z in range(x, y + 1))
    if isinstance(f, Not):
        return not naive(f.child, m, x, y)
    if isinstance(f, Or):
        return naive(f.left, m, x, y) or naive(f.right, m, x, y)
    if f.rel == "B":
        return any(naive(f.child, m, x, z) for z in range(x, y))
    if f.rel == "D":
        return any(naive(f.child, m, a, b) for a in range(x + 1, y) for b in range(a, y))
    return any(naive(f.child, m, y, z) for z in range(y, m.N + 1))


def test_uniform_letter_holds_everywhere():
    m = Model.of([{"p"}] * 4)
    assert all(eval_formula(p, m, x, y) for y in range(4) for x in range(y + 1))


def test_prefix_witnesses_both_ways():
    m = Model.of([{"p"}, set(), set()])
    assert eval_formula(diamond("B", p), m, 0, 2)
    assert eval_formula(diamond("B", neg(p)), m, 0, 2)
    # and by a plain scan over the prefixes
    assert [naive(p, m, 0, z) for z in range(2)] == [True, False]


def test_points_have_no_strict_subintervals():
    m = Model.of([{"p"}, {"p", "q"}, set()])
    for x in range(3):
        for f in (diamond("B", TOP), diamond("D", TOP), diamond("B", p), diamond("D", neg(p))):
            assert not eval_formula(f, m, x, x)


def test_pi_marks_point_intervals():
    m = Model.of([set()] * 3)
    assert eval_formula(PI, m, 1, 1)
    assert not eval_formula(PI, m, 0, 1)


def test_a_looks_right_of_the_end_point():
    m = Model.of([set(), set(), {"p"}])
    f = diamond("A", PI & p)
    assert eval_formula(f, m, 0, 1) is False
    assert eval_formula(f, m, 0, 2) is True


def test_letters_on_intersects_points():
    m = Model.of([{"p", "q"}, {"p"}, {"p", "q"}])
    assert m.letters_on(0, 2) == {"p"}
    assert m.letters_on(2, 2) == {"p", "q"}


def test_model_json_round_trip():
    m = Model.of([{"q", "p"}, set()])
    assert json.loads(m.to_json()) == {"N": 1, "points": [["p", "q"], []]}
    assert Model.from_json(m.to_json()) == m
    with pytest.raises(ValueError):
        Model.from_json('{"N": 3, "points": [[]]}')
    with pytest.raises(ValueError):
        Model.of([])


@settings(max_examples=150, deadline=None)
@given(formulas("abd", max_leaves=6), models(max_points=5))
def test_eval_matches_naive_clauses(f, m):
    for y in range(m.N + 1):
        for x in range(y + 1):
            assert eval_formula(f, m, x, y) == naive(f, m, x, y)


def test_b_diamond_needs_two_points():
    m = brute_force_sat(diamond("B", TOP), 4)
    assert m is not None and m.N == 1


def test_point_cannot_have_infix():
    f = box("B", BOTTOM) & diamond("D", p)
    assert brute_force_sat(f, 5) is None


def test_homogeneity_blocks_inner_negation():
    # DERIVED: exhaustive up to five; the clause scan agrees.
    f = p & diamond("D", neg(p))
    assert brute_force_sat(f, 5) is None
    for m in enumerate_models(["p"], 5):
        assert not naive(f, m, 0, m.N)


def test_first_model_is_lexicographically_least():
    f = diamond("B", p) & neg(p)
    m = brute_force_sat(f, 4)
    assert m == Model.of([{"p"}, set()])
    for cand in enumerate_models(["p"], m.N):
        if cand.N == m.N and naive(f, cand, 0, cand.N):
            assert cand == m
            break


def test_brute_force_rejects_bad_dialect_and_budget():
    with pytest.raises(ValueError):
        brute_force_sat(diamond("A", p), 2, "bd")
    with pytest.raises(ValueError):
        brute_force_sat(p, 2, "xyz")
    many = parse(" & ".join(f"p{i}" for i in range(9)))
    with pytest.raises(EnumerationBudget):
        brute_force_sat(many, 5)


def test_enumerate_models_counts():
    assert sum(1 for _ in enumerate_models(["p"], 2)) == 2 + 4 + 8


@pytest.mark.parametrize("dialect", ["bd", "abd"])
def test_kernel_backends_agree(dialect):
    corpus = random_corpus(5, 60, 7, ["p", "q"], dialect)
    for f in corpus:
        prog = compile_program([f])
        for n in range(4):
            assert _kernels_py.first_model(prog.raw, len(prog.letters), n + 1) == \
                kernels.first_model(prog.raw, len(prog.letters), n + 1)
    assert kernels.BACKEND in ("compiled", "python")


# ---------------------------------------------------------------------------
# Compass structures


def corpus_with_models(dialect, max_n=4):
    out = []
    for f in random_corpus(11, 60, 7, ["p", "q"], dialect):
        m = brute_force_sat(f, max_n, dialect)
        if m is not None:
            out.append((f, m))
    return out


@pytest.mark.parametrize("dialect", ["bd", "abd"])
def test_satisfying_models_give_valid_compasses(dialect):
    pairs = corpus_with_models(dialect)
    assert len(pairs) > 20
    for f, m in pairs:
        g = model_to_compass(m, f, dialect)
        assert validate_compass(g, f) == []
        back = compass_to_model(g)
        assert back.points == tuple(fs & frozenset(build_closure(f, dialect).letters) for fs in m.points)
        assert model_to_compass(back, f, dialect) == g
        assert eval_formula(f, back)


@settings(max_examples=60, deadline=None)
@given(formulas("abd", max_leaves=5), models(max_points=5))
def test_compass_validity_matches_truth(f, m):
    g = model_to_compass(m, f, "abd")
    kinds = [v.kind for v in validate_compass(g, f)]
    if eval_formula(f, m):
        assert kinds == []
    else:
        assert kinds == ["InitialFormula"]


def test_negated_letter_in_every_cell():
    m = Model.of([set()] * 3)
    g = model_to_compass(m, neg(p))
    assert all(neg(p) in g.at(x, y) for y in range(3) for x in range(y + 1))


def test_diagonal_atoms_are_points():
    m = Model.of([{"p"}, set(), {"q"}, {"p"}])
    g = model_to_compass(m, diamond("D", p) | diamond("B", q))
    for y in range(4):
        for x in range(y + 1):
            a = g.at(x, y)
            assert (box("B", BOTTOM) in a) == (x == y)
            assert (diamond("B", TOP) in a) == (x != y)


def test_single_point_compass():
    m = Model.of([{"p", "q"}])
    g = model_to_compass(m, p & neg(q))
    assert g.N == 0 and compass_to_model(g) == m
    # letters outside the closure are dropped
    assert compass_to_model(model_to_compass(m, p)) == Model.of([{"p"}])


def test_dropping_the_formula_from_the_root():
    f = diamond("B", p)
    m = Model.of([{"p"}, set()])
    g = model_to_compass(m, f)
    t = g.table
    root = g.at(0, 1)
    i = t.positives.index(f)
    rows = [list(r) for r in g.rows]
    rows[1][0] = Atom(t, root.bits & ~(1 << i), root.pending, root.satisfied)
    found = validate_compass(Compass(t, rows), f)
    assert ("InitialFormula", 0, 1) in [(v.kind, v.x, v.y) for v in found]


def test_unsatisfying_model_has_one_defect():
    f = diamond("B", p)
    g = model_to_compass(Model.of([set(), {"p"}]), f)
    found = validate_compass(g, f)
    assert [(v.kind, v.x, v.y) for v in found] == [("InitialFormula", 0, 1)]


def test_diagonal_b_request_is_reported():
    g = model_to_compass(Model.of([{"p"}]), p)
    a = g.at(0, 0)
    bad = Compass(g.table, [[Atom(g.table, a.bits | 1)]])
    kinds = [v.kind for v in validate_compass(bad, p)]
    assert "DiagonalBRequest" in kinds


def test_violations_are_row_major():
    g = model_to_compass(Model.of([{"p"}, {"p"}, {"p"}]), p)
    t = g.table
    empty = Atom(t, g.at(0, 0).bits & ~(1 << t.positives.index(p)))
    rows = [list(r) for r in g.rows]
    rows[0][0] = empty
    rows[2][2] = empty
    found = validate_compass(Compass(t, rows), p)
    coords = [(v.y, v.x) for v in found]
    assert coords == sorted(coords)
    assert "Homogeneity" in {v.kind for v in found}


def test_pending_request_at_top_is_reported():
    f = diamond("A", p)
    m = Model.of([set(), set()])
    g = model_to_compass(m, f, "abd")
    kinds = {v.kind for v in validate_compass(g, f)}
    assert "InitialFormula" in kinds


def test_compass_json_round_trip_and_render():
    f = parse("<A> (pi & p) & <B> q", "abd")
    m = brute_force_sat(f, 4)
    g = model_to_compass(m, f, "abd")
    data = json.loads(g.to_json())
    assert data["N"] == g.N and len(data["grid"]) == g.N + 1
    assert compass_from_json(g.to_json(), f, "abd") == g
    text = g.render()
    assert text.splitlines()[0].startswith(str(g.N))
    assert g.to_dot().startswith("digraph compass {")
    with pytest.raises(ValueError):
        Compass(g.table, [[g.at(0, 0), g.at(0, 0)]])


def test_satisfiable_iff_some_valid_compass():
    # both directions through the model/compass conversion, all N up to 3
    for f in all_formulas_up_to(4, ["p"], "bd"):
        m = brute_force_sat(f, 3, "bd")
        valid = []
        for cand in enumerate_models(["p"], 3):
            g = model_to_compass(cand, f, "bd")
            if not validate_compass(g, f):
                valid.append(cand)
        assert (m is not None) == bool(valid)
        if m is not None:
            assert min(c.N for c in valid) == m.N


def a_subformulas(f):
    return [g for g in subformulas(f) if isinstance(g, Diamond) and g.rel == "A"]


def test_a_depends_only_on_the_end_point():
    corpus = [f for f in random_corpus(3, 80, 6, ["p", "q"], "abd") if a_subformulas(f)]
    assert corpus
    for f in corpus[:20]:
        for m in enumerate_models(["p", "q"], 2):
            for g in a_subformulas(f):
                for z in range(m.N + 1):
                    vals = {eval_formula(g, m, x, z) for x in range(z + 1)}
                    assert len(vals) == 1


@settings(max_examples=80, deadline=None)
@given(models(max_points=6), st.data())
def test_interval_letters_are_pointwise_intersection(m, data):
    y = data.draw(st.integers(0, m.N))
    x = data.draw(st.integers(0, y))
    for a in ("p", "q"):
        assert eval_formula(Prop(a), m, x, y) == all(a in m.points[z] for z in range(x, y + 1))


def test_markings_follow_a_requests():
    f = parse("<A> <D> T", "abd")
    m = Model.of([set(), set(), set()])
    g = model_to_compass(m, f, "abd")
    # column 0: pending until the interval is long enough to have an infix
    marks = [g.at(0, y).pending for y in range(3)]
    assert marks[0] and marks[1] and not marks[2]
    assert g.at(0, 2).satisfied
