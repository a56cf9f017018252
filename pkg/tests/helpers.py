"""Shared hypothesis strategies and small fixtures for the test suite."""

from __future__ import annotations

from hypothesis import strategies as st

from homsat.formula import TOP, Diamond, Or, Prop, neg
from homsat.semantics import Model


def formulas(dialect: str = "bd", letters: tuple[str, ...] = ("p", "q"), max_leaves: int = 8):
    rels = ("B", "D", "A") if dialect == "abd" else ("B", "D")
    leaves = st.one_of(st.sampled_from([Prop(a) for a in letters]), st.just(TOP))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            kids.map(neg),
            st.tuples(st.sampled_from(rels), kids).map(lambda t: Diamond(*t)),
            st.tuples(kids, kids).map(lambda t: Or(*t)),
        ),
        max_leaves=max_leaves,
    )


def models(letters: tuple[str, ...] = ("p", "q"), max_points: int = 6):
    point = st.frozensets(st.sampled_from(letters))
    return st.lists(point, min_size=1, max_size=max_points).map(Model.of)


# The running example: eight points; 3 has no letter, 0 lacks q, 7 lacks p.
RUNNING_POINTS = [{"p"}, {"p", "q"}, {"p", "q"}, set(), {"p", "q"}, {"p", "q"}, {"p", "q"}, {"q"}]
RUNNING_FORMULA = "<B> !p & <D> !q"


def compass_corpus(dialect: str, count: int, seed: int = 0, max_n: int = 6, size: int = 7):
    """``count`` (formula, model, compass) triples where the model satisfies the formula.

    Each random model is paired with a random formula or its negation,
    whichever it satisfies, so every compass is valid.
    """
    import random

    from homsat.generate import random_formula
    from homsat.semantics import eval_formula, model_to_compass

    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(0, max_n)
        m = Model.of([{a for a in ("p", "q") if rng.random() < 0.6} for _ in range(n + 1)])
        f = random_formula(rng, rng.randint(2, size), ["p", "q"], dialect)
        if not eval_formula(f, m):
            f = neg(f)
        out.append((f, m, model_to_compass(m, f, dialect)))
    return out


def contraction_corpus(dialect: str, count: int, seed: int = 0, mode: str = "shading"):
    """Satisfying compasses (N up to 14) whose rows repeat a blueprint."""
    import random

    from homsat.analysis import Analysis, repeated_blueprints
    from homsat.generate import random_formula
    from homsat.semantics import eval_formula, model_to_compass

    rng = random.Random(seed)
    out = []
    for _ in range(20 * count):
        f = random_formula(rng, rng.randint(2, 6), ["p", "q"], dialect)
        n = rng.randint(6, 14)
        m = Model.of([{a for a in "pq" if rng.random() < 0.8} for _ in range(n + 1)])
        if not eval_formula(f, m):
            continue
        g = model_to_compass(m, f, dialect)
        if repeated_blueprints(Analysis(g, mode)):
            out.append((f, g))
            if len(out) == count:
                break
    return out


# Fixed regex corpus over {a, b}: empty and nonempty languages, all operators.
REGEX_CORPUS = [
    "%", "~%", "a", "b", "~a", "a + b", "~(a + b)", "~(a + ~a)",
    "Pre(a)", "Pre(b)", "Inf(a)", "Inf(b)", "Pre(%)", "Inf(%)",
    "~(~Pre(a) + ~Pre(b))", "~(~Inf(a) + ~Inf(b))", "Pre(a) + Inf(b)",
    "~Pre(~%)", "Pre(Pre(a))", "Inf(Inf(a))", "Pre(Inf(b)) + ~a",
    "~(~Pre(Inf(a)) + ~Pre(Inf(b)))", "Inf(~a)", "Pre(~(a + b))",
    "~(~Pre(a) + ~Pre(~a))", "~(Inf(a) + ~Pre(a))", "Inf(a + Pre(b))",
    "~(~Inf(Pre(a)) + Inf(b))", "Pre(~Pre(~%))", "~(~Inf(a) + ~Inf(~a))",
]


def tiling_corpus():
    """Fifteen seeded toy instances with T <= 2 and one bit."""
    import random

    from homsat.tiling import TilingInstance

    rng = random.Random(3)
    out = []
    for tiles in (0, 1, 2):
        pairs = [(i, j) for i in range(tiles + 1) for j in range(tiles + 1)]
        for _ in range(5):
            h = frozenset(x for x in pairs if rng.random() < 0.6)
            v = frozenset(x for x in pairs if rng.random() < 0.6)
            out.append(TilingInstance(tiles, 1, h, v))
    return out
