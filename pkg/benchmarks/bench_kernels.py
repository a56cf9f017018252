"""Compare the compiled and pure-Python evaluation kernels.

Run ``python benchmarks/bench_kernels.py``; prints one line per workload
with the time of each backend and the speedup.  Both backends must return
the same answer, which is checked before timing is reported.
"""

from __future__ import annotations

import argparse
import random
import time

from homsat import _kernels_py
from homsat.formula import letters, parse
from homsat.generate import random_formula
from homsat.semantics import compile_program

try:
    from homsat import _kernels
except ImportError:  # extension not built
    _kernels = None

# Unsatisfiable at these sizes, so every valuation is visited.
SEARCH = [
    ("(p & <D> !p) | (q & [D] F)", 6),
    ("<D> (p & !q) & [D] (!p | q)", 6),
    ("<B> (p & r & <D> !r) | (q & <D> !q)", 5),
]


def timed(fn, *args, repeat: int = 3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tables", type=int, default=200, help="random eval_table calls")
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not available; build with 'pip install -e . --no-build-isolation'")
        return
    print(f"{'workload':44} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for text, n in SEARCH:
        f = parse(text, "bd")
        names = letters(f)
        prog = compile_program([f], names).raw
        py, t_py = timed(_kernels_py.first_model, prog, len(names), n + 1)
        cy, t_cy = timed(_kernels.first_model, prog, len(names), n + 1)
        assert py == cy, (text, py, cy)
        print(f"{'first_model ' + text + f' N={n}':44.44} {t_py:10.4f} {t_cy:11.4f} {t_py / t_cy:8.1f}")
    rng = random.Random(args.seed)
    jobs = []
    for _ in range(args.tables):
        f = random_formula(rng, rng.randint(3, 12), ["p", "q"], "abd")
        n = rng.randint(1, 12)
        pts = [rng.randrange(4) for _ in range(n)]
        jobs.append((compile_program([f], ["p", "q"]).raw, pts))

    def run(impl):
        return [impl.eval_table(prog, pts) for prog, pts in jobs]

    py, t_py = timed(run, _kernels_py)
    cy, t_cy = timed(run, _kernels)
    assert py == cy
    print(f"{f'eval_table x{args.tables} random ABD':44} {t_py:10.4f} {t_cy:11.4f} {t_py / t_cy:8.1f}")


if __name__ == "__main__":
    main()
