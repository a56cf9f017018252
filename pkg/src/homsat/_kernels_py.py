"""Pure-Python evaluation kernels.

A program is three parallel integer lists ``(ops, arg_a, arg_b)`` in
post-order; the last node is the root.  Truth tables are computed for every
interval at once, one bit per model: a Python integer of width ``w`` holds
the value of a node at one interval for ``w`` models side by side.
"""

from __future__ import annotations

OP_PROP, OP_TOP, OP_NOT, OP_OR, OP_B, OP_D, OP_A = range(7)

CHUNK_BITS = 16


def eval_words(prog, npoints: int, letter_words, full: int) -> list[list[int]]:
    """Node-by-interval words; ``letter_words[x * L + j]`` is letter ``j`` at point ``x``.

    Returns ``tables[node][x * npoints + y]``.
    """
    ops, arg_a, arg_b = prog
    n = npoints
    nletters = len(letter_words) // n if n else 0
    tables: list[list[int]] = []
    for op, a, b in zip(ops, arg_a, arg_b):
        t = [0] * (n * n)
        if op == OP_PROP:
            for x in range(n):
                acc = full
                for y in range(x, n):
                    acc &= letter_words[y * nletters + a]
                    t[x * n + y] = acc
        elif op == OP_TOP:
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = full
        elif op == OP_NOT:
            src = tables[a]
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = full ^ src[x * n + y]
        elif op == OP_OR:
            s1, s2 = tables[a], tables[b]
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = s1[x * n + y] | s2[x * n + y]
        elif op == OP_B:
            src = tables[a]
            for x in range(n):
                acc = 0
                for y in range(x, n):
                    t[x * n + y] = acc
                    acc |= src[x * n + y]
        elif op == OP_D:
            src = tables[a]
            # ends[x][y]: some interval [x', y] with x < x' <= y holds.
            ends = [0] * (n * n)
            for y in range(n):
                acc = 0
                for x in range(y - 1, -1, -1):
                    acc |= src[(x + 1) * n + y]
                    ends[x * n + y] = acc
            for x in range(n):
                acc = 0
                for y in range(x, n):
                    t[x * n + y] = acc
                    acc |= ends[x * n + y]
        elif op == OP_A:
            src = tables[a]
            for y in range(n):
                acc = 0
                for z in range(y, n):
                    acc |= src[y * n + z]
                for x in range(y + 1):
                    t[x * n + y] = acc
        else:
            raise ValueError(f"bad opcode {op}")
        tables.append(t)
    return tables


def eval_table(prog, points) -> bytes:
    """Truth of every node on every interval of one model.

    ``points`` lists the letter mask of each point.  The result is indexed
    ``node * n * n + x * n + y``.
    """
    n = len(points)
    nletters = max((m.bit_length() for m in points), default=0)
    nletters = max(nletters, max((a + 1 for op, a in zip(prog[0], prog[1]) if op == OP_PROP), default=0))
    words = [(points[x] >> j) & 1 for x in range(n) for j in range(nletters)]
    tables = eval_words(prog, n, words, 1)
    out = bytearray(len(tables) * n * n)
    for i, t in enumerate(tables):
        out[i * n * n:(i + 1) * n * n] = bytes(t)
    return bytes(out)


def _patterns(width_bits: int) -> list[int]:
    """``pat[b]`` has bit ``i`` set iff bit ``b`` of ``i`` is set, for 2**width_bits positions."""
    size = 1 << width_bits
    out = []
    for b in range(width_bits):
        block = ((1 << (1 << b)) - 1) << (1 << b)
        period = 1 << (b + 1)
        word = 0
        for start in range(0, size, period):
            word |= block << start
        out.append(word)
    return out


def first_model(prog, nletters: int, npoints: int) -> int:
    """Index of the first model (point 0 most significant) where the root holds on [0, N].

    Returns -1 when no valuation of ``npoints`` points satisfies the root.
    """
    total = nletters * npoints
    k = min(total, CHUNK_BITS)
    full = (1 << (1 << k)) - 1
    pats = _patterns(k)
    root = len(prog[0]) - 1
    last = npoints - 1
    for chunk in range(1 << (total - k)):
        words = []
        for x in range(npoints):
            for j in range(nletters):
                pos = nletters * (last - x) + j
                if pos < k:
                    words.append(pats[pos])
                else:
                    words.append(full if (chunk >> (pos - k)) & 1 else 0)
        tables = eval_words(prog, npoints, words, full)
        hit = tables[root][last]
        if hit:
            low = (hit & -hit).bit_length() - 1
            return (chunk << k) | low
    return -1
