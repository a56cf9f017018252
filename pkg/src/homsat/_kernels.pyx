# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels; same contract as ``_kernels_py``.

Models are processed 64 at a time, one bit per model in a ``uint64`` word.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cdef enum:
    OP_PROP = 0
    OP_TOP = 1
    OP_NOT = 2
    OP_OR = 3
    OP_B = 4
    OP_D = 5
    OP_A = 6

cdef uint64_t[6] PATTERNS
PATTERNS[0] = 0xAAAAAAAAAAAAAAAAULL
PATTERNS[1] = 0xCCCCCCCCCCCCCCCCULL
PATTERNS[2] = 0xF0F0F0F0F0F0F0F0ULL
PATTERNS[3] = 0xFF00FF00FF00FF00ULL
PATTERNS[4] = 0xFFFF0000FFFF0000ULL
PATTERNS[5] = 0xFFFFFFFF00000000ULL


cdef int _eval(int nnodes, int* ops, int* arg_a, int* arg_b, int n, int nletters,
               uint64_t* letter_words, uint64_t full, uint64_t* out, uint64_t* scratch) nogil:
    cdef int node, x, y, z, nn = n * n
    cdef uint64_t acc
    cdef uint64_t* t
    cdef uint64_t* s1
    cdef uint64_t* s2
    for node in range(nnodes):
        t = out + node * nn
        memset(t, 0, nn * sizeof(uint64_t))
        if ops[node] == OP_PROP:
            for x in range(n):
                acc = full
                for y in range(x, n):
                    acc &= letter_words[y * nletters + arg_a[node]]
                    t[x * n + y] = acc
        elif ops[node] == OP_TOP:
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = full
        elif ops[node] == OP_NOT:
            s1 = out + arg_a[node] * nn
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = full ^ s1[x * n + y]
        elif ops[node] == OP_OR:
            s1 = out + arg_a[node] * nn
            s2 = out + arg_b[node] * nn
            for x in range(n):
                for y in range(x, n):
                    t[x * n + y] = s1[x * n + y] | s2[x * n + y]
        elif ops[node] == OP_B:
            s1 = out + arg_a[node] * nn
            for x in range(n):
                acc = 0
                for y in range(x, n):
                    t[x * n + y] = acc
                    acc |= s1[x * n + y]
        elif ops[node] == OP_D:
            s1 = out + arg_a[node] * nn
            memset(scratch, 0, nn * sizeof(uint64_t))
            for y in range(n):
                acc = 0
                x = y - 1
                while x >= 0:
                    acc |= s1[(x + 1) * n + y]
                    scratch[x * n + y] = acc
                    x -= 1
            for x in range(n):
                acc = 0
                for y in range(x, n):
                    t[x * n + y] = acc
                    acc |= scratch[x * n + y]
        elif ops[node] == OP_A:
            s1 = out + arg_a[node] * nn
            for y in range(n):
                acc = 0
                for z in range(y, n):
                    acc |= s1[y * n + z]
                for x in range(y + 1):
                    t[x * n + y] = acc
        else:
            return -1
    return 0


cdef class _Prog:
    cdef int nnodes
    cdef int* ops
    cdef int* arg_a
    cdef int* arg_b

    def __cinit__(self, prog):
        ops, a, b = prog
        self.nnodes = len(ops)
        self.ops = <int*> malloc(max(1, self.nnodes) * sizeof(int))
        self.arg_a = <int*> malloc(max(1, self.nnodes) * sizeof(int))
        self.arg_b = <int*> malloc(max(1, self.nnodes) * sizeof(int))
        if not self.ops or not self.arg_a or not self.arg_b:
            raise MemoryError()
        for i in range(self.nnodes):
            self.ops[i] = ops[i]
            self.arg_a[i] = a[i]
            self.arg_b[i] = b[i]

    def __dealloc__(self):
        free(self.ops)
        free(self.arg_a)
        free(self.arg_b)


def eval_table(prog, points):
    """Truth of every node on every interval of one model, as bytes."""
    cdef _Prog p = _Prog(prog)
    cdef int n = len(points), nn, i, x, j, nletters = 0
    for i in range(p.nnodes):
        if p.ops[i] == OP_PROP and p.arg_a[i] + 1 > nletters:
            nletters = p.arg_a[i] + 1
    nn = n * n
    cdef uint64_t* words = <uint64_t*> malloc(max(1, n * nletters) * sizeof(uint64_t))
    cdef uint64_t* out = <uint64_t*> malloc(max(1, p.nnodes * nn) * sizeof(uint64_t))
    cdef uint64_t* scratch = <uint64_t*> malloc(max(1, nn) * sizeof(uint64_t))
    cdef bytearray res = bytearray(p.nnodes * nn)
    try:
        for x in range(n):
            for j in range(nletters):
                words[x * nletters + j] = (points[x] >> j) & 1
        if _eval(p.nnodes, p.ops, p.arg_a, p.arg_b, n, nletters, words, 1, out, scratch) != 0:
            raise ValueError("bad opcode")
        for i in range(p.nnodes * nn):
            res[i] = <unsigned char> out[i]
    finally:
        free(words)
        free(out)
        free(scratch)
    return bytes(res)


def first_model(prog, int nletters, int npoints):
    """Index of the first satisfying model (point 0 most significant), or -1."""
    cdef _Prog p = _Prog(prog)
    cdef int n = npoints, nn = n * n, total = nletters * npoints
    cdef int k = total if total < 6 else 6
    cdef uint64_t full = (<uint64_t> 1 << (1 << k)) - 1 if k < 6 else <uint64_t> 0xFFFFFFFFFFFFFFFFULL
    cdef long long chunk, nchunks
    cdef int x, j, pos, low
    cdef uint64_t hit
    if total - k >= 62:
        raise OverflowError("too many valuations")
    nchunks = (<long long> 1) << (total - k)
    cdef uint64_t* words = <uint64_t*> malloc(max(1, n * nletters) * sizeof(uint64_t))
    cdef uint64_t* out = <uint64_t*> malloc(max(1, p.nnodes * nn) * sizeof(uint64_t))
    cdef uint64_t* scratch = <uint64_t*> malloc(max(1, nn) * sizeof(uint64_t))
    cdef long long result = -1
    try:
        with nogil:
            chunk = 0
            while chunk < nchunks:
                for x in range(n):
                    for j in range(nletters):
                        pos = nletters * (n - 1 - x) + j
                        if pos < k:
                            words[x * nletters + j] = PATTERNS[pos] & full
                        elif (chunk >> (pos - k)) & 1:
                            words[x * nletters + j] = full
                        else:
                            words[x * nletters + j] = 0
                _eval(p.nnodes, p.ops, p.arg_a, p.arg_b, n, nletters, words, full, out, scratch)
                hit = out[(p.nnodes - 1) * nn + (n - 1)]
                if hit:
                    low = 0
                    while not ((hit >> low) & 1):
                        low += 1
                    result = (chunk << k) | low
                    break
                chunk += 1
    finally:
        free(words)
        free(out)
        free(scratch)
    return result
