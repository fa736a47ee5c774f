# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled subset-search kernel.

Mirror of ``_bitkernel_py``: consistency of bitmask-encoded subsets
against grounded constraints, enumeration of all / maximal consistent
subsets, the weak-consistency table and a superset search.  Masks fit a
64-bit word (the cap on brute-force instance sizes is far below that).
"""

from libc.stdlib cimport free, malloc

BACKEND = "cython"

ctypedef unsigned long long u64


cdef struct CArrays:
    int ncons
    u64 *bodies
    int *offsets      # ncons + 1 entries into heads
    u64 *heads
    int nheads


cdef int _load(object constraints, CArrays *out) except -1:
    cdef int ncons = len(constraints)
    cdef int total = 0
    for _, heads in constraints:
        total += len(heads)
    out.ncons = ncons
    out.nheads = total
    out.bodies = <u64 *> malloc(ncons * sizeof(u64))
    out.offsets = <int *> malloc((ncons + 1) * sizeof(int))
    out.heads = <u64 *> malloc((total if total else 1) * sizeof(u64))
    if out.bodies == NULL or out.offsets == NULL or out.heads == NULL:
        raise MemoryError()
    cdef int i = 0, j = 0
    for body, heads in constraints:
        out.bodies[i] = <u64> body
        out.offsets[i] = j
        for h in heads:
            out.heads[j] = <u64> h
            j += 1
        i += 1
    out.offsets[ncons] = j
    return 0


cdef void _unload(CArrays *arr) noexcept:
    free(arr.bodies)
    free(arr.offsets)
    free(arr.heads)


cdef bint _consistent(u64 mask, CArrays *arr) noexcept:
    cdef int i, j
    cdef bint ok
    for i in range(arr.ncons):
        if arr.bodies[i] & mask == arr.bodies[i]:
            ok = False
            for j in range(arr.offsets[i], arr.offsets[i + 1]):
                if arr.heads[j] & mask == arr.heads[j]:
                    ok = True
                    break
            if not ok:
                return False
    return True


def is_consistent(mask, constraints):
    cdef CArrays arr
    _load(constraints, &arr)
    try:
        return bool(_consistent(<u64> mask, &arr))
    finally:
        _unload(&arr)


def consistent_masks(nfacts, constraints):
    cdef CArrays arr
    cdef u64 total = (<u64> 1) << <int> nfacts
    cdef u64 m
    out = []
    _load(constraints, &arr)
    try:
        for m in range(total):
            if _consistent(m, &arr):
                out.append(m)
    finally:
        _unload(&arr)
    return out


cdef int _popcount(u64 x) noexcept:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def maximal_consistent_masks(nfacts, constraints):
    """All maximal consistent subsets, ascending as integers."""
    cdef CArrays arr
    cdef int n = nfacts
    cdef u64 total = (<u64> 1) << n
    cdef u64 m, big
    cdef int size
    cdef bint covered
    _load(constraints, &arr)
    bycount = [[] for _ in range(n + 1)]
    try:
        for m in range(total):
            if _consistent(m, &arr):
                bycount[_popcount(m)].append(m)
    finally:
        _unload(&arr)
    maximal = []
    cdef list level
    for size in range(n, -1, -1):
        level = bycount[size]
        for m in level:
            covered = False
            for big0 in maximal:
                big = <u64> big0
                if m & big == m:
                    covered = True
                    break
            if not covered:
                maximal.append(m)
    maximal.sort()
    return maximal


def weakly_consistent_table(nfacts, constraints):
    """flags[m] == 1 iff some consistent superset of mask m exists."""
    cdef CArrays arr
    cdef int n = nfacts
    cdef u64 total = (<u64> 1) << n
    cdef u64 m, rest, bit
    flags = bytearray(total)
    cdef unsigned char[:] view = flags
    _load(constraints, &arr)
    try:
        for m in range(total):
            if _consistent(m, &arr):
                view[m] = 1
        m = total
        while m > 0:
            m -= 1
            if view[m]:
                rest = m
                while rest:
                    bit = rest & (~rest + 1)
                    view[m ^ bit] = 1
                    rest ^= bit
    finally:
        _unload(&arr)
    return flags


def exists_consistent_superset(nfacts, constraints, seed):
    """Some consistent superset of ``seed`` (as a mask), or -1."""
    cdef CArrays arr
    cdef u64 s = <u64> seed
    cdef u64 comp = (((<u64> 1) << <int> nfacts) - 1) & ~s
    cdef u64 sub = comp
    cdef u64 cand
    _load(constraints, &arr)
    try:
        while True:
            cand = s | sub
            if _consistent(cand, &arr):
                return cand
            if sub == 0:
                return -1
            sub = (sub - 1) & comp
    finally:
        _unload(&arr)
