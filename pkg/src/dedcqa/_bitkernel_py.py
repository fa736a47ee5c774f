"""Pure-Python twin of the compiled subset-search kernel.

Same contract as ``_bitkernel``; selected at import time by
``dedcqa.kernel`` when the extension is unavailable (or when
``CQA_PURE_KERNEL=1`` forces it).  Constraints come from
``dedcqa.ground``: pairs ``(body_mask, head_masks)``.
"""

from __future__ import annotations

from typing import Sequence

Constraint = tuple[int, tuple[int, ...]]

BACKEND = "python"


def is_consistent(mask: int, constraints: Sequence[Constraint]) -> bool:
    for body, heads in constraints:
        if body & mask == body and not any(h & mask == h for h in heads):
            return False
    return True


def consistent_masks(nfacts: int, constraints: Sequence[Constraint]) -> list[int]:
    return [m for m in range(1 << nfacts) if is_consistent(m, constraints)]


def maximal_consistent_masks(nfacts: int, constraints: Sequence[Constraint]) -> list[int]:
    """All maximal consistent subsets, ascending as integers.

    Every consistent set extends to a maximal one, so scanning candidates
    by decreasing popcount lets the maximality test run against the
    maximal sets found so far only.
    """
    bycount: dict[int, list[int]] = {}
    for m in consistent_masks(nfacts, constraints):
        bycount.setdefault(bin(m).count("1"), []).append(m)
    maximal: list[int] = []
    for size in sorted(bycount, reverse=True):
        for m in bycount[size]:
            if not any(m & big == m for big in maximal):
                maximal.append(m)
    maximal.sort()
    return maximal


def weakly_consistent_table(nfacts: int, constraints: Sequence[Constraint]) -> bytearray:
    """flags[m] == 1 iff some consistent superset of m exists.

    Downward closure of the consistent masks: clearing one bit of a
    weakly consistent mask keeps it weakly consistent.
    """
    total = 1 << nfacts
    flags = bytearray(total)
    for m in range(total):
        if is_consistent(m, constraints):
            flags[m] = 1
    for m in range(total - 1, -1, -1):
        if flags[m]:
            rest = m
            while rest:
                bit = rest & -rest
                flags[m ^ bit] = 1
                rest ^= bit
    return flags


def exists_consistent_superset(nfacts: int, constraints: Sequence[Constraint], seed: int) -> int:
    """Some consistent superset of ``seed`` (as a mask), or -1."""
    comp = ((1 << nfacts) - 1) & ~seed
    sub = comp
    while True:
        cand = seed | sub
        if is_consistent(cand, constraints):
            return cand
        if sub == 0:
            return -1
        sub = (sub - 1) & comp
