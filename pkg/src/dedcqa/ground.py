"""Grounding a problem instance to bitmask constraints.

Facts of the database are numbered in canonical order; a subset is then
a machine-word bitmask.  Every instantiation of a dependency body in the
FULL database becomes one constraint ``(body_mask, head_masks)``: a
subset S satisfies it when body_mask being inside S forces at least one
head mask inside S.  Because S is a subset of the database, its body
instantiations and head images are exactly the database-level ones that
happen to fall inside S, so subset consistency reduces to pure bit
tests.  The kernel backends consume this representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    Database,
    Dependency,
    Fact,
    UCQ,
    apply_conjunction,
    image,
    instantiations,
    sort_facts,
)

Constraint = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class GroundInstance:
    facts: tuple[Fact, ...]
    index: dict[Fact, int]
    constraints: tuple[Constraint, ...]

    @property
    def size(self) -> int:
        return len(self.facts)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.facts)) - 1

    def mask_of(self, facts: Iterable[Fact]) -> int:
        mask = 0
        for f in facts:
            mask |= 1 << self.index[f]
        return mask

    def facts_of(self, mask: int) -> list[Fact]:
        return [f for i, f in enumerate(self.facts) if mask >> i & 1]


def ground(db: Database, deps: Sequence[Dependency]) -> GroundInstance:
    facts = tuple(db.sorted_facts())
    index = {f: i for i, f in enumerate(facts)}
    seen: set[Constraint] = set()
    constraints: list[Constraint] = []
    for dep in deps:
        for sub in instantiations(dep.body, db.facts):
            body_mask = 0
            for f in image(dep.body, sub):
                body_mask |= 1 << index[f]
            head_masks: list[int] = []
            for q in dep.head.disjuncts:
                grounded = apply_conjunction(q.body, sub)
                for hsub in instantiations(grounded, db.facts):
                    m = 0
                    for f in image(grounded, hsub):
                        m |= 1 << index[f]
                    if m not in head_masks:
                        head_masks.append(m)
            cons = (body_mask, tuple(sorted(head_masks)))
            if cons not in seen:
                seen.add(cons)
                constraints.append(cons)
    return GroundInstance(facts, index, tuple(constraints))


def query_image_masks(gi: GroundInstance, db: Database, query: UCQ) -> tuple[int, ...]:
    """Masks of all images of the query in the database, sorted."""
    masks: set[int] = set()
    for q in query.disjuncts:
        for sub in instantiations(q.body, db.facts):
            m = 0
            for f in image(q.body, sub):
                m |= 1 << gi.index[f]
            masks.add(m)
    return tuple(sorted(masks))


def holds_in_mask(image_masks: Sequence[int], mask: int) -> bool:
    return any(m & mask == m for m in image_masks)
