"""Repair enumeration and repair checking.

A repair is a maximal subset of the database consistent with the
dependency set.  Enumeration is the brute-force oracle everything else
is measured against; checking has class-specific roads:

  * brute          -- membership in the enumerated repair list;
  * extend-wc      -- consistency plus no excluded fact whose addition
                      stays weakly consistent (any class);
  * extend-cons    -- consistency plus no excluded fact whose addition
                      stays plainly consistent (acyclic);
  * rewrite        -- one first-order sentence over database + auxiliary
                      subset (acyclic);
  * unique         -- equality with the unique repair (linear);
  * reach          -- consistency plus every excluded fact singly not
                      weakly consistent (linear + FDET).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import foeval as fo
from .classify import classify
from .core import (
    Atom,
    BOT,
    Database,
    Dependency,
    Fact,
    Var,
    consistent_facts,
    fact_key,
    sort_facts,
)
from .errors import InstanceTooLarge, MethodInapplicable, NotAcyclic, NotLinear
from .weakcons import (
    DEFAULT_CAP,
    WCMethod,
    _check_subset,
    _topo_deps,
    _conj_formula,
    _ineq_formulas,
    grounded,
    repair_masks,
    unique_repair_linear,
    wc_table,
    weakly_consistent,
    weakly_consistent_reach,
)
from functools import lru_cache


class RCMethod(enum.Enum):
    AUTO = "auto"
    BRUTE = "brute"
    EXTEND_WC = "extend-wc"
    EXTEND_CONS = "extend-cons"
    REWRITE = "rewrite"
    UNIQUE = "unique"
    REACH = "reach"


@dataclass(frozen=True)
class RepairSet:
    repairs: tuple[tuple[Fact, ...], ...]
    intersection: tuple[Fact, ...]

    def as_sets(self) -> list[frozenset[Fact]]:
        return [frozenset(r) for r in self.repairs]

    def contains(self, facts: Iterable[Fact]) -> bool:
        return frozenset(facts) in self.as_sets()


def enumerate_repairs(db: Database, deps: Sequence[Dependency], cap: int = DEFAULT_CAP) -> RepairSet:
    """All maximal consistent subsets, canonically ordered."""
    if len(db.facts) > cap:
        raise InstanceTooLarge(
            f"{len(db.facts)} facts exceed the cap of {cap}; raise the cap to override"
        )
    gi = grounded(db, tuple(deps))
    masks = repair_masks(db, tuple(deps))
    repairs = sorted(
        (tuple(sort_facts(gi.facts_of(m))) for m in masks),
        key=lambda r: tuple(fact_key(f) for f in r),
    )
    inter = set(db.facts)
    for m in masks:
        inter &= set(gi.facts_of(m))
    return RepairSet(tuple(repairs), tuple(sort_facts(inter)))


def repair_check(
    subset: Iterable[Fact],
    db: Database,
    deps: Sequence[Dependency],
    method: RCMethod = RCMethod.AUTO,
    cap: int = DEFAULT_CAP,
) -> bool:
    sub = _check_subset(subset, db)
    deps = tuple(deps)
    if method is RCMethod.AUTO:
        method = _auto_method(db, deps)
    if method is RCMethod.BRUTE:
        return enumerate_repairs(db, deps, cap).contains(sub)
    if method is RCMethod.EXTEND_WC:
        if not consistent_facts(sub, deps):
            return False
        return _blocking_fact(sub, db, deps, weak=True) is None
    if method is RCMethod.EXTEND_CONS:
        _require_acyclic(deps)
        if not consistent_facts(sub, deps):
            return False
        return _blocking_fact(sub, db, deps, weak=False) is None
    if method is RCMethod.REWRITE:
        # The sentence only speaks about predicates of the dependency
        # set; facts over other predicates are unconstrained, hence in
        # every repair, and are checked for membership directly.
        covered = _all_predicates(_topo_deps(deps))
        names = {p for p, _ in covered}
        if any(f.predicate not in names for f in db.facts - sub):
            return False
        sentence = cached_repair_check_sentence(deps)
        return fo.evaluate(sentence, fo.context(db.facts, sub))
    if method is RCMethod.UNIQUE:
        return sub == unique_repair_linear(db, deps)
    if method is RCMethod.REACH:
        if not consistent_facts(sub, deps):
            return False
        for f in sort_facts(db.facts - sub):
            if weakly_consistent_reach(f, db, deps):
                return False
        return True
    raise MethodInapplicable(f"unknown method {method!r}")


def blocking_fact(
    subset: Iterable[Fact],
    db: Database,
    deps: Sequence[Dependency],
) -> Optional[Fact]:
    """First excluded fact whose addition keeps the set weakly consistent,
    if the subset is consistent; None otherwise."""
    sub = _check_subset(subset, db)
    deps = tuple(deps)
    if not consistent_facts(sub, deps):
        return None
    return _blocking_fact(sub, db, deps, weak=True)


def _blocking_fact(
    sub: frozenset[Fact], db: Database, deps: tuple[Dependency, ...], weak: bool
) -> Optional[Fact]:
    for f in sort_facts(db.facts - sub):
        bigger = sub | {f}
        if weak:
            if weakly_consistent(bigger, db, deps):
                return f
        else:
            if consistent_facts(bigger, deps):
                return f
    return None


def _auto_method(db: Database, deps: tuple[Dependency, ...]) -> RCMethod:
    cls = classify(deps, db)
    if cls.acyclic:
        return RCMethod.REWRITE
    if cls.linear and cls.fdet:
        return RCMethod.REACH
    if cls.linear:
        return RCMethod.UNIQUE
    return RCMethod.EXTEND_WC


def admissible_rc_methods(db: Database, deps: Sequence[Dependency]) -> list[RCMethod]:
    cls = classify(tuple(deps), db)
    out = [RCMethod.BRUTE, RCMethod.EXTEND_WC]
    if cls.acyclic:
        out += [RCMethod.EXTEND_CONS, RCMethod.REWRITE]
    if cls.linear:
        out.append(RCMethod.UNIQUE)
    if cls.linear and cls.fdet:
        out.append(RCMethod.REACH)
    return out


def _require_acyclic(deps: tuple[Dependency, ...]) -> None:
    _topo_deps(deps)  # raises NotAcyclic on a cycle


# ---------------------------------------------------------------------------
# The repair-checking sentence (acyclic sets)
# ---------------------------------------------------------------------------


def _violation_formula(dep: Dependency, extra: Optional[tuple[str, tuple[Var, ...]]]) -> fo.Formula:
    """The body sits inside the marked subset while no head disjunct does.

    ``extra`` optionally names one more fact (predicate + outer
    variables) treated as if it were in the subset: an auxiliary atom
    additionally matches when its arguments equal those variables.
    """

    def atom_in_subset(a: Atom) -> fo.Formula:
        if a.predicate == BOT:
            return fo.FALSE
        base: fo.Formula = fo.FAtom(a.predicate, a.args, aux=True)
        if extra is not None and extra[0] == a.predicate and len(extra[1]) == len(a.args):
            eqs = fo.conj(fo.equal(s, t) for s, t in zip(a.args, extra[1]))
            return fo.disj([base, eqs])
        return base

    body_parts = [atom_in_subset(a) for a in dep.body.atoms]
    body_parts += _ineq_formulas(dep.body)
    head_options = []
    for q in dep.head.disjuncts:
        parts = [atom_in_subset(a) for a in q.body.atoms]
        parts += _ineq_formulas(q.body)
        head_options.append(fo.exists(q.exists_vars, fo.conj(parts)))
    return fo.exists(
        dep.forall_vars, fo.conj(body_parts + [fo.neg(fo.disj(head_options))])
    )


def inconsistency_formula(
    deps: Sequence[Dependency], extra: Optional[tuple[str, tuple[Var, ...]]] = None
) -> fo.Formula:
    """Some dependency is violated by the marked subset (plus the extra
    fact, when given)."""
    return fo.disj(_violation_formula(dep, extra) for dep in deps)


def repair_check_sentence(deps: Sequence[Dependency]) -> fo.Formula:
    """Sentence over base + auxiliary predicates: true on the database
    plus an auxiliary subset exactly when the subset is a repair
    (acyclic sets).

    Conjunct one: the subset itself is consistent.  Conjunct group two:
    adding any single database fact outside the subset breaks
    consistency; for acyclic sets that local condition is equivalent to
    maximality.
    """
    topo = _topo_deps(tuple(deps))
    consistent_part = fo.neg(inconsistency_formula(topo))
    per_pred: list[fo.Formula] = [consistent_part]
    for pred, arity in _all_predicates(topo):
        args = tuple(Var(f"x{i + 1}") for i in range(arity))
        addable = fo.conj(
            [
                fo.FAtom(pred, args, aux=False),
                fo.neg(fo.FAtom(pred, args, aux=True)),
            ]
        )
        breaks = inconsistency_formula(topo, extra=(pred, args))
        inner = fo.FImplies(addable, breaks)
        per_pred.append(fo.FForall(args, inner) if args else inner)
    return fo.FAnd(tuple(per_pred)) if len(per_pred) > 1 else per_pred[0]


@lru_cache(maxsize=256)
def cached_repair_check_sentence(deps: tuple[Dependency, ...]) -> fo.Formula:
    return repair_check_sentence(deps)


def _all_predicates(deps: Sequence[Dependency]) -> list[tuple[str, int]]:
    seen: list[tuple[str, int]] = []
    for dep in deps:
        atoms = list(dep.body.atoms)
        for q in dep.head.disjuncts:
            atoms.extend(q.body.atoms)
        for a in atoms:
            key = (a.predicate, len(a.args))
            if a.predicate != BOT and key not in seen:
                seen.append(key)
    return seen
