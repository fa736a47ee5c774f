"""Boolean query entailment over repairs.

Two semantics: a query is all-repairs entailed when it holds in every
repair, and intersection entailed when it holds in the intersection of
all repairs.  For a single ground fact the two coincide, as they do for
every query under linear dependency sets.

Methods:

  * brute           -- enumerate repairs, evaluate the query;
  * search-allrep   -- look for a counterexample subset: consistent, not
                       satisfying the query, with no weakly consistent
                       single-fact extension (i.e. a repair);
  * search-intrep   -- per query image, look for a weakly consistent
                       subset that stops being weakly consistent with
                       the image added (such a subset sits inside a
                       repair avoiding the image);
  * bounded-intrep  -- same test, but via forward closures of subsets of
                       bounded size (acyclic + FDET);
  * unique          -- evaluate over the unique repair (linear);
  * images          -- some image made of singly weakly consistent facts
                       (linear + FDET, via reachability);
  * rewrite-intrep  -- one first-order sentence over the plain database
                       (acyclic + FDET);
  * rewrite-linear  -- same, for acyclic + linear sets.
"""

from __future__ import annotations

import enum
import itertools
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence

from . import foeval as fo
from .classify import classify, is_fdet
from .core import (
    Atom,
    BOT,
    CQ,
    Conjunction,
    Database,
    Dependency,
    Fact,
    UCQ,
    Var,
    holds,
    sort_facts,
)
from .errors import (
    FormulaTooLarge,
    InstanceTooLarge,
    MethodInapplicable,
    NotAcyclic,
    NotFDET,
    NotLinear,
)
from .ground import query_image_masks
from .repair import enumerate_repairs
from .weakcons import (
    DEFAULT_CAP,
    _Fresh,
    _conj_formula,
    _ineq_formulas,
    _topo_deps,
    atom_weak_consistency_formula,
    cached_weak_consistency_sentence,
    grounded,
    unique_repair_linear,
    wc_table,
    weakly_consistent_reach,
)

DEFAULT_ATOM_SET_GUARD = 100_000


class Semantics(enum.Enum):
    ALLREP = "allrep"
    INTREP = "intrep"


class EntMethod(enum.Enum):
    AUTO = "auto"
    BRUTE = "brute"
    SEARCH_ALLREP = "search-allrep"
    SEARCH_INTREP = "search-intrep"
    BOUNDED_INTREP = "bounded-intrep"
    UNIQUE = "unique"
    IMAGES = "images"
    REWRITE_INTREP = "rewrite-intrep"
    REWRITE_LINEAR = "rewrite-linear"


def _check_query(query: UCQ) -> None:
    if not query.is_boolean:
        raise ValueError("query must be Boolean")
    if not query.is_safe:
        raise ValueError("query must be safe")


def entails(
    db: Database,
    deps: Sequence[Dependency],
    query: UCQ,
    semantics: Semantics = Semantics.ALLREP,
    method: EntMethod = EntMethod.AUTO,
    cap: int = DEFAULT_CAP,
) -> bool:
    _check_query(query)
    deps = tuple(deps)
    if method is EntMethod.AUTO:
        method = _auto_method(db, deps, semantics)
    if method is EntMethod.BRUTE:
        rs = enumerate_repairs(db, deps, cap)
        if semantics is Semantics.ALLREP:
            return all(holds(query, r) for r in rs.repairs)
        return holds(query, rs.intersection)
    if method is EntMethod.SEARCH_ALLREP:
        if semantics is not Semantics.ALLREP:
            raise MethodInapplicable("the counterexample search decides all-repairs entailment")
        return _search_allrep(db, deps, query, cap) is None
    if method is EntMethod.SEARCH_INTREP:
        if semantics is not Semantics.INTREP:
            raise MethodInapplicable("the image search decides intersection entailment")
        return _search_intrep(db, deps, query, cap) is not None
    if method is EntMethod.BOUNDED_INTREP:
        if semantics is not Semantics.INTREP:
            raise MethodInapplicable("the bounded search decides intersection entailment")
        return _bounded_intrep(db, deps, query, cap) is not None
    if method is EntMethod.UNIQUE:
        return holds(query, unique_repair_linear(db, deps))
    if method is EntMethod.IMAGES:
        return _images_method(db, deps, query) is not None
    if method is EntMethod.REWRITE_INTREP:
        if semantics is not Semantics.INTREP:
            raise MethodInapplicable("this rewriting decides intersection entailment")
        if not is_fdet(deps, db):
            raise NotFDET("the dependency set is not forward-deterministic for this database")
        sentence = cached_entailment_sentence(query, deps)
        return fo.evaluate(sentence, fo.context(db.facts), memo=True)
    if method is EntMethod.REWRITE_LINEAR:
        sentence = entailment_sentence_linear(query, deps)
        return fo.evaluate(sentence, fo.context(db.facts))
    raise MethodInapplicable(f"unknown method {method!r}")


def instance_check(
    db: Database,
    deps: Sequence[Dependency],
    f: Fact,
    method: EntMethod = EntMethod.AUTO,
    cap: int = DEFAULT_CAP,
) -> bool:
    """Entailment of a single ground fact; both semantics coincide here."""
    db.schema.check_atom(f)
    query = UCQ((CQ((), Conjunction((f,), ())),))
    return entails(db, deps, query, Semantics.INTREP, method, cap)


def _auto_method(db: Database, deps: tuple[Dependency, ...], semantics: Semantics) -> EntMethod:
    cls = classify(deps, db)
    if cls.acyclic and cls.linear:
        return EntMethod.REWRITE_LINEAR
    if cls.linear and cls.fdet:
        return EntMethod.IMAGES
    if semantics is Semantics.INTREP and cls.acyclic and cls.fdet:
        return EntMethod.BOUNDED_INTREP
    if cls.linear:
        return EntMethod.UNIQUE
    if semantics is Semantics.ALLREP:
        return EntMethod.SEARCH_ALLREP
    return EntMethod.SEARCH_INTREP


def rewrite_affordable(deps: Sequence[Dependency], max_bound: int = 4) -> bool:
    """Whether the intersection-entailment rewriting is cheap enough to be
    picked implicitly; explicit calls may exceed this freely."""
    if subset_size_bound(tuple(deps)) > max_bound:
        return False
    try:
        atom_sets(tuple(deps))
    except FormulaTooLarge:
        return False
    return True


def admissible_ent_methods(
    db: Database, deps: Sequence[Dependency], semantics: Semantics
) -> list[EntMethod]:
    cls = classify(tuple(deps), db)
    out = [EntMethod.BRUTE]
    if semantics is Semantics.ALLREP:
        out.append(EntMethod.SEARCH_ALLREP)
    else:
        out.append(EntMethod.SEARCH_INTREP)
        if cls.acyclic and cls.fdet:
            out.append(EntMethod.BOUNDED_INTREP)
            if rewrite_affordable(deps):
                out.append(EntMethod.REWRITE_INTREP)
    if cls.linear:
        out.append(EntMethod.UNIQUE)
    if cls.linear and cls.fdet:
        out.append(EntMethod.IMAGES)
    if cls.acyclic and cls.linear:
        out.append(EntMethod.REWRITE_LINEAR)
    return out


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------


def _masks_by_size(n: int) -> list[int]:
    return sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m))


def _check_cap(db: Database, cap: int) -> None:
    if len(db.facts) > cap:
        raise InstanceTooLarge(
            f"{len(db.facts)} facts exceed the cap of {cap}; raise the cap to override"
        )


def _search_allrep(
    db: Database, deps: tuple[Dependency, ...], query: UCQ, cap: int
) -> Optional[frozenset[Fact]]:
    """A consistent subset avoiding the query with no weakly consistent
    one-fact extension -- a counterexample repair -- or None."""
    _check_cap(db, cap)
    gi = grounded(db, deps)
    table = wc_table(db, deps)
    images = query_image_masks(gi, db, query)
    from . import kernel

    full = gi.full_mask
    for mask in _masks_by_size(gi.size):
        if any(m & mask == m for m in images):
            continue
        if not kernel.is_consistent(mask, gi.constraints):
            continue
        rest = full & ~mask
        blocked = True
        while rest:
            bit = rest & -rest
            if table[mask | bit]:
                blocked = False
                break
            rest ^= bit
        if blocked:
            return frozenset(gi.facts_of(mask))
    return None


def _search_intrep(
    db: Database, deps: tuple[Dependency, ...], query: UCQ, cap: int
) -> Optional[frozenset[Fact]]:
    """An image of the query that no weakly consistent subset can be
    separated from -- it then sits inside every repair -- or None."""
    _check_cap(db, cap)
    gi = grounded(db, deps)
    table = wc_table(db, deps)
    images = query_image_masks(gi, db, query)
    order = _masks_by_size(gi.size)
    for m in images:
        separated = False
        for mask in order:
            if table[mask] and not table[mask | m]:
                separated = True
                break
        if not separated:
            return frozenset(gi.facts_of(m))
    return None


# ---------------------------------------------------------------------------
# Bounded search via forward closures (acyclic + FDET)
# ---------------------------------------------------------------------------


def subset_size_bound(deps: Sequence[Dependency]) -> int:
    """How large a subset the bounded search must consider: k^(h+1) for
    k the maximum body atom count and h the number of dependencies.

    A violation involves at most k facts, acyclicity bounds derivation
    chains by h, and every derived fact needs at most k supporting
    facts, so k^(h+1) seeds always suffice.
    """
    if not deps:
        return 0
    k = max(len(d.body.atoms) for d in deps)
    return k ** (len(deps) + 1)


class _ClosureOracle:
    """Forward closures of subset masks against the grounded constraints,
    memoized; consistency of a closure only fails on constraints with no
    head image anywhere in the database."""

    def __init__(self, gi):
        self.gi = gi
        self.cache: dict[int, tuple[int, bool]] = {}
        for body, heads in gi.constraints:
            if len(heads) > 1:
                raise NotFDET("two head images for one body instantiation")

    def closure(self, mask: int) -> tuple[int, bool]:
        """(closure mask, closure consistent)."""
        hit = self.cache.get(mask)
        if hit is not None:
            return hit
        m = mask
        changed = True
        while changed:
            changed = False
            for body, heads in self.gi.constraints:
                if body & m == body and heads and heads[0] & m != heads[0]:
                    m |= heads[0]
                    changed = True
        ok = all(
            not (body & m == body and not heads) for body, heads in self.gi.constraints
        )
        self.cache[mask] = (m, ok)
        return m, ok


def _bounded_intrep(
    db: Database, deps: tuple[Dependency, ...], query: UCQ, cap: int
) -> Optional[frozenset[Fact]]:
    """Alg-4-style decision: an image is inside every repair when no
    bounded-size subset has a consistent closure that turns inconsistent
    once the image is added."""
    _topo_deps(deps)  # acyclicity precondition
    _check_cap(db, cap)
    gi = grounded(db, deps)
    oracle = _ClosureOracle(gi)
    images = query_image_masks(gi, db, query)
    bound = min(subset_size_bound(deps), gi.size)
    good = [i for i in range(gi.size) if oracle.closure(1 << i)[1]]
    for m in images:
        if _separating_subset(oracle, m, good, bound) is None:
            return frozenset(gi.facts_of(m))
    return None


def _separating_subset(
    oracle: _ClosureOracle, image_mask: int, good: list[int], bound: int
) -> Optional[int]:
    for size in range(bound + 1):
        for combo in itertools.combinations(good, size):
            mask = 0
            for i in combo:
                mask |= 1 << i
            _, ok = oracle.closure(mask)
            if not ok:
                continue
            _, ok_with = oracle.closure(mask | image_mask)
            if not ok_with:
                return mask
    return None


# ---------------------------------------------------------------------------
# Linear + FDET: image-wise reachability
# ---------------------------------------------------------------------------


def _images_method(
    db: Database, deps: tuple[Dependency, ...], query: UCQ
) -> Optional[frozenset[Fact]]:
    """An image all of whose facts are singly weakly consistent, or None."""
    gi = grounded(db, deps)
    for m in query_image_masks(gi, db, query):
        facts = gi.facts_of(m)
        if all(weakly_consistent_reach(f, db, deps) for f in facts):
            return frozenset(facts)
    return None


# ---------------------------------------------------------------------------
# Witness production (CLI)
# ---------------------------------------------------------------------------


def entailment_witness(
    db: Database,
    deps: Sequence[Dependency],
    query: UCQ,
    semantics: Semantics,
    method: EntMethod,
    cap: int = DEFAULT_CAP,
) -> Optional[dict]:
    """A countermodel repair (all-repairs, false) or an always-kept image
    (intersection, true), for the methods that construct one."""
    deps = tuple(deps)
    if method is EntMethod.AUTO:
        method = _auto_method(db, deps, semantics)
    if semantics is Semantics.ALLREP:
        if method is EntMethod.SEARCH_ALLREP:
            counter = _search_allrep(db, deps, query, cap)
        elif method is EntMethod.BRUTE:
            counter = next(
                (frozenset(r) for r in enumerate_repairs(db, deps, cap).repairs if not holds(query, r)),
                None,
            )
        else:
            return None
        if counter is None:
            return None
        return {"countermodel_repair": [f for f in sort_facts(counter)]}
    image: Optional[frozenset[Fact]] = None
    if method is EntMethod.SEARCH_INTREP:
        image = _search_intrep(db, deps, query, cap)
    elif method is EntMethod.BOUNDED_INTREP:
        image = _bounded_intrep(db, deps, query, cap)
    elif method is EntMethod.IMAGES:
        image = _images_method(db, deps, query)
    elif method is EntMethod.BRUTE:
        rs = enumerate_repairs(db, deps, cap)
        inter = frozenset(rs.intersection)
        from .core import images_of_ucq

        image = next((img for img in images_of_ucq(query, db) if img <= inter), None)
    if image is None:
        return None
    return {"entailed_image": [f for f in sort_facts(image)]}


# ---------------------------------------------------------------------------
# Rewriting: acyclic + FDET sets (intersection semantics)
# ---------------------------------------------------------------------------


def atom_sets(deps: Sequence[Dependency], guard: int = DEFAULT_ATOM_SET_GUARD) -> list[tuple[Atom, ...]]:
    """All predicate multisets up to the size bound, one fresh variable
    per argument position."""
    preds: list[tuple[str, int]] = []
    for dep in deps:
        atoms = list(dep.body.atoms)
        for q in dep.head.disjuncts:
            atoms.extend(q.body.atoms)
        for a in atoms:
            key = (a.predicate, len(a.args))
            if a.predicate != BOT and key not in preds:
                preds.append(key)
    preds.sort()
    bound = subset_size_bound(deps)
    total = sum(comb(len(preds) + size - 1, size) for size in range(bound + 1)) if preds else 1
    if total > guard:
        raise FormulaTooLarge(
            f"{total} atom sets exceed the guard of {guard}; the rewriting would be impractical"
        )
    out: list[tuple[Atom, ...]] = []
    counter = itertools.count(1)
    for size in range(bound + 1):
        for combo in itertools.combinations_with_replacement(preds, size):
            atoms = tuple(
                Atom(p, tuple(Var(f"u{next(counter)}") for _ in range(r))) for p, r in combo
            )
            out.append(atoms)
    return out


def _restrict_aux(phi: fo.Formula, pool: Sequence[Atom]) -> fo.Formula:
    """Reinterpret auxiliary membership as 'equals one of these atoms'."""
    if isinstance(phi, fo.FAtom):
        if not phi.aux:
            return phi
        options: list[fo.Formula] = []
        for a in pool:
            if a.predicate == phi.predicate and len(a.args) == len(phi.args):
                eqs = [fo.FAtom(a.predicate, a.args, aux=False)]
                eqs += [fo.equal(s, t) for s, t in zip(phi.args, a.args)]
                options.append(fo.conj(eqs))
        return fo.disj(options)
    if isinstance(phi, (fo.FTrue, fo.FFalse, fo.FEq, fo.FNeq)):
        return phi
    if isinstance(phi, fo.FNot):
        return fo.neg(_restrict_aux(phi.sub, pool))
    if isinstance(phi, fo.FAnd):
        return fo.conj(_restrict_aux(p, pool) for p in phi.parts)
    if isinstance(phi, fo.FOr):
        return fo.disj(_restrict_aux(p, pool) for p in phi.parts)
    if isinstance(phi, fo.FImplies):
        return fo.implies(_restrict_aux(phi.left, pool), _restrict_aux(phi.right, pool))
    if isinstance(phi, fo.FExists):
        return fo.exists(phi.vars, _restrict_aux(phi.sub, pool))
    if isinstance(phi, fo.FForall):
        return fo.forall(phi.vars, _restrict_aux(phi.sub, pool))
    raise TypeError(f"not a formula: {phi!r}")


@lru_cache(maxsize=64)
def _renamed_wc_sentence(deps: tuple[Dependency, ...]) -> fo.Formula:
    # Bound variables renamed apart so pool/query variables spliced in by
    # the aux restriction can never be captured.
    return fo.rename_bound_apart(cached_weak_consistency_sentence(deps))


def weak_consistency_of_atoms(deps: Sequence[Dependency], pool: Sequence[Atom]) -> fo.Formula:
    """The weak-consistency sentence specialized to the instantiations of
    a fixed atom list instead of an auxiliary relation."""
    return _restrict_aux(_renamed_wc_sentence(tuple(deps)), pool)


def entailment_sentence(
    query: UCQ,
    deps: Sequence[Dependency],
    guard: int = DEFAULT_ATOM_SET_GUARD,
) -> fo.Formula:
    """Intersection-entailment rewriting for acyclic sets, evaluated over
    the plain database (forward determinism required of the database).

    Per query disjunct: some image exists such that for every candidate
    atom set, instantiations that are weakly consistent stay weakly
    consistent with the image added.
    """
    _check_query(query)
    topo = _topo_deps(tuple(deps))
    sets = atom_sets(topo, guard)
    options: list[fo.Formula] = []
    for q in query.disjuncts:
        parts: list[fo.Formula] = [_conj_formula(q.body, aux=False)]
        for pool in sets:
            guard_atoms = [fo.FAtom(a.predicate, a.args, aux=False) for a in pool]
            before = weak_consistency_of_atoms(topo, pool)
            after = weak_consistency_of_atoms(topo, tuple(pool) + q.body.atoms)
            vars_of_pool: list[Var] = []
            for a in pool:
                vars_of_pool.extend(t for t in a.args if isinstance(t, Var))
            parts.append(
                fo.forall(
                    vars_of_pool,
                    fo.implies(fo.conj(guard_atoms), fo.implies(before, after)),
                )
            )
        options.append(fo.exists(q.exists_vars, fo.conj(parts)))
    return fo.disj(options)


@lru_cache(maxsize=128)
def cached_entailment_sentence(query: UCQ, deps: tuple[Dependency, ...]) -> fo.Formula:
    return entailment_sentence(query, deps)


# ---------------------------------------------------------------------------
# Rewriting: acyclic + linear sets (both semantics)
# ---------------------------------------------------------------------------


def entailment_sentence_linear(query: UCQ, deps: Sequence[Dependency]) -> fo.Formula:
    """Entailment rewriting for acyclic linear sets: some image whose
    facts are each weakly consistent on their own."""
    _check_query(query)
    if not all(d.is_linear for d in deps):
        raise NotLinear("this rewriting needs linear dependencies")
    topo = _topo_deps(tuple(deps))
    fresh = _Fresh()
    options: list[fo.Formula] = []
    for q in query.disjuncts:
        parts: list[fo.Formula] = [_conj_formula(q.body, aux=False)]
        for a in q.body.atoms:
            parts.append(atom_weak_consistency_formula(a, topo, 0, fresh))
        options.append(fo.exists(q.exists_vars, fo.conj(parts)))
    return fo.disj(options)
