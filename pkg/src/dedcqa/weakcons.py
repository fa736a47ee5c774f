"""Weak consistency: can a subset be extended to a consistent subset?

One decision, five roads, picked by the class of the dependency set:

  * brute          -- search for a consistent superset (any class, capped);
  * closure        -- forward closure, then a consistency check (FDET);
  * linear-repair  -- containment in the unique repair (linear);
  * reach          -- no path to the failure vertex in the fact graph
                      (linear and FDET);
  * rewrite-*      -- evaluate a first-order sentence over the database
                      plus an auxiliary copy of the subset (acyclic+FDET,
                      or acyclic+linear).

All admissible roads agree; the test suite drives that agreement on
random instances per class.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from . import foeval as fo
from . import kernel
from .classify import classify, topological_order, dependency_graph
from .core import (
    Atom,
    BOT,
    Conjunction,
    Const,
    CQ,
    Database,
    Dependency,
    Fact,
    Var,
    apply_conjunction,
    consistent_facts,
    fact_key,
    image,
    instantiations,
    sort_facts,
    subsets_by_size,
)
from .errors import InstanceTooLarge, MethodInapplicable, NotAcyclic, NotFDET, NotLinear
from .ground import GroundInstance, ground

DEFAULT_CAP = 20


class WCMethod(enum.Enum):
    AUTO = "auto"
    BRUTE = "brute"
    CLOSURE = "closure"
    LINEAR_REPAIR = "linear-repair"
    REACH = "reach"
    REWRITE_FDET = "rewrite-acyclic-fdet"
    REWRITE_LINEAR = "rewrite-acyclic-linear"


# ---------------------------------------------------------------------------
# Shared, memoized per-instance artifacts
# ---------------------------------------------------------------------------


@lru_cache(maxsize=512)
def grounded(db: Database, deps: tuple[Dependency, ...]) -> GroundInstance:
    return ground(db, deps)


@lru_cache(maxsize=512)
def wc_table(db: Database, deps: tuple[Dependency, ...]) -> bytearray:
    gi = grounded(db, deps)
    return kernel.weakly_consistent_table(gi.size, gi.constraints)


@lru_cache(maxsize=512)
def repair_masks(db: Database, deps: tuple[Dependency, ...]) -> tuple[int, ...]:
    gi = grounded(db, deps)
    return tuple(kernel.maximal_consistent_masks(gi.size, gi.constraints))


def _check_subset(subset: Iterable[Fact], db: Database) -> frozenset[Fact]:
    sub = frozenset(subset)
    extra = sub - db.facts
    if extra:
        worst = sort_facts(extra)[0]
        raise ValueError(f"not a subset of the database: {worst!r}")
    return sub


# ---------------------------------------------------------------------------
# Forward closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForwardClosure:
    closure: frozenset[Fact]
    trace: tuple[tuple[int, tuple[tuple[str, str], ...], frozenset[Fact]], ...]


def forward_closure(seed: Iterable[Fact], db: Database, deps: Sequence[Dependency]) -> ForwardClosure:
    """Least superset of the seed closed under pulling in head images.

    Whenever a dependency body is instantiated inside the set and its
    instantiated head has an image in the database, that (unique) image
    joins the set.  Forward determinism is enforced on the fly: a fired
    body instantiation with two distinct head images raises.
    """
    seed = _check_subset(seed, db)
    closure = set(seed)
    trace: list[tuple[int, tuple[tuple[str, str], ...], frozenset[Fact]]] = []
    changed = True
    while changed:
        changed = False
        for di, dep in enumerate(deps):
            for sub in instantiations(dep.body, closure):
                images = _distinct_head_images(dep, sub, db.facts)
                if len(images) > 1:
                    raise NotFDET(
                        f"dependency {di} has {len(images)} head images for one body instantiation"
                    )
                if images and not images[0] <= closure:
                    closure |= images[0]
                    key = tuple(sorted((v.name, c.name) for v, c in sub.items()))
                    trace.append((di, key, images[0]))
                    changed = True
    return ForwardClosure(frozenset(closure), tuple(trace))


def _distinct_head_images(dep: Dependency, sub, facts) -> list[frozenset[Fact]]:
    seen: set[frozenset[Fact]] = set()
    out: list[frozenset[Fact]] = []
    for q in dep.head.disjuncts:
        grounded_q = apply_conjunction(q.body, sub)
        for hsub in instantiations(grounded_q, facts):
            img = image(grounded_q, hsub)
            if img not in seen:
                seen.add(img)
                out.append(img)
    return out


# ---------------------------------------------------------------------------
# The unique repair of a linear set
# ---------------------------------------------------------------------------


def unique_repair_linear(db: Database, deps: Sequence[Dependency]) -> frozenset[Fact]:
    """Delete body images whose instantiated head lost its last image,
    until the fixpoint; for linear sets this is the single repair."""
    if not all(d.is_linear for d in deps):
        raise NotLinear("unique-repair computation needs linear dependencies")
    current = set(db.facts)
    changed = True
    while changed:
        changed = False
        for dep in deps:
            for sub in instantiations(dep.body, current):
                body_facts = image(dep.body, sub)
                if not body_facts <= current:
                    continue
                if not _head_holds(dep, sub, current):
                    current -= body_facts
                    changed = True
    return frozenset(current)


def _head_holds(dep: Dependency, sub, facts) -> bool:
    for q in dep.head.disjuncts:
        if instantiations(apply_conjunction(q.body, sub), facts):
            return True
    return False


# ---------------------------------------------------------------------------
# Reachability on the fact graph (linear + FDET)
# ---------------------------------------------------------------------------

_FAIL = -1  # virtual vertex: body fired, no head image anywhere


@lru_cache(maxsize=512)
def _fact_graph(db: Database, deps: tuple[Dependency, ...]) -> dict[int, tuple[int, ...]]:
    if not all(d.is_linear for d in deps):
        raise NotLinear("the fact graph needs linear dependencies")
    gi = grounded(db, deps)
    succs: dict[int, list[int]] = {}
    for body, heads in gi.constraints:
        src = body.bit_length() - 1  # single-atom bodies: one bit set
        if len(heads) > 1:
            raise NotFDET("two head images for one body instantiation")
        if not heads:
            succs.setdefault(src, []).append(_FAIL)
        else:
            rest = heads[0]
            while rest:
                bit = rest & -rest
                succs.setdefault(src, []).append(bit.bit_length() - 1)
                rest ^= bit
    return {k: tuple(sorted(set(v))) for k, v in succs.items()}


def weakly_consistent_reach(f: Fact, db: Database, deps: Sequence[Dependency]) -> bool:
    """A single fact is weakly consistent iff the failure vertex is
    unreachable from it in the fact graph."""
    _check_subset([f], db)
    graph = _fact_graph(db, tuple(deps))
    gi = grounded(db, tuple(deps))
    start = gi.index[f]
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in graph.get(v, ()):
            if w == _FAIL:
                return False
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return True


# ---------------------------------------------------------------------------
# Brute force
# ---------------------------------------------------------------------------


def weakly_consistent_brute(
    subset: Iterable[Fact],
    db: Database,
    deps: Sequence[Dependency],
    cap: int = DEFAULT_CAP,
) -> bool:
    sub = _check_subset(subset, db)
    _check_cap(db, cap)
    gi = grounded(db, tuple(deps))
    return kernel.exists_consistent_superset(gi.size, gi.constraints, gi.mask_of(sub)) >= 0


def weak_consistency_witness(
    subset: Iterable[Fact],
    db: Database,
    deps: Sequence[Dependency],
    cap: int = DEFAULT_CAP,
) -> Optional[frozenset[Fact]]:
    """First consistent superset in (size, lexicographic) order, if any."""
    sub = _check_subset(subset, db)
    _check_cap(db, cap)
    gi = grounded(db, tuple(deps))
    base = gi.mask_of(sub)
    missing = [i for i in range(gi.size) if not base >> i & 1]
    for extra in subsets_by_size(missing):
        cand = base
        for i in extra:
            cand |= 1 << i
        if kernel.is_consistent(cand, gi.constraints):
            return frozenset(gi.facts_of(cand))
    return None


def _check_cap(db: Database, cap: int) -> None:
    if len(db.facts) > cap:
        raise InstanceTooLarge(
            f"{len(db.facts)} facts exceed the cap of {cap}; raise the cap to override"
        )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def weakly_consistent(
    subset: Iterable[Fact],
    db: Database,
    deps: Sequence[Dependency],
    method: WCMethod = WCMethod.AUTO,
    cap: int = DEFAULT_CAP,
) -> bool:
    sub = _check_subset(subset, db)
    deps = tuple(deps)
    if method is WCMethod.AUTO:
        method = _auto_method(db, deps)
    if method is WCMethod.BRUTE:
        return weakly_consistent_brute(sub, db, deps, cap)
    if method is WCMethod.CLOSURE:
        fc = forward_closure(sub, db, deps)
        return consistent_facts(fc.closure, deps)
    if method is WCMethod.LINEAR_REPAIR:
        return sub <= unique_repair_linear(db, deps)
    if method is WCMethod.REACH:
        return all(weakly_consistent_reach(f, db, deps) for f in sort_facts(sub))
    if method is WCMethod.REWRITE_FDET:
        from .classify import is_fdet

        if not is_fdet(deps, db):
            raise NotFDET("the dependency set is not forward-deterministic for this database")
        sentence = cached_weak_consistency_sentence(deps)
        return fo.evaluate(sentence, fo.context(db.facts, sub))
    if method is WCMethod.REWRITE_LINEAR:
        sentence = cached_weak_consistency_sentence_linear(deps)
        return fo.evaluate(sentence, fo.context(db.facts, sub))
    raise MethodInapplicable(f"unknown method {method!r}")


def _auto_method(db: Database, deps: tuple[Dependency, ...]) -> WCMethod:
    cls = classify(deps, db)
    if cls.acyclic and cls.linear:
        return WCMethod.REWRITE_LINEAR
    if cls.acyclic and cls.fdet:
        return WCMethod.REWRITE_FDET
    if cls.linear and cls.fdet:
        return WCMethod.REACH
    if cls.linear:
        return WCMethod.LINEAR_REPAIR
    if cls.fdet:
        return WCMethod.CLOSURE
    return WCMethod.BRUTE


def admissible_wc_methods(db: Database, deps: Sequence[Dependency]) -> list[WCMethod]:
    cls = classify(tuple(deps), db)
    out = [WCMethod.BRUTE]
    if cls.fdet:
        out.append(WCMethod.CLOSURE)
    if cls.linear:
        out.append(WCMethod.LINEAR_REPAIR)
    if cls.linear and cls.fdet:
        out.append(WCMethod.REACH)
    if cls.acyclic and cls.fdet:
        out.append(WCMethod.REWRITE_FDET)
    if cls.acyclic and cls.linear:
        out.append(WCMethod.REWRITE_LINEAR)
    return out


# ---------------------------------------------------------------------------
# Sentence construction helpers
# ---------------------------------------------------------------------------


class _Fresh:
    """Source of fresh variables; one per sentence build."""

    def __init__(self) -> None:
        self.counter = 0

    def rename(self, dep: Dependency) -> Dependency:
        self.counter += 1
        tag = self.counter
        mapping = {v: Var(f"{v.name}_{tag}") for v in _dependency_vars(dep)}
        body = apply_conjunction(dep.body, mapping)  # type: ignore[arg-type]
        head = tuple(
            CQ(
                tuple(mapping[v] for v in q.exists_vars),
                apply_conjunction(q.body, mapping),  # type: ignore[arg-type]
            )
            for q in dep.head.disjuncts
        )
        return Dependency(
            tuple(mapping[v] for v in dep.forall_vars),
            body,
            type(dep.head)(head),
        )

    def vars(self, base: str, count: int) -> tuple[Var, ...]:
        self.counter += 1
        tag = self.counter
        return tuple(Var(f"{base}{i + 1}_{tag}") for i in range(count))


def _dependency_vars(dep: Dependency) -> set[Var]:
    out = set(dep.forall_vars)
    for q in dep.head.disjuncts:
        out |= q.body.variables()
        out |= set(q.exists_vars)
    return out


def _conj_formula(conj: Conjunction, aux: bool) -> fo.Formula:
    parts: list[fo.Formula] = []
    for a in conj.atoms:
        if a.predicate == BOT:
            parts.append(fo.FALSE)
        else:
            parts.append(fo.FAtom(a.predicate, a.args, aux=aux))
    for i in conj.ineqs:
        parts.append(fo.unequal(i.left, i.right))
    return fo.conj(parts)


def _ineq_formulas(conj: Conjunction) -> list[fo.Formula]:
    return [fo.unequal(i.left, i.right) for i in conj.ineqs]


def _split_unifier(mgu: dict[Var, "fo.Term"], copy_vars: set[Var]):
    """Split an MGU into copy-variable bindings and context equalities."""
    ctx_eqs: list[fo.Formula] = []
    for v, t in mgu.items():
        if v not in copy_vars:
            ctx_eqs.append(fo.equal(v, t))
    return mgu, ctx_eqs


def _quantify_exists(candidates: Iterable[Var], phi: fo.Formula) -> fo.Formula:
    return fo.exists(tuple(candidates), phi)


# ---------------------------------------------------------------------------
# The acyclic + FDET sentence
# ---------------------------------------------------------------------------


def _topo_deps(deps: Sequence[Dependency]) -> list[Dependency]:
    order = topological_order(dependency_graph(deps))
    if order is None:
        raise NotAcyclic("the dependency graph has a cycle")
    return [deps[i] for i in order]


def closure_membership_formula(
    atom: Atom,
    topo: Sequence[Dependency],
    upto: int,
    fresh: Optional[_Fresh] = None,
) -> fo.Formula:
    """Does the atom's instantiation belong to the forward closure of the
    auxiliary subset, using only the first ``upto`` dependencies?

    Base case: membership in the auxiliary copy.  Recursive case: some
    dependency head unifies with the atom, its body is instantiated in
    the database with every body atom recursively in the closure, and
    the unified head conjunct holds.  Body atoms only need dependencies
    strictly before their deriving one, which makes the recursion
    terminate on the topological order.
    """
    fresh = fresh or _Fresh()
    if atom.predicate == BOT:
        base: fo.Formula = fo.FALSE
    else:
        base = fo.FAtom(atom.predicate, atom.args, aux=True)
    options: list[fo.Formula] = [base]
    from .foeval import unify_atoms

    for j in range(upto):
        dep = topo[j]
        copy = fresh.rename(dep)
        copy_vars = _dependency_vars(copy)
        for q in copy.head.disjuncts:
            for head_atom in q.body.atoms:
                mgu = unify_atoms(atom, head_atom)
                if mgu is None:
                    continue
                mapping, ctx_eqs = _split_unifier(mgu, copy_vars)
                body = apply_conjunction(copy.body, mapping)  # type: ignore[arg-type]
                head_conj = apply_conjunction(q.body, mapping)  # type: ignore[arg-type]
                parts: list[fo.Formula] = list(ctx_eqs)
                parts.append(_conj_formula(body, aux=False))
                parts.append(_conj_formula(head_conj, aux=False))
                for beta in body.atoms:
                    parts.append(closure_membership_formula(beta, topo, j, fresh))
                quant = [
                    v
                    for v in (*copy.forall_vars, *q.exists_vars)
                    if v not in mapping
                ]
                options.append(_quantify_exists(quant, fo.conj(parts)))
    return fo.disj(options)


def weak_consistency_sentence(deps: Sequence[Dependency]) -> fo.Formula:
    """Sentence over base + auxiliary predicates: true on the database
    plus an auxiliary subset exactly when the subset is weakly
    consistent (dependency set acyclic; forward-determinism is required
    of the database at evaluation time).

    Shape per dependency: if all body atoms are in the closure and the
    body inequalities hold, some head disjunct has all its atoms in the
    closure with its inequalities holding.
    """
    topo = _topo_deps(deps)
    h = len(topo)
    fresh = _Fresh()
    conjuncts: list[fo.Formula] = []
    for dep in topo:
        ante_parts: list[fo.Formula] = [
            closure_membership_formula(a, topo, h, fresh) for a in dep.body.atoms
        ]
        ante_parts.extend(_ineq_formulas(dep.body))
        consequent_options: list[fo.Formula] = []
        for q in dep.head.disjuncts:
            parts = [closure_membership_formula(b, topo, h, fresh) for b in q.body.atoms]
            parts.extend(_ineq_formulas(q.body))
            consequent_options.append(fo.exists(q.exists_vars, fo.conj(parts)))
        inner = fo.FImplies(fo.conj(ante_parts), fo.disj(consequent_options))
        conjuncts.append(fo.FForall(dep.forall_vars, inner) if dep.forall_vars else inner)
    if not conjuncts:
        return fo.TRUE
    return conjuncts[0] if len(conjuncts) == 1 else fo.FAnd(tuple(conjuncts))


@lru_cache(maxsize=256)
def cached_weak_consistency_sentence(deps: tuple[Dependency, ...]) -> fo.Formula:
    return weak_consistency_sentence(deps)


@lru_cache(maxsize=256)
def cached_weak_consistency_sentence_linear(deps: tuple[Dependency, ...]) -> fo.Formula:
    return weak_consistency_sentence_linear(deps)


# ---------------------------------------------------------------------------
# The acyclic + linear sentence
# ---------------------------------------------------------------------------


def atom_weak_consistency_formula(
    atom: Atom,
    topo: Sequence[Dependency],
    start: int = 0,
    fresh: Optional[_Fresh] = None,
) -> fo.Formula:
    """The fact this atom denotes is weakly consistent w.r.t. the suffix
    of the topological order starting at ``start``.

    For every suffix dependency whose (single) body atom unifies with
    the atom, and whenever the unifier's context equalities and the body
    inequalities hold, some head disjunct must have an image whose atoms
    are recursively weakly consistent w.r.t. the rest of the order.
    An empty suffix yields the true sentence.
    """
    fresh = fresh or _Fresh()
    from .foeval import unify_atoms

    conjuncts: list[fo.Formula] = []
    for i in range(start, len(topo)):
        copy = fresh.rename(topo[i])
        copy_vars = _dependency_vars(copy)
        mgu = unify_atoms(atom, copy.body.atoms[0])
        if mgu is None:
            continue
        mapping, ctx_eqs = _split_unifier(mgu, copy_vars)
        body = apply_conjunction(copy.body, mapping)  # type: ignore[arg-type]
        fire_conditions = list(ctx_eqs) + _ineq_formulas(body)
        options: list[fo.Formula] = []
        for q in copy.head.disjuncts:
            head_conj = apply_conjunction(q.body, mapping)  # type: ignore[arg-type]
            parts: list[fo.Formula] = [_conj_formula(head_conj, aux=False)]
            for beta in head_conj.atoms:
                parts.append(atom_weak_consistency_formula(beta, topo, i + 1, fresh))
            options.append(fo.exists(q.exists_vars, fo.conj(parts)))
        fired = fo.disj(options)
        conjuncts.append(fo.implies(fo.conj(fire_conditions), fired))
    return fo.conj(conjuncts)


def _predicates_in_order(topo: Sequence[Dependency]) -> list[tuple[str, int]]:
    seen: list[tuple[str, int]] = []
    for dep in topo:
        atoms = list(dep.body.atoms)
        for q in dep.head.disjuncts:
            atoms.extend(q.body.atoms)
        for a in atoms:
            if a.predicate != BOT and (a.predicate, len(a.args)) not in seen:
                seen.append((a.predicate, len(a.args)))
    return seen


def weak_consistency_sentence_linear(deps: Sequence[Dependency]) -> fo.Formula:
    """Sentence over base + auxiliary predicates for acyclic linear sets:
    every auxiliary fact must be weakly consistent, atom by atom."""
    if not all(d.is_linear for d in deps):
        raise NotLinear("this rewriting needs linear dependencies")
    topo = _topo_deps(deps)
    fresh = _Fresh()
    conjuncts: list[fo.Formula] = []
    for pred, arity in _predicates_in_order(topo):
        args = tuple(Var(f"x{i + 1}") for i in range(arity))
        body = atom_weak_consistency_formula(Atom(pred, args), topo, 0, fresh)
        conjuncts.append(
            fo.FForall(args, fo.FImplies(fo.FAtom(pred, args, aux=True), body))
            if args
            else fo.FImplies(fo.FAtom(pred, (), aux=True), body)
        )
    if not conjuncts:
        return fo.TRUE
    return conjuncts[0] if len(conjuncts) == 1 else fo.FAnd(tuple(conjuncts))
