"""Data model for schemas, facts, queries and dependencies.

Everything here is immutable and hashable; the semantic operations
(instantiation matching, images, satisfaction, consistency) are pure
functions, so concurrent use on shared values is safe.

Conventions:
  * variables and constants live in disjoint namespaces, decided at
    construction/parse time (there is no capitalization convention);
  * constants compare by name only -- the only primitive on them is
    (in)equality;
  * all set-valued results come back in a canonical order (facts sort
    lexicographically by predicate, then argument names) so downstream
    output is reproducible byte for byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

# Reserved nullary predicate standing for an unsatisfiable atom. No
# database ever contains the corresponding fact, so a dependency head
# consisting of it alone is a denial.
BOT = "false"


class SchemaError(ValueError):
    """Unknown predicate or arity mismatch."""


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class Const:
    name: str

    def __repr__(self) -> str:
        return self.name


Term = Union[Var, Const]
Substitution = Mapping[Var, Const]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(map(repr, self.args))})"

    @property
    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def variables(self) -> set[Var]:
        return {t for t in self.args if isinstance(t, Var)}

    def constants(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Const)}


# A fact is just a ground atom.
Fact = Atom


def fact(predicate: str, *names: str) -> Fact:
    """Shorthand used all over the tests: fact("P", "a", "b")."""
    return Atom(predicate, tuple(Const(n) for n in names))


def fact_key(f: Fact) -> tuple[str, tuple[str, ...]]:
    return (f.predicate, tuple(t.name for t in f.args))


def sort_facts(facts: Iterable[Fact]) -> list[Fact]:
    return sorted(facts, key=fact_key)


@dataclass(frozen=True)
class Ineq:
    """An inequality  left != right  between two terms."""

    left: Term
    right: Term

    def __repr__(self) -> str:
        return f"{self.left!r} != {self.right!r}"

    def variables(self) -> set[Var]:
        return {t for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass(frozen=True)
class Conjunction:
    """A conjunction of predicate atoms and inequalities."""

    atoms: tuple[Atom, ...] = ()
    ineqs: tuple[Ineq, ...] = ()

    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for a in self.atoms:
            out |= a.variables()
        for i in self.ineqs:
            out |= i.variables()
        return out

    def pvars(self) -> set[Var]:
        """Variables occurring in a predicate atom."""
        out: set[Var] = set()
        for a in self.atoms:
            out |= a.variables()
        return out

    def var_order(self) -> list[Var]:
        """Variables in order of first occurrence (atoms, then inequalities)."""
        seen: list[Var] = []
        for a in self.atoms:
            for t in a.args:
                if isinstance(t, Var) and t not in seen:
                    seen.append(t)
        for i in self.ineqs:
            for t in (i.left, i.right):
                if isinstance(t, Var) and t not in seen:
                    seen.append(t)
        return seen


@dataclass(frozen=True)
class CQ:
    """A conjunctive query with inequalities: exists_vars are bound."""

    exists_vars: tuple[Var, ...]
    body: Conjunction

    def free_vars(self) -> set[Var]:
        return self.body.variables() - set(self.exists_vars)

    @property
    def is_boolean(self) -> bool:
        return not self.free_vars()

    @property
    def is_safe(self) -> bool:
        return self.body.variables() == self.body.pvars()

    def check(self) -> None:
        extra = set(self.exists_vars) - self.body.pvars()
        if extra:
            names = ", ".join(sorted(v.name for v in extra))
            raise ValueError(f"existential variable(s) not in a predicate atom: {names}")


@dataclass(frozen=True)
class UCQ:
    disjuncts: tuple[CQ, ...]

    def __post_init__(self) -> None:
        if not self.disjuncts:
            raise ValueError("a union of conjunctive queries needs at least one disjunct")

    @property
    def is_boolean(self) -> bool:
        return all(q.is_boolean for q in self.disjuncts)

    @property
    def is_safe(self) -> bool:
        return all(q.is_safe for q in self.disjuncts)

    def free_vars(self) -> set[Var]:
        out: set[Var] = set()
        for q in self.disjuncts:
            out |= q.free_vars()
        return out

    def predicates(self) -> set[str]:
        return {a.predicate for q in self.disjuncts for a in q.body.atoms}


def bot_head() -> UCQ:
    """The denial head: a single disjunct whose only atom can never hold."""
    return UCQ((CQ((), Conjunction((Atom(BOT),), ())),))


@dataclass(frozen=True)
class Dependency:
    """forall x (body -> head), body a conjunction, head a union of CQs."""

    forall_vars: tuple[Var, ...]
    body: Conjunction
    head: UCQ

    def check(self) -> None:
        if not self.body.atoms:
            raise ValueError("dependency body needs at least one predicate atom")
        declared = set(self.forall_vars)
        pvars = self.body.pvars()
        if pvars != declared:
            missing = ", ".join(sorted(v.name for v in declared - pvars))
            extra = ", ".join(sorted(v.name for v in pvars - declared))
            raise ValueError(
                "universal variables must be exactly the body atom variables"
                + (f"; unused: {missing}" if missing else "")
                + (f"; undeclared: {extra}" if extra else "")
            )
        loose = self.body.variables() - pvars
        if loose:
            names = ", ".join(sorted(v.name for v in loose))
            raise ValueError(f"body inequality variable(s) not in a body atom: {names}")
        stray = self.head.free_vars() - declared
        if stray:
            names = ", ".join(sorted(v.name for v in stray))
            raise ValueError(f"head variable(s) not bound: {names}")
        for q in self.head.disjuncts:
            q.check()

    @property
    def is_linear(self) -> bool:
        return len(self.body.atoms) == 1

    @property
    def is_full(self) -> bool:
        return all(not q.exists_vars for q in self.head.disjuncts)

    def head_predicates(self) -> set[str]:
        return self.head.predicates()

    def body_predicates(self) -> set[str]:
        return {a.predicate for a in self.body.atoms}


@dataclass(frozen=True, eq=False)
class Schema:
    """Predicate signature; always contains the reserved nullary predicate."""

    predicates: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        preds = dict(self.predicates)
        preds.setdefault(BOT, 0)
        if preds[BOT] != 0:
            raise SchemaError(f"reserved predicate {BOT!r} must be nullary")
        for name, arity in preds.items():
            if arity < 0:
                raise SchemaError(f"negative arity for {name!r}")
        object.__setattr__(self, "predicates", preds)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Schema) and self.predicates == other.predicates

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.predicates.items())))

    def arity(self, predicate: str) -> int:
        try:
            return self.predicates[predicate]
        except KeyError:
            raise SchemaError(f"unknown predicate {predicate!r}") from None

    def check_atom(self, atom: Atom) -> None:
        if self.arity(atom.predicate) != len(atom.args):
            raise SchemaError(
                f"{atom.predicate!r} used with {len(atom.args)} argument(s), "
                f"declared arity is {self.arity(atom.predicate)}"
            )


@dataclass(frozen=True)
class Database:
    schema: Schema
    facts: frozenset[Fact] = frozenset()

    def __post_init__(self) -> None:
        for f in self.facts:
            if not f.is_ground:
                raise SchemaError(f"non-ground fact {f!r}")
            if f.predicate == BOT:
                raise SchemaError(f"no database may contain the fact {BOT!r}")
            self.schema.check_atom(f)

    def sorted_facts(self) -> list[Fact]:
        return sort_facts(self.facts)

    def constants(self) -> set[str]:
        out: set[str] = set()
        for f in self.facts:
            out |= f.constants()
        return out

    def restrict(self, facts: Iterable[Fact]) -> "Database":
        return Database(self.schema, frozenset(facts))


# ---------------------------------------------------------------------------
# Semantic operations
# ---------------------------------------------------------------------------


def apply_term(term: Term, sub: Substitution) -> Term:
    if isinstance(term, Var) and term in sub:
        return sub[term]
    return term


def apply_atom(atom: Atom, sub: Substitution) -> Atom:
    return Atom(atom.predicate, tuple(apply_term(t, sub) for t in atom.args))


def apply_conjunction(conj: Conjunction, sub: Substitution) -> Conjunction:
    return Conjunction(
        tuple(apply_atom(a, sub) for a in conj.atoms),
        tuple(Ineq(apply_term(i.left, sub), apply_term(i.right, sub)) for i in conj.ineqs),
    )


def _ineq_holds(ineq: Ineq, sub: Substitution) -> bool:
    left = apply_term(ineq.left, sub)
    right = apply_term(ineq.right, sub)
    # A fully instantiated inequality fails exactly when it degenerates
    # to t != t.
    return left != right


def instantiations(conj: Conjunction, facts: Iterable[Fact]) -> list[dict[Var, Const]]:
    """All substitutions mapping the atoms of ``conj`` into ``facts``.

    A substitution qualifies when every atom lands on a fact and no
    instantiated inequality degenerates to t != t.  The result is sorted
    lexicographically by the bound constants, in order of first variable
    occurrence.
    """
    facts = set(facts)
    by_pred: dict[str, list[Fact]] = {}
    for f in facts:
        by_pred.setdefault(f.predicate, []).append(f)
    for fs in by_pred.values():
        fs.sort(key=fact_key)

    results: list[dict[Var, Const]] = []

    def match_atom(atom: Atom, f: Fact, sub: dict[Var, Const]) -> Optional[dict[Var, Const]]:
        new = dict(sub)
        for t, c in zip(atom.args, f.args):
            if isinstance(t, Const):
                if t != c:
                    return None
            else:
                bound = new.get(t)
                if bound is None:
                    new[t] = c  # type: ignore[index]
                elif bound != c:
                    return None
        return new

    def search(i: int, sub: dict[Var, Const]) -> None:
        if i == len(conj.atoms):
            if all(_ineq_holds(q, sub) for q in conj.ineqs):
                results.append(sub)
            return
        atom = conj.atoms[i]
        for f in by_pred.get(atom.predicate, ()):
            if len(f.args) != len(atom.args):
                continue
            new = match_atom(atom, f, sub)
            if new is not None:
                search(i + 1, new)

    # Inequalities between variables that never occur in an atom would
    # make the substitution partial; callers enforce safety upstream.
    search(0, {})
    order = conj.var_order()
    results.sort(key=lambda s: tuple(s[v].name for v in order if v in s))
    return results


def image(conj: Conjunction, sub: Substitution) -> frozenset[Fact]:
    """The set of facts the atoms of ``conj`` map to under ``sub``."""
    out = []
    for a in conj.atoms:
        g = apply_atom(a, sub)
        if not g.is_ground:
            missing = ", ".join(sorted(v.name for v in g.variables()))
            raise ValueError(f"unbound variable(s) in image: {missing}")
        out.append(g)
    return frozenset(out)


def images_of_cq(q: CQ, facts: Iterable[Fact]) -> list[frozenset[Fact]]:
    facts = set(facts)
    seen: set[frozenset[Fact]] = set()
    out: list[frozenset[Fact]] = []
    for sub in instantiations(q.body, facts):
        img = image(q.body, sub)
        if img not in seen:
            seen.add(img)
            out.append(img)
    return out


def images_of_ucq(query: UCQ, db: Database) -> list[frozenset[Fact]]:
    """Deduplicated images of a Boolean safe UCQ; empty iff the query fails."""
    if not query.is_boolean:
        raise ValueError("query must be Boolean")
    if not query.is_safe:
        raise ValueError("query must be safe")
    seen: set[frozenset[Fact]] = set()
    out: list[frozenset[Fact]] = []
    for q in query.disjuncts:
        for img in images_of_cq(q, db.facts):
            if img not in seen:
                seen.add(img)
                out.append(img)
    return out


def holds(query: UCQ, facts: Iterable[Fact]) -> bool:
    """Does the Boolean query have an image in the given fact set?"""
    facts = set(facts)
    for q in query.disjuncts:
        if instantiations(q.body, facts):
            return True
    return False


def satisfies(db: Database, dep: Dependency) -> bool:
    """Every instantiation of the body has an image of the head."""
    return satisfied_in(db.facts, dep)


def satisfied_in(facts: Iterable[Fact], dep: Dependency) -> bool:
    facts = set(facts)
    for sub in instantiations(dep.body, facts):
        if not _head_has_image(dep, sub, facts):
            return False
    return True


def _head_has_image(dep: Dependency, sub: Substitution, facts: set[Fact]) -> bool:
    for q in dep.head.disjuncts:
        grounded = apply_conjunction(q.body, sub)
        if instantiations(grounded, facts):
            return True
    return False


def consistent(db: Database, deps: Sequence[Dependency]) -> bool:
    return all(satisfies(db, tau) for tau in deps)


def consistent_facts(facts: Iterable[Fact], deps: Sequence[Dependency]) -> bool:
    facts = set(facts)
    return all(satisfied_in(facts, tau) for tau in deps)


def all_constants(db: Database, deps: Sequence[Dependency], *extra: Iterable[str]) -> list[str]:
    """Sorted constant pool of a problem instance (used by generators/tests)."""
    pool = db.constants()
    for tau in deps:
        for a in tau.body.atoms:
            pool |= a.constants()
        for i in tau.body.ineqs:
            pool |= {t.name for t in (i.left, i.right) if isinstance(t, Const)}
        for q in tau.head.disjuncts:
            for a in q.body.atoms:
                pool |= a.constants()
            for i in q.body.ineqs:
                pool |= {t.name for t in (i.left, i.right) if isinstance(t, Const)}
    for chunk in extra:
        pool |= set(chunk)
    return sorted(pool)


def subsets_by_size(items: Sequence, max_size: Optional[int] = None):
    """Subsets in (size, lexicographic-position) order; items stay ordered."""
    n = len(items)
    top = n if max_size is None else min(max_size, n)
    for size in range(top + 1):
        for combo in itertools.combinations(range(n), size):
            yield tuple(items[i] for i in combo)
