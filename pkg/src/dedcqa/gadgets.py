"""Test-instance generators with independently computed ground truth.

Two reductions become stress families:

  * directed-graph reachability encoded as a linear, forward-
    deterministic dependency set: the probe fact is weakly consistent
    exactly when the target is unreachable (and, in the variant with a
    start marker, the empty set is a repair exactly when it is
    reachable);
  * Horn satisfiability with at-most-3-literal clauses encoded as a
    full dependency set: the clause facts are weakly consistent exactly
    when the formula is satisfiable.

The ground truths (breadth-first search, unit propagation) are computed
here, independently of the decision engine, so the pairs double as
oracles for the engine's verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (
    Atom,
    CQ,
    Conjunction,
    Const,
    Database,
    Dependency,
    Fact,
    Schema,
    UCQ,
    Var,
    bot_head,
    fact,
)

ZERO = "0"


@dataclass(frozen=True)
class Digraph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    source: str
    target: str

    def __post_init__(self) -> None:
        missing = {self.source, self.target} - set(self.vertices)
        if missing:
            raise ValueError(f"source/target not among the vertices: {sorted(missing)}")
        if ZERO in self.vertices:
            raise ValueError(f"vertex name {ZERO!r} is reserved")
        for a, b in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a}, {b}) uses an unknown vertex")

    def successors(self, v: str) -> list[str]:
        return [b for a, b in self.edges if a == v]


def bfs_reachable(g: Digraph) -> bool:
    """Is the target reachable from the source (trivially when equal)?"""
    seen = {g.source}
    frontier = [g.source]
    while frontier:
        v = frontier.pop()
        if v == g.target:
            return True
        for w in g.successors(v):
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return g.source == g.target


def _v(*names: str) -> tuple[Var, ...]:
    return tuple(Var(n) for n in names)


def _cq(atoms: Sequence[Atom], exists: Sequence[Var] = ()) -> CQ:
    return CQ(tuple(exists), Conjunction(tuple(atoms), ()))


def _dep(forall: Sequence[Var], body: Sequence[Atom], head: UCQ) -> Dependency:
    dep = Dependency(tuple(forall), Conjunction(tuple(body), ()), head)
    dep.check()
    return dep


def _reach_dependencies() -> list[Dependency]:
    x, y, z, w = _v("x", "y", "z", "w")
    succ_xyz = Atom("Succ", (x, y, z))
    return [
        _dep((x, y, z), [succ_xyz], UCQ((_cq([Atom("Vert", (y,))]),))),
        _dep((x, y, z), [succ_xyz], UCQ((_cq([Atom("Succ", (x, z, w))], [w]),))),
        _dep((x,), [Atom("Vert", (x,))], UCQ((_cq([Atom("Succ", (x, Const(ZERO), y))], [y]),))),
    ]


def _adjacency_facts(g: Digraph) -> set[Fact]:
    # The list-head cells Succ(a,0,b1) make the first dependency demand
    # Vert(0), so the marker vertex gets a self-supporting pair of facts;
    # without them every adjacency ring deletes itself unconditionally.
    facts: set[Fact] = {fact("Vert", ZERO), fact("Succ", ZERO, ZERO, ZERO)}
    for a in g.vertices:
        if a != g.target:
            facts.add(fact("Vert", a))
    for a in g.vertices:
        succs = g.successors(a)
        if not succs:
            facts.add(fact("Succ", a, ZERO, ZERO))
            continue
        chain = [ZERO] + succs + [ZERO]
        for prev, cur in zip(chain, chain[1:]):
            facts.add(fact("Succ", a, prev, cur))
    return facts


def reachability_weak_consistency(g: Digraph) -> tuple[list[Dependency], Database, frozenset[Fact]]:
    """Linear FDET instance whose probe fact is weakly consistent iff the
    target is NOT reachable from the source."""
    deps = _reach_dependencies()
    schema = Schema({"Vert": 1, "Succ": 3})
    db = Database(schema, frozenset(_adjacency_facts(g)))
    probe = frozenset({fact("Vert", g.source)})
    return deps, db, probe


def reachability_repair_check(g: Digraph) -> tuple[list[Dependency], Database, frozenset[Fact]]:
    """Variant with a start marker: the empty set is a repair iff the
    target IS reachable from the source."""
    x, y, z, w = _v("x", "y", "z", "w")
    succ_xyz = Atom("Succ", (x, y, z))
    deps = _reach_dependencies() + [
        _dep((x,), [Atom("Start", (x,))], UCQ((_cq([Atom("Vert", (x,))]),))),
        _dep((x,), [Atom("Vert", (x,))], UCQ((_cq([Atom("Start", (y,))], [y]),))),
        _dep((x, y, z), [succ_xyz], UCQ((_cq([Atom("Start", (w,))], [w]),))),
    ]
    schema = Schema({"Vert": 1, "Succ": 3, "Start": 1})
    facts = _adjacency_facts(g) | {fact("Start", g.source)}
    db = Database(schema, frozenset(facts))
    return deps, db, frozenset()


# ---------------------------------------------------------------------------
# Horn satisfiability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HornClause:
    negatives: tuple[str, ...]
    positive: Optional[str] = None

    def __post_init__(self) -> None:
        size = len(self.negatives) + (1 if self.positive else 0)
        if size == 0:
            raise ValueError("empty clause")
        if size > 3:
            raise ValueError("clause has more than 3 literals")
        if len(set(self.negatives)) != len(self.negatives):
            raise ValueError("repeated negative literal")


@dataclass(frozen=True)
class HornFormula:
    clauses: tuple[HornClause, ...]
    variables: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        seen: list[str] = list(self.variables)
        for c in self.clauses:
            for v in c.negatives + ((c.positive,) if c.positive else ()):
                if v == ZERO:
                    raise ValueError(f"variable name {ZERO!r} is reserved")
                if v not in seen:
                    seen.append(v)
        object.__setattr__(self, "variables", tuple(seen))


def horn_satisfiable(phi: HornFormula) -> bool:
    """Unit propagation over definite clauses, then goal-clause checks."""
    true_vars: set[str] = set()
    changed = True
    while changed:
        changed = False
        for c in phi.clauses:
            if c.positive and c.positive not in true_vars:
                if all(v in true_vars for v in c.negatives):
                    true_vars.add(c.positive)
                    changed = True
    for c in phi.clauses:
        if c.positive is None and all(v in true_vars for v in c.negatives):
            return False
    return True


def horn_weak_consistency(phi: HornFormula) -> tuple[list[Dependency], Database, frozenset[Fact]]:
    """Full dependency set whose clause-fact probe is weakly consistent
    iff the formula is satisfiable."""
    x, y, z = _v("x", "y", "z")
    zero = Const(ZERO)
    a = lambda t: Atom("A", (t,))
    deps = [
        _dep((x,), [Atom("C", (zero, zero, x))], UCQ((_cq([a(x)]),))),
        _dep((x, y), [Atom("C", (x, zero, y)), a(x)], UCQ((_cq([a(y)]),))),
        _dep((x, y, z), [Atom("C", (x, y, z)), a(x), a(y)], UCQ((_cq([a(z)]),))),
        _dep((x,), [Atom("Cf", (x, zero, zero)), a(x)], bot_head()),
        _dep((x, y), [Atom("Cf", (x, y, zero)), a(x), a(y)], bot_head()),
        _dep((x, y, z), [Atom("Cf", (x, y, z)), a(x), a(y), a(z)], bot_head()),
    ]
    clause_facts: set[Fact] = set()
    for c in phi.clauses:
        neg = list(c.negatives)
        if c.positive is not None:
            first = neg[0] if len(neg) >= 1 else ZERO
            second = neg[1] if len(neg) >= 2 else ZERO
            clause_facts.add(fact("C", first, second, c.positive))
        else:
            padded = neg + [ZERO] * (3 - len(neg))
            clause_facts.add(fact("Cf", *padded))
    var_facts = {fact("A", v) for v in phi.variables}
    schema = Schema({"C": 3, "Cf": 3, "A": 1})
    db = Database(schema, frozenset(clause_facts | var_facts))
    return deps, db, frozenset(clause_facts)
