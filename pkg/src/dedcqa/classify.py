"""Syntactic and semantic subclasses of dependency sets.

Linear (single body atom), full (no existential head variables), acyclic
(the dependency graph has no directed cycle) and forward-determinism for
a concrete database: every body instantiation has at most one head image
there.  The acyclic case also fixes a topological order, with every
edge running from a smaller to a larger position; both recursive sentence
constructions (closure membership on a prefix, per-atom weak consistency
on a suffix) are well-founded exactly for this orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import foeval as fo
from .core import (
    Database,
    Dependency,
    Var,
    apply_conjunction,
    image,
    instantiations,
)


@dataclass(frozen=True)
class DependencyGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class Classification:
    linear: bool
    full: bool
    acyclic: bool
    topo_order: Optional[tuple[int, ...]]
    fdet: Optional[bool] = None

    def as_dict(self) -> dict:
        out = {
            "linear": self.linear,
            "full": self.full,
            "acyclic": self.acyclic,
            "topological_order": list(self.topo_order) if self.topo_order is not None else None,
        }
        out["fdet"] = self.fdet
        return out


def dependency_graph(deps: Sequence[Dependency]) -> DependencyGraph:
    """Edge i -> j when a head predicate of dep i occurs in the body of dep j."""
    edges = set()
    for i, a in enumerate(deps):
        heads = a.head_predicates()
        for j, b in enumerate(deps):
            if heads & b.body_predicates():
                edges.add((i, j))
    return DependencyGraph(tuple(range(len(deps))), frozenset(edges))


def topological_order(graph: DependencyGraph) -> Optional[tuple[int, ...]]:
    """Kahn's algorithm, smallest index first; None when cyclic.

    Self-loops count as cycles.
    """
    indeg = {v: 0 for v in graph.vertices}
    succs: dict[int, list[int]] = {v: [] for v in graph.vertices}
    for a, b in sorted(graph.edges):
        indeg[b] += 1
        succs[a].append(b)
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order: list[int] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    if len(order) != len(graph.vertices):
        return None
    return tuple(order)


def classify(deps: Sequence[Dependency], db: Optional[Database] = None) -> Classification:
    graph = dependency_graph(deps)
    topo = topological_order(graph)
    return Classification(
        linear=all(d.is_linear for d in deps),
        full=all(d.is_full for d in deps),
        acyclic=topo is not None,
        topo_order=topo,
        fdet=None if db is None else is_fdet(deps, db),
    )


def head_images(dep: Dependency, sub, facts) -> list[frozenset]:
    """Distinct images of the instantiated head, across all disjuncts."""
    seen: set[frozenset] = set()
    out: list[frozenset] = []
    for q in dep.head.disjuncts:
        grounded = apply_conjunction(q.body, sub)
        for hsub in instantiations(grounded, facts):
            img = image(grounded, hsub)
            if img not in seen:
                seen.add(img)
                out.append(img)
    return out


def is_fdet(deps: Sequence[Dependency], db: Database) -> bool:
    """At most one head image per body instantiation, for every dependency."""
    for dep in deps:
        for sub in instantiations(dep.body, db.facts):
            if len(head_images(dep, sub, db.facts)) > 1:
                return False
    return True


def check_fdet_sentence(deps: Sequence[Dependency]) -> fo.Formula:
    """A sentence true over D exactly when the set is forward-deterministic.

    For every body instantiation, any two head-disjunct instantiations
    must produce the same fact set.  Set equality of the two instantiated
    atom lists is spelled out atom by atom, which keeps the sentence
    faithful to image semantics: distinct witnesses that assemble the
    same facts do not count as two images, and two disjuncts producing
    different fact sets do.
    """
    conjuncts: list[fo.Formula] = []
    for dep in deps:
        body_f = _conjunction_formula(dep.body, aux=False)
        per_pair: list[fo.Formula] = []
        for q1 in dep.head.disjuncts:
            prime1 = {v: Var(v.name + "_c1") for v in q1.exists_vars}
            c1 = apply_conjunction(q1.body, prime1)  # type: ignore[arg-type]
            for q2 in dep.head.disjuncts:
                prime2 = {v: Var(v.name + "_c2") for v in q2.exists_vars}
                c2 = apply_conjunction(q2.body, prime2)  # type: ignore[arg-type]
                same = _same_image(c1, c2)
                inner = fo.forall(
                    tuple(prime2.values()),
                    fo.implies(_conjunction_formula(c2, aux=False), same),
                )
                per_pair.append(
                    fo.forall(
                        tuple(prime1.values()),
                        fo.implies(_conjunction_formula(c1, aux=False), inner),
                    )
                )
        conjuncts.append(
            fo.forall(dep.forall_vars, fo.implies(body_f, fo.conj(per_pair)))
        )
    return fo.conj(conjuncts)


def _conjunction_formula(conj, aux: bool) -> fo.Formula:
    parts: list[fo.Formula] = []
    for a in conj.atoms:
        parts.append(fo.aux_atom(a) if aux else fo.base_atom(a))
    for i in conj.ineqs:
        parts.append(fo.unequal(i.left, i.right))
    return fo.conj(parts)


def _same_image(c1, c2) -> fo.Formula:
    """The two instantiated atom lists denote the same fact set."""

    def covered(a, others) -> fo.Formula:
        options = []
        for b in others:
            if b.predicate == a.predicate and len(b.args) == len(a.args):
                options.append(fo.conj(fo.equal(s, t) for s, t in zip(a.args, b.args)))
        return fo.disj(options)

    parts = [covered(a, c2.atoms) for a in c1.atoms]
    parts += [covered(b, c1.atoms) for b in c2.atoms]
    return fo.conj(parts)
