"""Shared fixtures: worked examples and random instance generators.

The random generators build dependency sets per structural class
(linear / full / acyclic and intersections, plus forward-determinism
filtering against the generated database) together with random Boolean
queries.  Acyclicity is generated by construction: predicates get ranks
and every head predicate must outrank every body predicate of its
dependency, so dependency-graph edges strictly increase ranks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import pytest

from dedcqa.classify import is_fdet
from dedcqa.core import (
    Atom,
    CQ,
    Conjunction,
    Const,
    Database,
    Dependency,
    Fact,
    Ineq,
    Schema,
    UCQ,
    Var,
    bot_head,
    fact,
)
from dedcqa.syntax import parse_database, parse_dependencies, parse_query

CONSTANTS = ["a", "b", "c", "d", "e", "f"]


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Example:
    schema: Schema
    deps: tuple[Dependency, ...]
    db: Database
    queries: dict = field(default_factory=dict)


def _example(deps_text: str, db_text: str, **queries: str) -> Example:
    schema, deps = parse_dependencies(deps_text)
    db = parse_database(db_text, schema)
    qs = {name: parse_query(text, schema) for name, text in queries.items()}
    return Example(schema, tuple(deps), db, qs)


@pytest.fixture(scope="session")
def semantics_example() -> Example:
    """Key dependency plus an inclusion; two repairs, tiny intersection."""
    return _example(
        """
        forall x,y,z: P(x,y), P(x,z), y != z -> false .
        forall x: T(x) -> exists y: P(y,x) .
        """,
        "P(c,a). P(c,b). P(d,c). T(a). T(b).",
        pcx="exists x: P(c,x)",
    )


@pytest.fixture(scope="session")
def acyclic_fdet_example() -> Example:
    """Denial plus a two-atom body with an existential, inequality head."""
    return _example(
        """
        forall v: R(v,v) -> false .
        forall x,y,z: P(x,y), T(x,z) -> exists w: R(x,w), w != z .
        """,
        "P(a,b). T(a,c). R(a,d). P(e,f). T(e,g). R(e,e).",
        tez="exists zp: T(e,zp)",
        pab="P(a,b)",
    )


@pytest.fixture(scope="session")
def acyclic_linear_example() -> Example:
    """Two chained linear inclusions; a unique repair."""
    return _example(
        """
        forall x,y: P(x,y) -> exists z: T(y,z), y != z .
        forall x,y: T(x,y) -> exists v,w: R(x,v,w) .
        """,
        "P(a,b). T(b,c). T(a,d). T(a,e). R(a,d,b).",
        q1="exists x,y,z: T(x,y), T(x,z), y != z",
        q2="exists x,y,z: P(x,y), R(x,y,z)",
    )


@pytest.fixture(scope="session")
def repair_sentence_example() -> Example:
    return _example(
        "forall x: P(x,x), T(x) -> exists y: R(x,y) .",
        "P(a,a). T(a). R(a,b). R(a,c).",
    )


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------


@dataclass
class GenConfig:
    linear: bool = False
    full: bool = False
    acyclic: bool = False
    fdet: bool = False  # filtered against the generated database
    max_facts: int = 8
    max_deps: int = 3
    n_preds: int = 3
    n_consts: int = 5
    denial_prob: float = 0.3
    ineq_prob: float = 0.3
    disjunct_prob: float = 0.25


@dataclass(frozen=True)
class Instance:
    schema: Schema
    deps: tuple[Dependency, ...]
    db: Database

    @property
    def facts(self) -> frozenset[Fact]:
        return self.db.facts


def _random_atom(rng: random.Random, preds: list[tuple[str, int]], vars_pool: list[Var], consts: list[str]):
    name, arity = rng.choice(preds)
    args = []
    for _ in range(arity):
        roll = rng.random()
        if roll < 0.75 and vars_pool:
            args.append(rng.choice(vars_pool))
        else:
            args.append(Const(rng.choice(consts)))
    return Atom(name, tuple(args))


def _random_dependency(rng: random.Random, cfg: GenConfig, preds, ranks) -> Dependency:
    n_body = 1 if cfg.linear else rng.randint(1, 2)
    var_names = ["x", "y", "z", "w"]
    body_vars = [Var(n) for n in var_names[: rng.randint(1, 3)]]
    body_preds = preds
    if cfg.acyclic:
        # leave headroom: at least one predicate must outrank the body
        body_preds = [p for p in preds if ranks[p[0]] < max(ranks.values())]
        if not body_preds:
            body_preds = preds
    atoms = []
    for _ in range(n_body):
        atom = _random_atom(rng, body_preds, body_vars, CONSTANTS[: cfg.n_consts])
        atoms.append(atom)
    used = sorted({v for a in atoms for v in a.variables()}, key=lambda v: v.name)
    if not used:
        # ground bodies are legal but rarely interesting; force one variable
        first = atoms[0]
        if first.args:
            atoms[0] = Atom(first.predicate, (Var("x"),) + first.args[1:])
            used = [Var("x")]
    ineqs = []
    if used and rng.random() < cfg.ineq_prob:
        left = rng.choice(used)
        right = rng.choice(used + [Var("_const")])
        ineqs.append(Ineq(left, Const(rng.choice(CONSTANTS[: cfg.n_consts])) if right.name == "_const" else right))
    body = Conjunction(tuple(atoms), tuple(ineqs))

    if rng.random() < cfg.denial_prob:
        head = bot_head()
    else:
        max_body_rank = max((ranks[a.predicate] for a in atoms), default=-1)
        head_pool = preds
        if cfg.acyclic:
            head_pool = [p for p in preds if ranks[p[0]] > max_body_rank]
            if not head_pool:
                head = bot_head()
                dep = Dependency(tuple(used), body, head)
                dep.check()
                return dep
        n_disj = 2 if rng.random() < cfg.disjunct_prob else 1
        disjuncts = []
        for _ in range(n_disj):
            exists_vars: list[Var] = []
            pool: list[Var] = list(used)
            if not cfg.full and rng.random() < 0.7:
                ev = Var("v" + str(rng.randint(1, 2)))
                exists_vars = [ev]
                pool = pool + [ev]
            atom = _random_atom(rng, head_pool, pool, CONSTANTS[: cfg.n_consts])
            exists_vars = [v for v in exists_vars if v in atom.variables()]
            h_ineqs = []
            hv = sorted(atom.variables(), key=lambda v: v.name)
            if hv and rng.random() < cfg.ineq_prob:
                left = rng.choice(hv)
                right = rng.choice([rng.choice(hv), Const(rng.choice(CONSTANTS[: cfg.n_consts]))])
                h_ineqs.append(Ineq(left, right))
            disjuncts.append(CQ(tuple(exists_vars), Conjunction((atom,), tuple(h_ineqs))))
        head = UCQ(tuple(disjuncts))
    dep = Dependency(tuple(used), body, head)
    dep.check()
    return dep


def random_instance(rng: random.Random, cfg: GenConfig) -> Instance:
    arities = [1, 2, 2, 1]
    names = ["A", "B", "C", "D"]
    preds = [(names[i], arities[i]) for i in range(cfg.n_preds)]
    while True:
        ranks = {name: i for i, (name, _) in enumerate(preds)}
        if cfg.acyclic:
            order = list(range(len(preds)))
            rng.shuffle(order)
            ranks = {preds[i][0]: order[i] for i in range(len(preds))}
        deps = []
        for _ in range(rng.randint(1, cfg.max_deps)):
            deps.append(_random_dependency(rng, cfg, preds, ranks))
        schema = Schema({name: arity for name, arity in preds})
        # standing assumption of all the decision problems: the database
        # only uses predicates that occur in the dependency set
        used_names = set()
        for dep in deps:
            used_names |= dep.body_predicates() | dep.head_predicates()
        used = [(n, a) for n, a in preds if n in used_names]
        n_facts = rng.randint(1, cfg.max_facts)
        facts = set()
        for _ in range(n_facts):
            name, arity = rng.choice(used)
            facts.add(fact(name, *[rng.choice(CONSTANTS[: cfg.n_consts]) for _ in range(arity)]))
        db = Database(schema, frozenset(facts))
        inst = Instance(schema, tuple(deps), db)
        if cfg.fdet and not is_fdet(inst.deps, db):
            continue
        return inst


def random_query(rng: random.Random, inst: Instance, max_atoms: int = 3, max_disjuncts: int = 2) -> UCQ:
    preds = sorted(inst.schema.predicates.items())
    preds = [(n, a) for n, a in preds if n != "false"]
    consts = sorted(inst.db.constants()) or ["a"]
    disjuncts = []
    for _ in range(rng.randint(1, max_disjuncts)):
        n_atoms = rng.randint(1, max_atoms)
        vars_pool = [Var(f"q{i}") for i in range(1, 4)]
        atoms = []
        for _ in range(n_atoms):
            name, arity = rng.choice(preds)
            args = []
            for _ in range(arity):
                if rng.random() < 0.6:
                    args.append(rng.choice(vars_pool))
                else:
                    args.append(Const(rng.choice(consts)))
            atoms.append(Atom(name, tuple(args)))
        used = sorted({v for a in atoms for v in a.variables()}, key=lambda v: v.name)
        ineqs = []
        if len(used) >= 1 and rng.random() < 0.3:
            left = rng.choice(used)
            right = rng.choice(used + [Var("_c")])
            ineqs.append(
                Ineq(left, Const(rng.choice(consts)) if right.name == "_c" else right)
            )
        disjuncts.append(CQ(tuple(used), Conjunction(tuple(atoms), tuple(ineqs))))
    return UCQ(tuple(disjuncts))


def random_subsets(rng: random.Random, inst: Instance, count: int = 2) -> list[frozenset[Fact]]:
    facts = sorted(inst.db.facts, key=lambda f: (f.predicate, tuple(t.name for t in f.args)))
    out = [frozenset(), frozenset(facts)]
    for _ in range(count):
        out.append(frozenset(f for f in facts if rng.random() < 0.5))
    return out


CLASS_CONFIGS = {
    "general": GenConfig(),
    "linear": GenConfig(linear=True, max_facts=10, max_deps=4),
    "fdet": GenConfig(fdet=True, max_facts=10, max_deps=4),
    "acyclic": GenConfig(acyclic=True, max_facts=10, max_deps=4),
    "linear_fdet": GenConfig(linear=True, fdet=True, max_facts=10, max_deps=4),
    "acyclic_fdet": GenConfig(acyclic=True, fdet=True, max_facts=10, max_deps=4),
    "acyclic_linear": GenConfig(acyclic=True, linear=True, max_facts=10, max_deps=4),
}


def make_suite(name: str, count: int, seed: int = 0) -> list[Instance]:
    cfg = CLASS_CONFIGS[name]
    rng = random.Random(f"{name}-{seed}")
    return [random_instance(rng, cfg) for _ in range(count)]


@pytest.fixture(scope="session")
def small_suites() -> dict[str, list[Instance]]:
    """Smaller per-class suites for the module-level agreement tests."""
    return {name: make_suite(name, 60) for name in CLASS_CONFIGS}
