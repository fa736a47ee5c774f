"""Query entailment: methods, semantics relationships, rewritings."""

import random

import pytest

from dedcqa import foeval as fo
from dedcqa.core import CQ, Conjunction, UCQ, fact, holds
from dedcqa.entail import (
    EntMethod,
    Semantics,
    admissible_ent_methods,
    atom_sets,
    entailment_sentence,
    entailment_sentence_linear,
    entailment_witness,
    entails,
    instance_check,
    rewrite_affordable,
    subset_size_bound,
)
from dedcqa.errors import FormulaTooLarge, MethodInapplicable
from dedcqa.repair import enumerate_repairs
from dedcqa.syntax import parse_database, parse_dependencies, parse_query, print_fo

from conftest import make_suite, random_query

ALLREP, INTREP = Semantics.ALLREP, Semantics.INTREP


class TestPaperExamples:
    def test_semantics_difference(self, semantics_example):
        ex = semantics_example
        q = ex.queries["pcx"]
        for m in admissible_ent_methods(ex.db, ex.deps, ALLREP):
            assert entails(ex.db, ex.deps, q, ALLREP, m) is True, m
        for m in admissible_ent_methods(ex.db, ex.deps, INTREP):
            assert entails(ex.db, ex.deps, q, INTREP, m) is False, m

    def test_acyclic_fdet_intersection(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        q = ex.queries["tez"]
        for m in admissible_ent_methods(ex.db, ex.deps, INTREP):
            assert entails(ex.db, ex.deps, q, INTREP, m) is False, m
        # the rewriting agrees even though its atom-set bound (8) is above
        # the implicit-selection threshold
        assert entails(ex.db, ex.deps, q, INTREP, EntMethod.REWRITE_INTREP) is False

    def test_acyclic_fdet_fact_query(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        for m in (EntMethod.BRUTE, EntMethod.SEARCH_INTREP, EntMethod.BOUNDED_INTREP):
            assert entails(ex.db, ex.deps, ex.queries["pab"], INTREP, m) is True, m

    def test_bounded_search_witness(self, acyclic_fdet_example):
        """The image separation for the intersection verdict: a one-fact
        subset whose closure is consistent until the image joins it."""
        from dedcqa.entail import _bounded_intrep, _separating_subset, _ClosureOracle
        from dedcqa.weakcons import grounded

        ex = acyclic_fdet_example
        gi = grounded(ex.db, ex.deps)
        oracle = _ClosureOracle(gi)
        image_mask = gi.mask_of({fact("T", "e", "g")})
        good = [i for i in range(gi.size) if oracle.closure(1 << i)[1]]
        mask = _separating_subset(oracle, image_mask, good, subset_size_bound(ex.deps))
        assert mask is not None
        assert set(gi.facts_of(mask)) == {fact("P", "e", "f")}

    def test_acyclic_linear_queries(self, acyclic_linear_example):
        ex = acyclic_linear_example
        for m in admissible_ent_methods(ex.db, ex.deps, INTREP):
            assert entails(ex.db, ex.deps, ex.queries["q1"], INTREP, m) is True, m
            assert entails(ex.db, ex.deps, ex.queries["q2"], INTREP, m) is False, m
        for m in admissible_ent_methods(ex.db, ex.deps, ALLREP):
            assert entails(ex.db, ex.deps, ex.queries["q1"], ALLREP, m) is True, m
            assert entails(ex.db, ex.deps, ex.queries["q2"], ALLREP, m) is False, m

    def test_instance_checks(self, semantics_example):
        ex = semantics_example
        assert instance_check(ex.db, ex.deps, fact("P", "d", "c")) is True
        assert instance_check(ex.db, ex.deps, fact("T", "a")) is False
        assert instance_check(ex.db, ex.deps, fact("P", "a", "a")) is False  # not in db

    def test_consistent_database_both_semantics(self, repair_sentence_example):
        ex = repair_sentence_example
        schema = ex.schema
        q = parse_query("exists x: T(x)", schema)
        direct = holds(q, ex.db.facts)
        for sem in (ALLREP, INTREP):
            assert entails(ex.db, ex.deps, q, sem) == direct

    def test_false_query_never_entailed(self, acyclic_linear_example):
        ex = acyclic_linear_example
        q = parse_query("false", ex.schema)
        for sem in (ALLREP, INTREP):
            for m in admissible_ent_methods(ex.db, ex.deps, sem):
                assert entails(ex.db, ex.deps, q, sem, m) is False, m


class TestLinearFdetImages:
    def test_image_blocked_by_failure_path(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a). A(b). B(b,c).", schema)
        q = parse_query("exists x: A(x)", schema)
        # image {A(a)} has no support; {A(b)} survives
        assert entails(db, deps, q, INTREP, EntMethod.IMAGES) is True
        q2 = parse_query("A(a)", schema)
        assert entails(db, deps, q2, INTREP, EntMethod.IMAGES) is False

    def test_no_image_means_false(self, acyclic_linear_example):
        ex = acyclic_linear_example
        q = parse_query("exists x,y: P(x,x), P(x,y)", ex.schema)
        assert entails(ex.db, ex.deps, q, INTREP, EntMethod.IMAGES) is False


class TestRewritings:
    def test_linear_sentence_text(self, acyclic_linear_example):
        ex = acyclic_linear_example
        got = print_fo(entailment_sentence_linear(ex.queries["q1"], ex.deps))
        assert got == (
            "exists x, y, z: (T(x, y) & T(x, z) & y != z & (exists v_2, w_2: (R(x, v_2, w_2))))"
        )

    def test_atom_sets_shape(self):
        _, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        sets = atom_sets(deps)
        # sizes 0..1 over predicates A and B
        assert [tuple(a.predicate for a in s) for s in sets] == [(), ("A",), ("B",)]
        for s in sets:
            vars_seen = [t for a in s for t in a.args]
            assert len(vars_seen) == len(set(vars_seen))

    def test_atom_set_guard(self):
        _, deps = parse_dependencies(
            """
            forall x,y: A(x,y), B(x,y) -> exists z: C(x,z) .
            forall x,y: C(x,y), B(y,x) -> exists z: A(x,z) | exists w: B(x,w) .
            """
        )
        with pytest.raises(FormulaTooLarge):
            atom_sets(deps, guard=10)

    def test_method_preconditions(self, semantics_example):
        ex = semantics_example
        with pytest.raises(MethodInapplicable):
            entails(ex.db, ex.deps, ex.queries["pcx"], ALLREP, EntMethod.SEARCH_INTREP)
        with pytest.raises(MethodInapplicable):
            entails(ex.db, ex.deps, ex.queries["pcx"], INTREP, EntMethod.SEARCH_ALLREP)


class TestWitnesses:
    def test_countermodel_repair(self, semantics_example):
        ex = semantics_example
        q = parse_query("T(a)", ex.schema)
        wit = entailment_witness(ex.db, ex.deps, q, ALLREP, EntMethod.BRUTE)
        assert wit is not None
        counter = frozenset(wit["countermodel_repair"])
        rs = enumerate_repairs(ex.db, ex.deps)
        assert counter in rs.as_sets()
        assert not holds(q, counter)

    def test_entailed_image(self, semantics_example):
        ex = semantics_example
        q = parse_query("P(d,c)", ex.schema)
        wit = entailment_witness(ex.db, ex.deps, q, INTREP, EntMethod.SEARCH_INTREP)
        assert wit == {"entailed_image": [fact("P", "d", "c")]}


class TestSemanticsRelationships:
    def test_intrep_implies_allrep(self, small_suites):
        rng = random.Random(83)
        for name in ("general", "acyclic", "fdet"):
            for inst in small_suites[name][:30]:
                q = random_query(rng, inst)
                if entails(inst.db, inst.deps, q, INTREP, EntMethod.BRUTE):
                    assert entails(inst.db, inst.deps, q, ALLREP, EntMethod.BRUTE)

    def test_linear_semantics_coincide(self, small_suites):
        rng = random.Random(89)
        for inst in small_suites["linear"][:40]:
            q = random_query(rng, inst)
            assert entails(inst.db, inst.deps, q, ALLREP, EntMethod.BRUTE) == entails(
                inst.db, inst.deps, q, INTREP, EntMethod.BRUTE
            )

    def test_instance_checking_coincides(self, small_suites):
        for name in ("general", "acyclic"):
            for inst in small_suites[name][:25]:
                for f in sorted(inst.db.facts, key=str)[:3]:
                    rs = enumerate_repairs(inst.db, inst.deps)
                    q = UCQ((CQ((), Conjunction((f,), ())),))
                    allrep = all(holds(q, r) for r in rs.repairs)
                    intrep = holds(q, rs.intersection)
                    assert allrep == intrep

    def test_monotone_in_disjuncts(self, small_suites):
        rng = random.Random(97)
        for inst in small_suites["general"][:30]:
            q = random_query(rng, inst, max_disjuncts=1)
            extra = random_query(rng, inst, max_disjuncts=1)
            bigger = UCQ(q.disjuncts + extra.disjuncts)
            for sem in (ALLREP, INTREP):
                if entails(inst.db, inst.deps, q, sem, EntMethod.BRUTE):
                    assert entails(inst.db, inst.deps, bigger, sem, EntMethod.BRUTE)


class TestMethodAgreement:
    def test_all_methods_match_brute(self, small_suites):
        rng = random.Random(101)
        for name, suite in small_suites.items():
            for inst in suite:
                q = random_query(rng, inst)
                for sem in (ALLREP, INTREP):
                    expect = entails(inst.db, inst.deps, q, sem, EntMethod.BRUTE)
                    for m in admissible_ent_methods(inst.db, inst.deps, sem):
                        got = entails(inst.db, inst.deps, q, sem, m)
                        assert got == expect, (name, inst, q, sem, m)

    def test_qent_parity_small_bound(self):
        """The intersection rewriting against the bounded search, on
        instances whose subset-size bound stays at most four."""
        rng = random.Random(103)
        suite = [i for i in make_suite("acyclic_fdet", 160, seed=9) if rewrite_affordable(i.deps)]
        checked = 0
        for inst in suite:
            q = random_query(rng, inst, max_atoms=2)
            expect = entails(inst.db, inst.deps, q, INTREP, EntMethod.BOUNDED_INTREP)
            got = entails(inst.db, inst.deps, q, INTREP, EntMethod.REWRITE_INTREP)
            assert got == expect, (inst, q)
            checked += 1
        assert checked >= 40
