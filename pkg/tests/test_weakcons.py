"""Weak consistency: all methods, the closure, and the two rewritings."""

import random

import pytest

from dedcqa import foeval as fo
from dedcqa import syntax
from dedcqa.core import Database, consistent_facts, fact
from dedcqa.errors import InstanceTooLarge, NotFDET, NotLinear
from dedcqa.syntax import parse_database, parse_dependencies, print_fo
from dedcqa.weakcons import (
    WCMethod,
    admissible_wc_methods,
    forward_closure,
    unique_repair_linear,
    weak_consistency_sentence,
    weak_consistency_sentence_linear,
    weak_consistency_witness,
    weakly_consistent,
    weakly_consistent_brute,
    weakly_consistent_reach,
)

from conftest import make_suite, random_subsets

P, T, R = "P", "T", "R"


class TestForwardClosure:
    def test_adds_forced_image(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        fc = forward_closure({fact(P, "e", "f"), fact(T, "e", "g")}, ex.db, ex.deps)
        assert fc.closure == {fact(P, "e", "f"), fact(T, "e", "g"), fact(R, "e", "e")}
        assert len(fc.trace) == 1
        dep_index, _, added = fc.trace[0]
        assert dep_index == 1 and added == {fact(R, "e", "e")}

    def test_respects_head_inequality(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        fc = forward_closure({fact(P, "a", "b"), fact(T, "a", "c")}, ex.db, ex.deps)
        assert fc.closure == {fact(P, "a", "b"), fact(T, "a", "c"), fact(R, "a", "d")}

    def test_empty_seed(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        assert forward_closure(set(), ex.db, ex.deps).closure == frozenset()

    def test_not_fdet_raises(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a). B(a,b). B(a,c).", schema)
        with pytest.raises(NotFDET):
            forward_closure({fact("A", "a")}, db, deps)

    def test_monotone_and_idempotent(self, small_suites):
        rng = random.Random(41)
        for inst in small_suites["fdet"][:30]:
            facts = sorted(inst.db.facts, key=str)
            small = frozenset(f for f in facts if rng.random() < 0.3)
            big = small | frozenset(f for f in facts if rng.random() < 0.3)
            c_small = forward_closure(small, inst.db, inst.deps).closure
            c_big = forward_closure(big, inst.db, inst.deps).closure
            assert c_small <= c_big
            assert forward_closure(c_small, inst.db, inst.deps).closure == c_small


class TestPaperExamples:
    def test_acyclic_fdet_verdicts(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        good = {fact(P, "a", "b"), fact(T, "a", "c")}
        bad = {fact(P, "e", "f"), fact(T, "e", "g")}
        methods = admissible_wc_methods(ex.db, ex.deps)
        assert WCMethod.CLOSURE in methods and WCMethod.REWRITE_FDET in methods
        for m in methods:
            assert weakly_consistent(good, ex.db, ex.deps, m) is True, m
            assert weakly_consistent(bad, ex.db, ex.deps, m) is False, m

    def test_acyclic_linear_verdicts(self, acyclic_linear_example):
        ex = acyclic_linear_example
        good = {fact(T, "a", "e")}
        bad = {fact(P, "a", "b"), fact(T, "b", "c")}
        methods = admissible_wc_methods(ex.db, ex.deps)
        assert WCMethod.LINEAR_REPAIR in methods and WCMethod.REWRITE_LINEAR in methods
        for m in methods:
            assert weakly_consistent(good, ex.db, ex.deps, m) is True, m
            assert weakly_consistent(bad, ex.db, ex.deps, m) is False, m

    def test_unique_repair(self, acyclic_linear_example):
        ex = acyclic_linear_example
        assert unique_repair_linear(ex.db, ex.deps) == {
            fact(T, "a", "d"),
            fact(T, "a", "e"),
            fact(R, "a", "d", "b"),
        }

    def test_unique_repair_of_consistent_database(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a). B(a,b).", schema)
        assert unique_repair_linear(db, deps) == db.facts

    def test_unique_repair_cascades_to_empty(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a). A(b).", schema)
        assert unique_repair_linear(db, deps) == frozenset()
        # cross-checked against enumeration
        from dedcqa.repair import enumerate_repairs

        assert enumerate_repairs(db, deps).repairs == ((),)

    def test_empty_subset_always_weakly_consistent(self, semantics_example):
        ex = semantics_example
        assert weakly_consistent(frozenset(), ex.db, ex.deps)

    def test_single_denial_violator(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        assert not weakly_consistent({fact(R, "e", "e")}, ex.db, ex.deps)


class TestGoldenSentences:
    def test_acyclic_fdet_sentence_text(self, acyclic_fdet_example):
        """Structurally: one conjunct per dependency in topological order;
        body and head atoms expanded through closure membership (first
        disjunct: auxiliary membership; second: derivation through the
        two-atom rule); the denial keeps its `-> false` shape."""
        got = print_fo(weak_consistency_sentence(acyclic_fdet_example.deps))
        expected = (
            "(forall x, y, z: (P^aux(x, y) & T^aux(x, z) -> exists w: ((R^aux(x, w)"
            " | (exists y_5, z_5: (P(x, y_5) & T(x, z_5) & R(x, w) & w != z_5 &"
            " P^aux(x, y_5) & T^aux(x, z_5)))) & w != z))) & (forall v: ((R^aux(v, v)"
            " | (exists y_7, z_7: (P(v, y_7) & T(v, z_7) & R(v, v) & v != z_7 &"
            " P^aux(v, y_7) & T^aux(v, z_7)))) -> false))"
        )
        assert got == expected

    def test_acyclic_linear_sentence_text(self, acyclic_linear_example):
        """One conjunct per predicate: every auxiliary fact must chain
        through the suffix of the topological order; the sink predicate
        gets the trivially true consequent."""
        got = print_fo(weak_consistency_sentence_linear(acyclic_linear_example.deps))
        expected = (
            "(forall x1, x2: (P^aux(x1, x2) -> exists z_1: (T(x2, z_1) & x2 != z_1 &"
            " (exists v_2, w_2: (R(x2, v_2, w_2)))))) & (forall x1, x2: (T^aux(x1, x2)"
            " -> exists v_5, w_5: (R(x1, v_5, w_5)))) & (forall x1, x2, x3:"
            " (R^aux(x1, x2, x3) -> true))"
        )
        assert got == expected

    def test_empty_suffix_is_true(self):
        from dedcqa.core import Atom, Var
        from dedcqa.weakcons import atom_weak_consistency_formula

        assert atom_weak_consistency_formula(Atom("P", (Var("x"),)), (), 0) == fo.TRUE

    def test_rewrites_round_trip(self, acyclic_fdet_example, acyclic_linear_example):
        for sentence in (
            weak_consistency_sentence(acyclic_fdet_example.deps),
            weak_consistency_sentence_linear(acyclic_linear_example.deps),
        ):
            text = print_fo(sentence)
            assert print_fo(syntax.parse_fo(text)) == text


class TestBrute:
    def test_cap(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        with pytest.raises(InstanceTooLarge):
            weakly_consistent_brute(set(), ex.db, ex.deps, cap=3)
        assert weakly_consistent_brute(set(), ex.db, ex.deps, cap=6)

    def test_witness_is_smallest(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        sub = {fact(P, "a", "b"), fact(T, "a", "c")}
        wit = weak_consistency_witness(sub, ex.db, ex.deps)
        assert wit is not None and sub <= wit
        assert consistent_facts(wit, ex.deps)
        assert wit == {fact(P, "a", "b"), fact(T, "a", "c"), fact(R, "a", "d")}

    def test_full_subset(self, acyclic_linear_example):
        ex = acyclic_linear_example
        repair = unique_repair_linear(ex.db, ex.deps)
        assert weakly_consistent_brute(repair, ex.db, ex.deps)


class TestReach:
    def test_isolated_fact(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("B(c,d).", schema)
        assert weakly_consistent_reach(fact("B", "c", "d"), db, deps)

    def test_failure_vertex(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a).", schema)
        assert not weakly_consistent_reach(fact("A", "a"), db, deps)

    def test_requires_linear(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        with pytest.raises(NotLinear):
            weakly_consistent_reach(fact(P, "a", "b"), ex.db, ex.deps)


class TestProperties:
    def test_method_agreement(self, small_suites):
        rng = random.Random(47)
        for name, suite in small_suites.items():
            for inst in suite:
                methods = admissible_wc_methods(inst.db, inst.deps)
                for subset in random_subsets(rng, inst):
                    answers = {
                        m: weakly_consistent(subset, inst.db, inst.deps, m) for m in methods
                    }
                    assert len(set(answers.values())) == 1, (name, inst, subset, answers)

    def test_antitone_in_the_subset(self, small_suites):
        rng = random.Random(53)
        for inst in small_suites["general"][:40]:
            facts = sorted(inst.db.facts, key=str)
            big = frozenset(f for f in facts if rng.random() < 0.6)
            small = frozenset(f for f in big if rng.random() < 0.6)
            if weakly_consistent(big, inst.db, inst.deps):
                assert weakly_consistent(small, inst.db, inst.deps)

    def test_linear_per_fact_decomposition(self, small_suites):
        rng = random.Random(59)
        for inst in small_suites["linear"][:40]:
            subset = frozenset(f for f in inst.db.facts if rng.random() < 0.5)
            whole = weakly_consistent(subset, inst.db, inst.deps)
            per_fact = all(
                weakly_consistent({f}, inst.db, inst.deps) for f in subset
            )
            assert whole == per_fact

    def test_rewriting_parity_acyclic_fdet(self, small_suites):
        rng = random.Random(61)
        for inst in small_suites["acyclic_fdet"]:
            sentence = weak_consistency_sentence(inst.deps)
            for subset in random_subsets(rng, inst):
                via_fo = fo.evaluate(sentence, fo.context(inst.db.facts, subset))
                via_fc = weakly_consistent(subset, inst.db, inst.deps, WCMethod.CLOSURE)
                assert via_fo == via_fc, (inst, subset)

    def test_rewriting_parity_acyclic_linear(self, small_suites):
        rng = random.Random(67)
        for inst in small_suites["acyclic_linear"]:
            sentence = weak_consistency_sentence_linear(inst.deps)
            for subset in random_subsets(rng, inst):
                via_fo = fo.evaluate(sentence, fo.context(inst.db.facts, subset))
                via_rep = weakly_consistent(
                    subset, inst.db, inst.deps, WCMethod.LINEAR_REPAIR
                )
                assert via_fo == via_rep, (inst, subset)

    def test_reach_parity_linear_fdet(self, small_suites):
        for inst in small_suites["linear_fdet"]:
            for f in sorted(inst.db.facts, key=str):
                via_reach = weakly_consistent_reach(f, inst.db, inst.deps)
                via_fc = weakly_consistent({f}, inst.db, inst.deps, WCMethod.CLOSURE)
                assert via_reach == via_fc, (inst, f)
