"""Subclass detection and the forward-determinism sentence."""

import random

from dedcqa import foeval as fo
from dedcqa.classify import (
    check_fdet_sentence,
    classify,
    dependency_graph,
    is_fdet,
    topological_order,
)
from dedcqa.core import Database
from dedcqa.syntax import parse_database, parse_dependencies

from conftest import GenConfig, random_instance


class TestClassify:
    def test_acyclic_fdet_example(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        cls = classify(ex.deps, ex.db)
        assert cls.acyclic and not cls.linear and not cls.full
        assert cls.fdet is True
        # the two-atom rule derives what the denial consumes
        assert cls.topo_order == (1, 0)

    def test_acyclic_linear_example(self, acyclic_linear_example):
        ex = acyclic_linear_example
        cls = classify(ex.deps, ex.db)
        assert cls.acyclic and cls.linear

    def test_two_cycle(self):
        _, deps = parse_dependencies(
            """
            forall x: A(x) -> exists y: B(y) .
            forall x: B(x) -> exists y: A(y) .
            """
        )
        cls = classify(deps)
        assert not cls.acyclic and cls.topo_order is None

    def test_self_loop_is_cyclic(self):
        _, deps = parse_dependencies("forall x: A(x) -> exists y: A(y) .")
        assert not classify(deps).acyclic

    def test_topo_respects_edges(self):
        rng = random.Random(2)
        for _ in range(100):
            inst = random_instance(rng, GenConfig(acyclic=True, max_deps=4))
            graph = dependency_graph(inst.deps)
            order = topological_order(graph)
            assert order is not None
            assert sorted(order) == list(range(len(inst.deps)))
            pos = {v: i for i, v in enumerate(order)}
            for a, b in graph.edges:
                assert pos[a] < pos[b]

    def test_full_detection(self):
        _, deps = parse_dependencies("forall x,y: P(x,y) -> P(y,x) .")
        assert classify(deps).full


class TestIsFdet:
    def test_positive_example(self, acyclic_fdet_example):
        ex = acyclic_fdet_example
        assert is_fdet(ex.deps, ex.db)

    def test_two_witnesses_break_it(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        db = parse_database("A(a). B(a,b). B(a,c).", schema)
        assert not is_fdet(deps, db)

    def test_empty_database(self):
        schema, deps = parse_dependencies("forall x: A(x) -> exists y: B(x,y) .")
        assert is_fdet(deps, Database(schema))

    def test_two_disjuncts_with_images(self):
        schema, deps = parse_dependencies("forall x: A(x) -> B(x) | C(x) .")
        db = parse_database("A(a). B(a). C(a).", schema)
        assert not is_fdet(deps, db)
        db2 = parse_database("A(a). B(a).", schema)
        assert is_fdet(deps, db2)

    def test_same_image_through_two_witnesses(self):
        # two instantiations assembling the same fact set count once
        schema, deps = parse_dependencies(
            "forall x: A(x) -> exists y,z: E(y,z), E(z,y) ."
        )
        db = parse_database("A(a). E(u,v). E(v,u).", schema)
        assert is_fdet(deps, db)

    def test_nondisjunctive_full_always_fdet(self):
        rng = random.Random(19)
        count = 0
        while count < 60:
            inst = random_instance(rng, GenConfig(full=True, disjunct_prob=0.0))
            assert is_fdet(inst.deps, inst.db)
            count += 1


class TestCheckFdetSentence:
    def test_parity_on_examples(self, acyclic_fdet_example, acyclic_linear_example):
        for ex in (acyclic_fdet_example, acyclic_linear_example):
            sentence = check_fdet_sentence(ex.deps)
            assert fo.evaluate(sentence, fo.context(ex.db.facts)) == is_fdet(ex.deps, ex.db)

    def test_nondisjunctive_full_sentence_trivial(self):
        _, deps = parse_dependencies("forall x,y: P(x,y) -> P(y,x) .")
        assert check_fdet_sentence(deps) == fo.TRUE

    def test_parity_random(self):
        rng = random.Random(29)
        for _ in range(500):
            inst = random_instance(rng, GenConfig(max_facts=8, max_deps=3))
            sentence = check_fdet_sentence(inst.deps)
            got = fo.evaluate(sentence, fo.context(inst.db.facts))
            assert got == is_fdet(inst.deps, inst.db), (inst.deps, inst.db)
