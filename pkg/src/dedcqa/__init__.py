"""Consistent query answering for disjunctive embedded dependencies with
inequalities, under tuple-deletion repairs.

The package decides consistency, weak consistency, repair checking and
Boolean query entailment (all-repairs and intersection semantics), via
class-specific algorithms and first-order rewritings, all validated
against a brute-force repair oracle.
"""

from .classify import Classification, check_fdet_sentence, classify, is_fdet
from .core import (
    Atom,
    BOT,
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
    consistent,
    fact,
    image,
    images_of_ucq,
    instantiations,
    satisfies,
)
from .entail import (
    EntMethod,
    Semantics,
    entails,
    entailment_sentence,
    entailment_sentence_linear,
    instance_check,
)
from .errors import (
    FormulaTooLarge,
    InstanceTooLarge,
    MethodInapplicable,
    NotAcyclic,
    NotFDET,
    NotLinear,
)
from .foeval import EvalContext, aux_formula, evaluate, unify_atoms
from .repair import RCMethod, RepairSet, enumerate_repairs, repair_check, repair_check_sentence
from .syntax import (
    ParseError,
    parse_database,
    parse_dependencies,
    parse_fo,
    parse_query,
    print_fo,
)
from .weakcons import (
    ForwardClosure,
    WCMethod,
    forward_closure,
    unique_repair_linear,
    weak_consistency_sentence,
    weak_consistency_sentence_linear,
    weakly_consistent,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
