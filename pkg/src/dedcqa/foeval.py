"""First-order sentences over base and auxiliary predicates, and their
evaluation over a finite database.

Quantifiers range over the active domain: the constants of the
evaluation context plus those of the sentence.  Every sentence this
package constructs is built from safe components, so enlarging the
domain with fresh constants never changes the verdict (there is a
property test for exactly that).

Two evaluators live here.  ``evaluate`` pushes conjoined atoms into the
quantifier loops (a backtracking join), which is what makes the larger
rewritings affordable; ``evaluate_naive`` is the textbook definition,
looping each quantifier over the whole domain.  The two are checked
against each other on random sentences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .core import BOT, Atom, Const, Fact, Term, Var


@dataclass(frozen=True)
class FAtom:
    predicate: str
    args: tuple[Term, ...] = ()
    aux: bool = False


@dataclass(frozen=True)
class FEq:
    left: Term
    right: Term


@dataclass(frozen=True)
class FNeq:
    left: Term
    right: Term


@dataclass(frozen=True)
class FNot:
    sub: "Formula"


@dataclass(frozen=True)
class FAnd:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class FOr:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class FImplies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class FExists:
    vars: tuple[Var, ...]
    sub: "Formula"


@dataclass(frozen=True)
class FForall:
    vars: tuple[Var, ...]
    sub: "Formula"


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


TRUE = FTrue()
FALSE = FFalse()

Formula = Union[FAtom, FEq, FNeq, FNot, FAnd, FOr, FImplies, FExists, FForall, FTrue, FFalse]


def conj(parts: Iterable[Formula]) -> Formula:
    """n-ary conjunction with unit/absorption simplification and dedup
    (up to renaming of bound variables)."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FTrue):
            continue
        if isinstance(p, FFalse):
            return FALSE
        if isinstance(p, FAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    out: list[Formula] = []
    seen = set()
    for p in flat:
        key = _alpha_key_cached(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return FAnd(tuple(out))


def disj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FFalse):
            continue
        if isinstance(p, FTrue):
            return TRUE
        if isinstance(p, FOr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    out: list[Formula] = []
    seen = set()
    for p in flat:
        key = _alpha_key_cached(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return FOr(tuple(out))


# Top-level alpha keys memoized by identity; the parallel list pins the
# keyed formulas so a recycled id can never alias a dead one.
_ALPHA_CACHE: dict[int, object] = {}
_ALPHA_KEEP: list["Formula"] = []


def _alpha_key_cached(phi: Formula):
    hit = _ALPHA_CACHE.get(id(phi))
    if hit is None:
        hit = alpha_key(phi)
        if len(_ALPHA_CACHE) > 400_000:
            _ALPHA_CACHE.clear()
            _ALPHA_KEEP.clear()
        _ALPHA_CACHE[id(phi)] = hit
        _ALPHA_KEEP.append(phi)
    return hit


def alpha_key(phi: Formula, env: Optional[dict[Var, int]] = None, depth: int = 0):
    """Structural key invariant under renaming of bound variables."""
    env = env or {}

    def term_key(t: Term):
        if isinstance(t, Var):
            seen = env.get(t)
            return ("b", seen) if seen is not None else ("f", t.name)
        return ("c", t.name)

    if isinstance(phi, FTrue):
        return ("true",)
    if isinstance(phi, FFalse):
        return ("false",)
    if isinstance(phi, FAtom):
        return ("atom", phi.predicate, phi.aux, tuple(term_key(t) for t in phi.args))
    if isinstance(phi, FEq):
        return ("eq", term_key(phi.left), term_key(phi.right))
    if isinstance(phi, FNeq):
        return ("neq", term_key(phi.left), term_key(phi.right))
    if isinstance(phi, FNot):
        return ("not", alpha_key(phi.sub, env, depth))
    if isinstance(phi, FAnd):
        return ("and", tuple(alpha_key(p, env, depth) for p in phi.parts))
    if isinstance(phi, FOr):
        return ("or", tuple(alpha_key(p, env, depth) for p in phi.parts))
    if isinstance(phi, FImplies):
        return ("implies", alpha_key(phi.left, env, depth), alpha_key(phi.right, env, depth))
    if isinstance(phi, (FExists, FForall)):
        tag = "exists" if isinstance(phi, FExists) else "forall"
        inner = dict(env)
        for i, v in enumerate(phi.vars):
            inner[v] = depth + i
        return (tag, len(phi.vars), alpha_key(phi.sub, inner, depth + len(phi.vars)))
    raise TypeError(f"not a formula: {phi!r}")


def rename_bound_apart(phi: Formula, prefix: str = "b") -> Formula:
    """Fresh names for every bound variable; free variables untouched.

    Run before splicing foreign subformulas (with their own variable
    names) into a sentence, so no quantifier can capture them.
    """
    counter = itertools.count(1)

    def walk(phi: Formula, env: dict[Var, Var]) -> Formula:
        def on_term(t: Term) -> Term:
            return env.get(t, t) if isinstance(t, Var) else t

        if isinstance(phi, (FTrue, FFalse)):
            return phi
        if isinstance(phi, FAtom):
            return FAtom(phi.predicate, tuple(on_term(t) for t in phi.args), phi.aux)
        if isinstance(phi, FEq):
            return FEq(on_term(phi.left), on_term(phi.right))
        if isinstance(phi, FNeq):
            return FNeq(on_term(phi.left), on_term(phi.right))
        if isinstance(phi, FNot):
            return FNot(walk(phi.sub, env))
        if isinstance(phi, FAnd):
            return FAnd(tuple(walk(p, env) for p in phi.parts))
        if isinstance(phi, FOr):
            return FOr(tuple(walk(p, env) for p in phi.parts))
        if isinstance(phi, FImplies):
            return FImplies(walk(phi.left, env), walk(phi.right, env))
        if isinstance(phi, (FExists, FForall)):
            inner = dict(env)
            fresh = tuple(Var(f"{prefix}{next(counter)}") for _ in phi.vars)
            inner.update(dict(zip(phi.vars, fresh)))
            cls = FExists if isinstance(phi, FExists) else FForall
            return cls(fresh, walk(phi.sub, inner))
        raise TypeError(f"not a formula: {phi!r}")

    return walk(phi, {})


def implies(left: Formula, right: Formula) -> Formula:
    if isinstance(left, FFalse):
        return TRUE
    if isinstance(left, FTrue):
        return right
    if isinstance(right, FTrue):
        return TRUE
    # left -> false is kept as an implication: denials keep their shape.
    return FImplies(left, right)


def neg(sub: Formula) -> Formula:
    if isinstance(sub, FTrue):
        return FALSE
    if isinstance(sub, FFalse):
        return TRUE
    if isinstance(sub, FNot):
        return sub.sub
    return FNot(sub)


def _occurring(phi: Formula, wanted: frozenset[Var], hits: set[Var]) -> None:
    """Which of the wanted variables occur in the formula.

    Every constructor in this package quantifies fresh names, so plain
    occurrence coincides with free occurrence; the traversal stops as
    soon as everything wanted has been seen.
    """
    if len(hits) == len(wanted):
        return
    if isinstance(phi, FAtom):
        for t in phi.args:
            if isinstance(t, Var) and t in wanted:
                hits.add(t)
    elif isinstance(phi, (FEq, FNeq)):
        for t in (phi.left, phi.right):
            if isinstance(t, Var) and t in wanted:
                hits.add(t)
    elif isinstance(phi, FNot):
        _occurring(phi.sub, wanted, hits)
    elif isinstance(phi, (FAnd, FOr)):
        for p in phi.parts:
            _occurring(p, wanted, hits)
            if len(hits) == len(wanted):
                return
    elif isinstance(phi, FImplies):
        _occurring(phi.left, wanted, hits)
        _occurring(phi.right, wanted, hits)
    elif isinstance(phi, (FExists, FForall)):
        _occurring(phi.sub, wanted, hits)


def _used_vars(vars: Iterable[Var], sub: Formula) -> tuple[Var, ...]:
    wanted = tuple(vars)
    hits: set[Var] = set()
    _occurring(sub, frozenset(wanted), hits)
    return tuple(v for v in wanted if v in hits)


def exists(vars: Iterable[Var], sub: Formula) -> Formula:
    vs = _used_vars(vars, sub)
    if isinstance(sub, (FTrue, FFalse)) or not vs:
        return sub
    if isinstance(sub, FExists):
        return FExists(vs + sub.vars, sub.sub)
    return FExists(vs, sub)


def forall(vars: Iterable[Var], sub: Formula) -> Formula:
    vs = _used_vars(vars, sub)
    if isinstance(sub, (FTrue, FFalse)) or not vs:
        return sub
    if isinstance(sub, FForall):
        return FForall(vs + sub.vars, sub.sub)
    return FForall(vs, sub)


def equal(left: Term, right: Term) -> Formula:
    if left == right:
        return TRUE
    if isinstance(left, Const) and isinstance(right, Const):
        return FALSE
    return FEq(left, right)


def unequal(left: Term, right: Term) -> Formula:
    if left == right:
        return FALSE
    if isinstance(left, Const) and isinstance(right, Const):
        return TRUE
    return FNeq(left, right)


def base_atom(atom: Atom) -> Formula:
    if atom.predicate == BOT:
        return FALSE
    return FAtom(atom.predicate, atom.args, aux=False)


def free_vars(phi: Formula) -> frozenset[Var]:
    if isinstance(phi, (FTrue, FFalse)):
        return frozenset()
    if isinstance(phi, FAtom):
        return frozenset(t for t in phi.args if isinstance(t, Var))
    if isinstance(phi, (FEq, FNeq)):
        return frozenset(t for t in (phi.left, phi.right) if isinstance(t, Var))
    if isinstance(phi, FNot):
        return free_vars(phi.sub)
    if isinstance(phi, (FAnd, FOr)):
        out: frozenset[Var] = frozenset()
        for p in phi.parts:
            out |= free_vars(p)
        return out
    if isinstance(phi, FImplies):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (FExists, FForall)):
        return free_vars(phi.sub) - frozenset(phi.vars)
    raise TypeError(f"not a formula: {phi!r}")


def constants(phi: Formula) -> set[str]:
    if isinstance(phi, (FTrue, FFalse)):
        return set()
    if isinstance(phi, FAtom):
        return {t.name for t in phi.args if isinstance(t, Const)}
    if isinstance(phi, (FEq, FNeq)):
        return {t.name for t in (phi.left, phi.right) if isinstance(t, Const)}
    if isinstance(phi, FNot):
        return constants(phi.sub)
    if isinstance(phi, (FAnd, FOr)):
        out: set[str] = set()
        for p in phi.parts:
            out |= constants(p)
        return out
    if isinstance(phi, FImplies):
        return constants(phi.left) | constants(phi.right)
    if isinstance(phi, (FExists, FForall)):
        return constants(phi.sub)
    raise TypeError(f"not a formula: {phi!r}")


def substitute(phi: Formula, sub: dict[Var, Term]) -> Formula:
    """Capture-naive substitution; callers only substitute fresh variables."""

    def on_term(t: Term) -> Term:
        return sub.get(t, t) if isinstance(t, Var) else t

    if isinstance(phi, (FTrue, FFalse)):
        return phi
    if isinstance(phi, FAtom):
        return FAtom(phi.predicate, tuple(on_term(t) for t in phi.args), phi.aux)
    if isinstance(phi, FEq):
        return equal(on_term(phi.left), on_term(phi.right))
    if isinstance(phi, FNeq):
        return unequal(on_term(phi.left), on_term(phi.right))
    if isinstance(phi, FNot):
        return neg(substitute(phi.sub, sub))
    if isinstance(phi, FAnd):
        return conj(substitute(p, sub) for p in phi.parts)
    if isinstance(phi, FOr):
        return disj(substitute(p, sub) for p in phi.parts)
    if isinstance(phi, FImplies):
        return implies(substitute(phi.left, sub), substitute(phi.right, sub))
    if isinstance(phi, (FExists, FForall)):
        inner = {v: t for v, t in sub.items() if v not in phi.vars}
        ctor = exists if isinstance(phi, FExists) else forall
        return ctor(phi.vars, substitute(phi.sub, inner))
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# aux marking
# ---------------------------------------------------------------------------


class AlreadyAuxiliary(ValueError):
    pass


def aux_atom(atom: Atom) -> FAtom:
    return FAtom(atom.predicate, atom.args, aux=True)


def aux_formula(phi: Formula) -> Formula:
    """Replace every base predicate atom by its auxiliary twin."""
    if isinstance(phi, FAtom):
        if phi.aux:
            raise AlreadyAuxiliary(f"atom already auxiliary: {phi!r}")
        return FAtom(phi.predicate, phi.args, aux=True)
    if isinstance(phi, (FTrue, FFalse, FEq, FNeq)):
        return phi
    if isinstance(phi, FNot):
        return FNot(aux_formula(phi.sub))
    if isinstance(phi, FAnd):
        return FAnd(tuple(aux_formula(p) for p in phi.parts))
    if isinstance(phi, FOr):
        return FOr(tuple(aux_formula(p) for p in phi.parts))
    if isinstance(phi, FImplies):
        return FImplies(aux_formula(phi.left), aux_formula(phi.right))
    if isinstance(phi, FExists):
        return FExists(phi.vars, aux_formula(phi.sub))
    if isinstance(phi, FForall):
        return FForall(phi.vars, aux_formula(phi.sub))
    raise TypeError(f"not a formula: {phi!r}")


def aux_facts(facts: Iterable[Fact]) -> frozenset[Fact]:
    """Identity on the facts themselves; the context keeps them apart.

    Exposed for symmetry: the auxiliary copy of a fact set is the same
    set, stored in the aux slot of the evaluation context.
    """
    return frozenset(facts)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    facts: frozenset[Fact]
    aux: frozenset[Fact] = frozenset()

    def domain(self, phi: Formula) -> tuple[Const, ...]:
        names: set[str] = set(constants(phi))
        for f in self.facts | self.aux:
            names |= f.constants()
        return tuple(Const(n) for n in sorted(names))


def context(facts: Iterable[Fact], aux: Iterable[Fact] = ()) -> EvalContext:
    return EvalContext(frozenset(facts), frozenset(aux))


def _fact_tables(ctx: EvalContext) -> tuple[dict, dict]:
    base: dict[str, list[tuple[str, ...]]] = {}
    auxt: dict[str, list[tuple[str, ...]]] = {}
    for f in ctx.facts:
        base.setdefault(f.predicate, []).append(tuple(t.name for t in f.args))
    for f in ctx.aux:
        auxt.setdefault(f.predicate, []).append(tuple(t.name for t in f.args))
    for d in (base, auxt):
        for rows in d.values():
            rows.sort()
    return base, auxt


class _Evaluator:
    def __init__(self, ctx: EvalContext, phi: Formula, memo: bool = False):
        self.base, self.auxt = _fact_tables(ctx)
        self.domain = tuple(c.name for c in ctx.domain(phi))
        self.memo: Optional[dict] = {} if memo else None
        # Both caches key by id(); the keep list pins the keyed objects so
        # a recycled id can never alias a dead formula.
        self.fv: dict[int, tuple[Var, ...]] = {}
        self.keep: list[Formula] = []
        self.witnesses: dict[int, Formula] = {}

    def table(self, atom: FAtom) -> list[tuple[str, ...]]:
        src = self.auxt if atom.aux else self.base
        return src.get(atom.predicate, [])

    def resolve(self, t: Term, env: dict[Var, str]) -> Optional[str]:
        if isinstance(t, Const):
            return t.name
        return env.get(t)

    def eval(self, phi: Formula, env: dict[Var, str]) -> bool:
        if self.memo is not None and isinstance(phi, (FAnd, FOr, FImplies, FExists, FForall)):
            fv = self.fv.get(id(phi))
            if fv is None:
                fv = tuple(sorted(free_vars(phi), key=lambda v: v.name))
                self.fv[id(phi)] = fv
                self.keep.append(phi)
            key = (id(phi), tuple(env[v] for v in fv))
            hit = self.memo.get(key)
            if hit is None:
                hit = self._eval(phi, env)
                self.memo[key] = hit
            return hit
        return self._eval(phi, env)

    def _eval(self, phi: Formula, env: dict[Var, str]) -> bool:
        if isinstance(phi, FTrue):
            return True
        if isinstance(phi, FFalse):
            return False
        if isinstance(phi, FAtom):
            row = tuple(self.resolve(t, env) for t in phi.args)
            if any(v is None for v in row):
                raise ValueError(f"unbound variable in {phi!r}")
            return row in self.table(phi)
        if isinstance(phi, FEq):
            return self.resolve(phi.left, env) == self.resolve(phi.right, env)
        if isinstance(phi, FNeq):
            return self.resolve(phi.left, env) != self.resolve(phi.right, env)
        if isinstance(phi, FNot):
            return not self.eval(phi.sub, env)
        if isinstance(phi, FAnd):
            return all(self.eval(p, env) for p in phi.parts)
        if isinstance(phi, FOr):
            return any(self.eval(p, env) for p in phi.parts)
        if isinstance(phi, FImplies):
            return (not self.eval(phi.left, env)) or self.eval(phi.right, env)
        if isinstance(phi, FExists):
            return self.eval_exists(phi.vars, phi.sub, env)
        if isinstance(phi, FForall):
            # forall x phi == not exists x (not phi); when the body is an
            # implication the antecedent guards the search for a violation.
            witness = self.witnesses.get(id(phi))
            if witness is None:
                body = phi.sub
                if isinstance(body, FImplies):
                    witness = conj([body.left, neg(body.right)])
                else:
                    witness = neg(body)
                self.witnesses[id(phi)] = witness
                self.keep.append(phi)
                self.keep.append(witness)
            return not self.eval_exists(phi.vars, witness, env)
        raise TypeError(f"not a formula: {phi!r}")

    def eval_exists(self, vars: tuple[Var, ...], body: Formula, env: dict[Var, str]) -> bool:
        todo = [v for v in vars if v not in env]
        if isinstance(body, FOr):
            return any(self.eval_exists(tuple(todo), p, env) for p in body.parts)
        if isinstance(body, FExists):
            return self.eval_exists(tuple(todo) + body.vars, body.sub, env)
        parts: list[Formula]
        if isinstance(body, FAnd):
            parts = list(body.parts)
        else:
            parts = [body]
        guards: list[FAtom] = []
        eqs: list[FEq] = []
        ors: list[FOr] = []
        rest_parts: list[Formula] = []
        for p in parts:
            if isinstance(p, FAtom):
                guards.append(p)
            elif isinstance(p, FEq):
                eqs.append(p)
            elif isinstance(p, FOr):
                ors.append(p)
            else:
                rest_parts.append(p)
        todo_set = set(todo)
        new_env, eqs_left = self._propagate(eqs, todo_set, dict(env))
        if new_env is None:
            return False
        return self._join(guards, 0, todo_set, new_env, eqs_left, ors, rest_parts)

    def _propagate(
        self, eqs: list[FEq], todo: set[Var], env: dict[Var, str]
    ) -> tuple[Optional[dict[Var, str]], list[FEq]]:
        """Consume equalities that test or bind known values; returns the
        extended environment (None on refutation) and leftover equalities."""
        pending = list(eqs)
        while True:
            progressed = False
            still: list[FEq] = []
            for eq in pending:
                lv = self.resolve(eq.left, env)
                rv = self.resolve(eq.right, env)
                if lv is not None and rv is not None:
                    if lv != rv:
                        return None, []
                    progressed = True
                elif lv is not None and isinstance(eq.right, Var) and eq.right in todo:
                    env[eq.right] = lv
                    progressed = True
                elif rv is not None and isinstance(eq.left, Var) and eq.left in todo:
                    env[eq.left] = rv
                    progressed = True
                else:
                    still.append(eq)
            pending = still
            if not progressed:
                return env, list(pending)

    def _join(
        self,
        guards: list[FAtom],
        i: int,
        todo: set[Var],
        env: dict[Var, str],
        eqs_left: list[FEq],
        ors: list[FOr],
        rest_parts: list[Formula],
    ) -> bool:
        if i == len(guards):
            if eqs_left:
                got = self._propagate(eqs_left, todo, dict(env))
                if got[0] is None:
                    return False
                env, eqs_left = got
            if ors:
                # Branch on one disjunctive conjunct under the bindings
                # accumulated so far; options carry their own guards.
                first, others = ors[0], list(ors[1:])
                left = tuple(eqs_left) + tuple(others) + tuple(rest_parts)
                loose = tuple(sorted(todo - env.keys(), key=lambda v: v.name))
                for opt in first.parts:
                    body = FAnd((opt,) + left) if left else opt
                    if self.eval_exists(loose, body, env):
                        return True
                return False
            residual: Formula
            leftover = list(eqs_left) + rest_parts
            if not leftover:
                residual = TRUE
            elif len(leftover) == 1:
                residual = leftover[0]
            else:
                residual = FAnd(tuple(leftover))
            loose_vars = sorted(todo - env.keys(), key=lambda v: v.name)
            return self._product(loose_vars, residual, env)
        atom = guards[i]
        for row in self.table(atom):
            new = self._match(atom, row, env)
            if new is not None and self._join(guards, i + 1, todo, new, eqs_left, ors, rest_parts):
                return True
        return False

    def _match(self, atom: FAtom, row: tuple[str, ...], env: dict[Var, str]) -> Optional[dict[Var, str]]:
        if len(atom.args) != len(row):
            return None
        new = dict(env)
        for t, val in zip(atom.args, row):
            if isinstance(t, Const):
                if t.name != val:
                    return None
            else:
                bound = new.get(t)
                if bound is None:
                    new[t] = val
                elif bound != val:
                    return None
        return new

    def _product(self, loose: list[Var], residual: Formula, env: dict[Var, str]) -> bool:
        if not loose:
            return self.eval(residual, env)
        for combo in itertools.product(self.domain, repeat=len(loose)):
            new = dict(env)
            new.update(zip(loose, combo))
            if self.eval(residual, new):
                return True
        return False


_CLOSED_CACHE: dict[int, bool] = {}
_CLOSED_KEEP: list[Formula] = []


def _check_closed(phi: Formula) -> None:
    if _CLOSED_CACHE.get(id(phi)):
        return
    loose = free_vars(phi)
    if loose:
        names = ", ".join(sorted(v.name for v in loose))
        raise ValueError(f"sentence has free variable(s): {names}")
    if len(_CLOSED_CACHE) > 100_000:
        _CLOSED_CACHE.clear()
        _CLOSED_KEEP.clear()
    _CLOSED_CACHE[id(phi)] = True
    _CLOSED_KEEP.append(phi)


def evaluate(phi: Formula, ctx: EvalContext, memo: bool = False) -> bool:
    """Decide whether the sentence holds over the context.

    ``memo`` caches subformula verdicts keyed by the bindings of their
    free variables; worth it for the large entailment rewritings, off by
    default.
    """
    _check_closed(phi)
    return _Evaluator(ctx, phi, memo=memo).eval(phi, {})


def evaluate_naive(phi: Formula, ctx: EvalContext) -> bool:
    """Reference evaluator: plain recursion, full-domain quantifier loops."""
    loose = free_vars(phi)
    if loose:
        names = ", ".join(sorted(v.name for v in loose))
        raise ValueError(f"sentence has free variable(s): {names}")
    base, auxt = _fact_tables(ctx)
    domain = tuple(c.name for c in ctx.domain(phi))

    def resolve(t: Term, env: dict[Var, str]) -> str:
        return t.name if isinstance(t, Const) else env[t]

    def ev(phi: Formula, env: dict[Var, str]) -> bool:
        if isinstance(phi, FTrue):
            return True
        if isinstance(phi, FFalse):
            return False
        if isinstance(phi, FAtom):
            row = tuple(resolve(t, env) for t in phi.args)
            table = auxt if phi.aux else base
            return row in table.get(phi.predicate, [])
        if isinstance(phi, FEq):
            return resolve(phi.left, env) == resolve(phi.right, env)
        if isinstance(phi, FNeq):
            return resolve(phi.left, env) != resolve(phi.right, env)
        if isinstance(phi, FNot):
            return not ev(phi.sub, env)
        if isinstance(phi, FAnd):
            return all(ev(p, env) for p in phi.parts)
        if isinstance(phi, FOr):
            return any(ev(p, env) for p in phi.parts)
        if isinstance(phi, FImplies):
            return (not ev(phi.left, env)) or ev(phi.right, env)
        if isinstance(phi, (FExists, FForall)):
            combos = itertools.product(domain, repeat=len(phi.vars))
            results = (ev(phi.sub, {**env, **dict(zip(phi.vars, c))}) for c in combos)
            return any(results) if isinstance(phi, FExists) else all(results)
        raise TypeError(f"not a formula: {phi!r}")

    return ev(phi, {})


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------


def unify_atoms(a: Atom, b: Atom) -> Optional[dict[Var, Term]]:
    """Most general unifier of two atoms, constants rigid; None on clash.

    Callers rename the two sides apart, so no occurs-check is needed for
    the flat atom case, but bindings are kept idempotent.
    """
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return None
    sub: dict[Var, Term] = {}

    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t in sub:
            t = sub[t]
        return t

    for s, t in zip(a.args, b.args):
        s, t = walk(s), walk(t)
        if s == t:
            continue
        if isinstance(t, Var):
            sub[t] = s
        elif isinstance(s, Var):
            sub[s] = t
        else:
            return None
    # Normalize to an idempotent substitution.
    out: dict[Var, Term] = {}
    for v in sub:
        out[v] = walk(v)
    return out
