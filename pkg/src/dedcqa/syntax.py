"""Textual formats: dependencies, databases, queries and first-order sentences.

Grammar sketch (the README carries the full EBNF):

    dependency  = "forall" varlist ":" conj "->" head "." ;
    head        = "false" | disjunct { "|" disjunct } ;
    disjunct    = [ "exists" varlist ":" ] conj ;
    conj        = literal { "," literal } ;
    literal     = atom | term "!=" term ;
    atom        = ident [ "(" term { "," term } ")" ] ;
    schema decl = ident "/" nat "." ;
    fact        = atom "." ;

Identifiers are ``[A-Za-z_][A-Za-z0-9_]*``; an identifier denotes a
variable exactly when the nearest enclosing ``forall``/``exists`` binds
it, otherwise it is a constant.  ``false`` is the unsatisfiable nullary
atom, ``#`` starts a line comment, and a file may optionally be split
into ``schema:`` / ``dependencies:`` / ``database:`` / ``query:``
sections.  First-order sentences (the output of the rewriting
operations) additionally use ``&``, ``|``, ``!``, ``->``, ``=``, ``!=``,
``true`` and the auxiliary-predicate marker ``^aux``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    BOT,
    Atom,
    CQ,
    Conjunction,
    Const,
    Database,
    Dependency,
    Fact,
    Ineq,
    Schema,
    Term,
    UCQ,
    Var,
    bot_head,
    sort_facts,
)
from . import foeval as fo

KEYWORDS = {"forall", "exists", "false", "true"}
SECTIONS = {"schema", "dependencies", "database", "query"}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    offset: int
    end_line: int
    end_column: int
    end_offset: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(ValueError):
    """Parse failure with a position and a coarse error category."""

    def __init__(self, message: str, span: SourceSpan, code: str = "lex"):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span
        self.code = code


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NAT PUNCT EOF
    text: str
    span: SourceSpan


PUNCT = ("->", "!=", "^aux", "(", ")", ",", ".", ":", "|", "/", "&", "!", "=")


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(start_i: int, start_line: int, start_col: int) -> SourceSpan:
        return SourceSpan(start_line, start_col, start_i, line, col, i)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start_i, start_line, start_col = i, line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            tokens.append(Token("IDENT", word, span(start_i, start_line, start_col)))
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            tokens.append(Token("NAT", word, span(start_i, start_line, start_col)))
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                i += len(p)
                col += len(p)
                tokens.append(Token("PUNCT", p, span(start_i, start_line, start_col)))
                break
        else:
            bad = SourceSpan(line, col, i, line, col + 1, i + 1)
            raise ParseError(f"unexpected character {c!r}", bad, "lex")
    eof = SourceSpan(line, col, i, line, col, i)
    tokens.append(Token("EOF", "", eof))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.text == text

    def eat_punct(self, text: str) -> Token:
        tok = self.peek()
        if not self.at_punct(text):
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.span)
        return self.next()

    def eat_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise ParseError(f"expected {what}, found {tok.text or 'end of input'!r}", tok.span)
        return self.next()

    def at_section(self) -> Optional[str]:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text in SECTIONS:
            nxt = self.peek(1)
            if nxt.kind == "PUNCT" and nxt.text == ":":
                return tok.text
        return None

    # -- shared pieces ------------------------------------------------------

    def varlist(self) -> list[Var]:
        out = [Var(self.eat_ident("variable").text)]
        while self.at_punct(","):
            self.next()
            out.append(Var(self.eat_ident("variable").text))
        return out

    def term(self, bound: dict[str, Var]) -> tuple[Term, Token]:
        tok = self.eat_ident("term")
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} cannot be a term", tok.span)
        if tok.text in bound:
            return bound[tok.text], tok
        return Const(tok.text), tok

    def atom_or_ineq(self, bound: dict[str, Var]) -> tuple[Optional[Atom], Optional[Ineq], Token]:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "false":
            self.next()
            return Atom(BOT), None, tok
        left, ltok = self.term(bound)
        if self.at_punct("("):
            if isinstance(left, Var):
                raise ParseError(f"variable {ltok.text!r} used as a predicate", ltok.span)
            self.next()
            args: list[Term] = []
            if not self.at_punct(")"):
                args.append(self.term(bound)[0])
                while self.at_punct(","):
                    self.next()
                    args.append(self.term(bound)[0])
            self.eat_punct(")")
            return Atom(left.name, tuple(args)), None, ltok
        if self.at_punct("!="):
            self.next()
            right, _ = self.term(bound)
            return None, Ineq(left, right), ltok
        if isinstance(left, Var):
            raise ParseError(f"variable {ltok.text!r} used as a predicate", ltok.span)
        return Atom(left.name), None, ltok  # nullary atom

    def conjunction(self, bound: dict[str, Var], stop: Sequence[str]) -> tuple[Conjunction, list[Token]]:
        atoms: list[Atom] = []
        ineqs: list[Ineq] = []
        toks: list[Token] = []
        while True:
            atom, ineq, tok = self.atom_or_ineq(bound)
            toks.append(tok)
            if atom is not None:
                atoms.append(atom)
            else:
                ineqs.append(ineq)  # type: ignore[arg-type]
            if self.at_punct(","):
                self.next()
                continue
            break
        return Conjunction(tuple(atoms), tuple(ineqs)), toks

    def head_disjunct(self, outer: dict[str, Var]) -> tuple[CQ, Token]:
        tok = self.peek()
        bound = dict(outer)
        exists_vars: tuple[Var, ...] = ()
        if tok.kind == "IDENT" and tok.text == "exists":
            self.next()
            evs = self.varlist()
            self.eat_punct(":")
            clash = [v for v in evs if v.name in outer]
            if clash:
                raise ParseError(
                    f"existential variable {clash[0].name!r} shadows a universal variable",
                    tok.span,
                    "safety",
                )
            exists_vars = tuple(evs)
            for v in evs:
                bound[v.name] = v
        conj, toks = self.conjunction(bound, ("|", "."))
        return CQ(exists_vars, conj), toks[0] if toks else tok


# ---------------------------------------------------------------------------
# Schema bookkeeping during parsing
# ---------------------------------------------------------------------------


class _SchemaBuilder:
    def __init__(self) -> None:
        self.arities: dict[str, int] = {BOT: 0}
        self.declared: dict[str, SourceSpan] = {}

    def declare(self, name: str, arity: int, span: SourceSpan) -> None:
        if name in self.declared:
            raise ParseError(f"predicate {name!r} declared twice", span, "duplicate-decl")
        if name in self.arities and self.arities[name] != arity:
            raise ParseError(
                f"predicate {name!r} declared with arity {arity}, already used with {self.arities[name]}",
                span,
                "arity",
            )
        self.declared[name] = span
        self.arities[name] = arity

    def observe(self, atom: Atom, span: SourceSpan) -> None:
        got = self.arities.get(atom.predicate)
        if got is None:
            self.arities[atom.predicate] = len(atom.args)
        elif got != len(atom.args):
            raise ParseError(
                f"predicate {atom.predicate!r} used with {len(atom.args)} argument(s), expected {got}",
                span,
                "arity",
            )

    def schema(self) -> Schema:
        return Schema(dict(self.arities))


def _observe_conjunction(builder: _SchemaBuilder, conj: Conjunction, span: SourceSpan) -> None:
    for a in conj.atoms:
        builder.observe(a, span)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def parse_dependencies(text: str, schema: Optional[Schema] = None) -> tuple[Schema, list[Dependency]]:
    """Parse schema declarations plus dependency statements."""
    p = _Parser(text)
    builder = _SchemaBuilder()
    if schema is not None:
        for name, arity in schema.predicates.items():
            builder.arities.setdefault(name, arity)
    deps: list[Dependency] = []
    while p.peek().kind != "EOF":
        section = p.at_section()
        if section is not None:
            if section not in ("schema", "dependencies"):
                raise ParseError(f"unexpected section {section!r} in a dependency file", p.peek().span)
            p.next()
            p.next()
            continue
        tok = p.peek()
        if tok.kind == "IDENT" and p.peek(1).kind == "PUNCT" and p.peek(1).text == "/":
            name = p.next()
            p.next()
            arity = p.peek()
            if arity.kind != "NAT":
                raise ParseError("expected arity after '/'", arity.span)
            p.next()
            p.eat_punct(".")
            builder.declare(name.text, int(arity.text), name.span)
        elif tok.kind == "IDENT":
            deps.append(_parse_dependency(p, builder))
        else:
            raise ParseError(
                f"expected a dependency or declaration, found {tok.text or 'end of input'!r}", tok.span
            )
    return builder.schema(), deps


def _parse_dependency(p: _Parser, builder: _SchemaBuilder) -> Dependency:
    start = p.peek()
    forall_vars: list[Var] = []
    if start.kind == "IDENT" and start.text == "forall":
        p.next()
        forall_vars = p.varlist()
        seen: set[str] = set()
        for v in forall_vars:
            if v.name in seen:
                raise ParseError(f"variable {v.name!r} listed twice", start.span, "duplicate-decl")
            seen.add(v.name)
        p.eat_punct(":")
    bound = {v.name: v for v in forall_vars}
    body, body_toks = p.conjunction(bound, ("->",))
    p.eat_punct("->")
    head_tok = p.peek()
    disjuncts: list[CQ] = []
    head_toks: list[Token] = []
    while True:
        cq, tok = p.head_disjunct(bound)
        disjuncts.append(cq)
        head_toks.append(tok)
        if p.at_punct("|"):
            p.next()
            continue
        break
    p.eat_punct(".")

    dep = Dependency(tuple(forall_vars), body, UCQ(tuple(disjuncts)))
    _check_dependency(dep, start.span, head_tok.span)
    _observe_conjunction(builder, body, body_toks[0].span)
    for cq, tok in zip(disjuncts, head_toks):
        _observe_conjunction(builder, cq.body, tok.span)
    return dep


def _check_dependency(dep: Dependency, body_span: SourceSpan, head_span: SourceSpan) -> None:
    declared = set(dep.forall_vars)
    pvars = dep.body.pvars()
    undeclared = pvars - declared
    if undeclared:
        name = sorted(v.name for v in undeclared)[0]
        raise ParseError(f"body variable {name!r} not declared by forall", body_span, "unbound-var")
    unused = declared - pvars
    if unused:
        name = sorted(v.name for v in unused)[0]
        raise ParseError(f"universal variable {name!r} not used in a body atom", body_span, "safety")
    loose = dep.body.variables() - pvars
    if loose:
        name = sorted(v.name for v in loose)[0]
        raise ParseError(f"inequality variable {name!r} not in a body atom", body_span, "safety")
    for cq in dep.head.disjuncts:
        stray = cq.free_vars() - declared
        if stray:
            name = sorted(v.name for v in stray)[0]
            raise ParseError(f"head variable {name!r} is unbound", head_span, "unbound-var")
        dangling = set(cq.exists_vars) - cq.body.pvars()
        if dangling:
            name = sorted(v.name for v in dangling)[0]
            raise ParseError(
                f"existential variable {name!r} never occurs in a head atom "
                "(identifiers not bound by a quantifier are constants)",
                head_span,
                "unbound-var",
            )
    if not dep.body.atoms:
        raise ParseError("dependency body needs at least one predicate atom", body_span, "safety")


def parse_database(text: str, schema: Schema) -> Database:
    p = _Parser(text)
    facts: set[Fact] = set()
    while p.peek().kind != "EOF":
        section = p.at_section()
        if section is not None:
            if section != "database":
                raise ParseError(f"unexpected section {section!r} in a database file", p.peek().span)
            p.next()
            p.next()
            continue
        atom, ineq, tok = p.atom_or_ineq({})
        if ineq is not None or atom is None:
            raise ParseError("expected a fact", tok.span)
        if atom.predicate == BOT:
            raise ParseError(f"the fact {BOT!r} is not allowed", tok.span)
        if not atom.is_ground:
            raise ParseError("facts cannot contain variables", tok.span, "unbound-var")
        try:
            schema.check_atom(atom)
        except Exception as exc:
            raise ParseError(str(exc), tok.span, "arity") from None
        p.eat_punct(".")
        facts.add(atom)
    return Database(schema, frozenset(facts))


def parse_query(text: str, schema: Schema) -> UCQ:
    p = _Parser(text)
    section = p.at_section()
    if section is not None:
        if section != "query":
            raise ParseError(f"unexpected section {section!r} in a query file", p.peek().span)
        p.next()
        p.next()
    disjuncts: list[CQ] = []
    while True:
        cq, tok = p.head_disjunct({})
        for atom in cq.body.atoms:
            if atom.predicate != BOT:
                try:
                    schema.check_atom(atom)
                except Exception as exc:
                    raise ParseError(str(exc), tok.span, "arity") from None
        if not cq.is_safe:
            name = sorted(v.name for v in cq.body.variables() - cq.body.pvars())[0]
            raise ParseError(f"variable {name!r} occurs only in inequalities", tok.span, "safety")
        if not cq.is_boolean:
            name = sorted(v.name for v in cq.free_vars())[0]
            raise ParseError(f"query variable {name!r} is not bound by exists", tok.span, "unbound-var")
        disjuncts.append(cq)
        if p.at_punct("|"):
            p.next()
            continue
        break
    if p.at_punct("."):
        p.next()
    tok = p.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.span)
    return UCQ(tuple(disjuncts))


def parse_subset(text: str, db: Database) -> frozenset[Fact]:
    """A fact file whose facts must all belong to ``db``."""
    sub = parse_database(text, db.schema)
    extra = sub.facts - db.facts
    if extra:
        worst = sort_facts(extra)[0]
        raise ParseError(f"fact {print_fact(worst)} is not in the database", SourceSpan(1, 1, 0, 1, 1, 0))
    return sub.facts


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def print_term(t: Term) -> str:
    return t.name


def print_atom(a: Atom) -> str:
    if a.predicate == BOT and not a.args:
        return "false"
    if not a.args:
        return a.predicate
    return f"{a.predicate}({', '.join(print_term(t) for t in a.args)})"


print_fact = print_atom


def print_conjunction(c: Conjunction) -> str:
    parts = [print_atom(a) for a in c.atoms]
    parts += [f"{print_term(i.left)} != {print_term(i.right)}" for i in c.ineqs]
    return ", ".join(parts)


def print_cq(q: CQ) -> str:
    prefix = ""
    if q.exists_vars:
        prefix = "exists " + ", ".join(v.name for v in q.exists_vars) + ": "
    return prefix + print_conjunction(q.body)


def print_query(q: UCQ) -> str:
    return " | ".join(print_cq(d) for d in q.disjuncts)


def print_dependency(dep: Dependency) -> str:
    prefix = ""
    if dep.forall_vars:
        prefix = "forall " + ", ".join(v.name for v in dep.forall_vars) + ": "
    return f"{prefix}{print_conjunction(dep.body)} -> {print_query(dep.head)} ."


def print_dependencies(deps: Iterable[Dependency]) -> str:
    return "\n".join(print_dependency(d) for d in deps) + "\n"


def print_schema(schema: Schema) -> str:
    lines = [
        f"{name}/{arity} ."
        for name, arity in sorted(schema.predicates.items())
        if name != BOT
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def print_database(db: Database) -> str:
    return "".join(print_fact(f) + " .\n" for f in db.sorted_facts())


# ---------------------------------------------------------------------------
# First-order sentences
# ---------------------------------------------------------------------------

_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4


def print_fo(phi: fo.Formula) -> str:
    """Deterministic text form; ``parse_fo`` reads it back structurally."""
    return _print_fo(phi, 0)


def _print_fo(phi: fo.Formula, parent: int) -> str:
    if isinstance(phi, fo.FTrue):
        return "true"
    if isinstance(phi, fo.FFalse):
        return "false"
    if isinstance(phi, fo.FAtom):
        name = phi.predicate + ("^aux" if phi.aux else "")
        if phi.predicate == BOT and not phi.args:
            return "false^aux" if phi.aux else "false"
        if not phi.args:
            return name
        return f"{name}({', '.join(print_term(t) for t in phi.args)})"
    if isinstance(phi, fo.FEq):
        return f"{print_term(phi.left)} = {print_term(phi.right)}"
    if isinstance(phi, fo.FNeq):
        return f"{print_term(phi.left)} != {print_term(phi.right)}"
    if isinstance(phi, fo.FNot):
        return "!" + _print_fo(phi.sub, _PREC_UNARY)
    if isinstance(phi, fo.FAnd):
        body = " & ".join(_print_fo(c, _PREC_AND) for c in phi.parts)
        return _wrap(body, parent, _PREC_AND)
    if isinstance(phi, fo.FOr):
        body = " | ".join(_print_fo(c, _PREC_OR) for c in phi.parts)
        return _wrap(body, parent, _PREC_OR)
    if isinstance(phi, fo.FImplies):
        body = f"{_print_fo(phi.left, _PREC_IMPLIES + 1)} -> {_print_fo(phi.right, 0)}"
        return _wrap(body, parent, _PREC_IMPLIES)
    if isinstance(phi, (fo.FExists, fo.FForall)):
        kw = "exists" if isinstance(phi, fo.FExists) else "forall"
        names = ", ".join(v.name for v in phi.vars)
        return _wrap(f"{kw} {names}: ({_print_fo(phi.sub, 0)})", parent, _PREC_IMPLIES)
    raise TypeError(f"not a formula: {phi!r}")


def _wrap(text: str, parent: int, mine: int) -> str:
    return f"({text})" if parent >= mine else text


def parse_fo(text: str) -> fo.Formula:
    p = _Parser(text)
    phi = _parse_fo(p, {})
    tok = p.peek()
    if tok.kind != "EOF":
        raise ParseError(f"trailing input {tok.text!r}", tok.span)
    return phi


def _parse_fo(p: _Parser, bound: dict[str, Var]) -> fo.Formula:
    tok = p.peek()
    if tok.kind == "IDENT" and tok.text in ("forall", "exists"):
        p.next()
        vs = p.varlist()
        p.eat_punct(":")
        inner = dict(bound)
        inner.update({v.name: v for v in vs})
        sub = _parse_fo(p, inner)
        cls = fo.FForall if tok.text == "forall" else fo.FExists
        return cls(tuple(vs), sub)
    return _parse_fo_implies(p, bound)


def _parse_fo_implies(p: _Parser, bound: dict[str, Var]) -> fo.Formula:
    left = _parse_fo_or(p, bound)
    if p.at_punct("->"):
        p.next()
        right = _parse_fo(p, bound)
        return fo.FImplies(left, right)
    return left


def _parse_fo_or(p: _Parser, bound: dict[str, Var]) -> fo.Formula:
    parts = [_parse_fo_and(p, bound)]
    while p.at_punct("|"):
        p.next()
        parts.append(_parse_fo_and(p, bound))
    return parts[0] if len(parts) == 1 else fo.FOr(tuple(parts))


def _parse_fo_and(p: _Parser, bound: dict[str, Var]) -> fo.Formula:
    parts = [_parse_fo_unary(p, bound)]
    while p.at_punct("&"):
        p.next()
        parts.append(_parse_fo_unary(p, bound))
    return parts[0] if len(parts) == 1 else fo.FAnd(tuple(parts))


def _parse_fo_unary(p: _Parser, bound: dict[str, Var]) -> fo.Formula:
    tok = p.peek()
    if p.at_punct("!"):
        p.next()
        return fo.FNot(_parse_fo_unary(p, bound))
    if p.at_punct("("):
        p.next()
        phi = _parse_fo(p, bound)
        p.eat_punct(")")
        return phi
    if tok.kind == "IDENT" and tok.text in ("forall", "exists"):
        return _parse_fo(p, bound)
    if tok.kind == "IDENT" and tok.text == "true":
        p.next()
        return fo.TRUE
    if tok.kind == "IDENT" and tok.text == "false":
        p.next()
        if p.at_punct("^aux"):
            p.next()
            return fo.FAtom(BOT, (), aux=True)
        return fo.FALSE
    if tok.kind != "IDENT":
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}", tok.span)
    name = p.next().text
    aux = False
    if p.at_punct("^aux"):
        p.next()
        aux = True
    if p.at_punct("("):
        p.next()
        args: list[Term] = []
        if not p.at_punct(")"):
            args.append(_fo_term(p, bound))
            while p.at_punct(","):
                p.next()
                args.append(_fo_term(p, bound))
        p.eat_punct(")")
        return fo.FAtom(name, tuple(args), aux=aux)
    if not aux and (p.at_punct("=") or p.at_punct("!=")):
        left: Term = bound.get(name, Const(name))
        op = p.next().text
        right = _fo_term(p, bound)
        return fo.FEq(left, right) if op == "=" else fo.FNeq(left, right)
    return fo.FAtom(name, (), aux=aux)


def _fo_term(p: _Parser, bound: dict[str, Var]) -> Term:
    tok = p.eat_ident("term")
    if tok.text in KEYWORDS:
        raise ParseError(f"keyword {tok.text!r} cannot be a term", tok.span)
    return bound.get(tok.text, Const(tok.text))
