"""Command-line front end.

Exit codes: 0 = success / affirmative answer, 1 = negative answer,
2 = usage or parse error, 3 = method inapplicable or cap exceeded.
`--json` swaps the human-readable line for a JSON object on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Optional, Sequence

from . import entail as entail_mod
from . import foeval as fo
from . import gadgets, repair, syntax, weakcons
from .classify import check_fdet_sentence, classify, is_fdet
from .core import Database, consistent, sort_facts
from .entail import EntMethod, Semantics
from .errors import FormulaTooLarge, InstanceTooLarge, MethodInapplicable
from .repair import RCMethod
from .syntax import ParseError
from .weakcons import DEFAULT_CAP, WCMethod

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_INAPPLICABLE = 3


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_instance(args, need_db: bool = True):
    schema, deps = syntax.parse_dependencies(_read(args.constraints))
    db = None
    if getattr(args, "database", None):
        db = syntax.parse_database(_read(args.database), schema)
    elif need_db:
        raise SystemExit2("a database file is required (-d/--database)")
    return schema, deps, db


def _load_subset(args, db: Database):
    if not getattr(args, "subset", None):
        raise SystemExit2("a subset file is required (-s/--subset)")
    return syntax.parse_subset(_read(args.subset), db)


def _load_query(args, schema):
    inline = getattr(args, "query", None)
    path = getattr(args, "query_file", None)
    if inline and path:
        raise SystemExit2("give the query inline (-q) or as a file (--query-file), not both")
    if inline:
        return syntax.parse_query(inline, schema)
    if path:
        return syntax.parse_query(_read(path), schema)
    raise SystemExit2("a query is required (-q/--query or --query-file)")


class SystemExit2(Exception):
    """Usage error, reported on stderr with exit code 2."""


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    else:
        print(text)


def _facts_json(facts) -> list[str]:
    return [syntax.print_fact(f) for f in sort_facts(facts)]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(args) -> int:
    schema, deps, db = _load_instance(args, need_db=False)
    cls = classify(deps, db)
    payload = cls.as_dict()
    _emit(args, payload, ", ".join(f"{k}={v}" for k, v in payload.items()))
    return EXIT_TRUE


def cmd_consistent(args) -> int:
    schema, deps, db = _load_instance(args)
    ok = consistent(db, deps)
    _emit(args, {"consistent": ok}, f"consistent={ok}")
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_fdet(args) -> int:
    schema, deps, db = _load_instance(args)
    ok = is_fdet(deps, db)
    _emit(args, {"fdet": ok}, f"fdet={ok}")
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_weakcons(args) -> int:
    schema, deps, db = _load_instance(args)
    subset = _load_subset(args, db)
    method = WCMethod(args.method)
    ok = weakcons.weakly_consistent(subset, db, deps, method, cap=args.cap)
    used = method if method is not WCMethod.AUTO else weakcons._auto_method(db, tuple(deps))
    witness = None
    if ok and used in (WCMethod.BRUTE, WCMethod.LINEAR_REPAIR):
        if used is WCMethod.BRUTE:
            wit = weakcons.weak_consistency_witness(subset, db, deps, cap=args.cap)
        else:
            wit = weakcons.unique_repair_linear(db, deps)
        witness = _facts_json(wit) if wit is not None else None
    payload = {"weakly_consistent": ok, "method": used.value, "witness_superset": witness}
    _emit(args, payload, f"weakly_consistent={ok} method={used.value}")
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_repaircheck(args) -> int:
    schema, deps, db = _load_instance(args)
    subset = _load_subset(args, db)
    method = RCMethod(args.method)
    ok = repair.repair_check(subset, db, deps, method, cap=args.cap)
    used = method if method is not RCMethod.AUTO else repair._auto_method(db, tuple(deps))
    blocking = None
    if not ok:
        blocker = repair.blocking_fact(subset, db, deps)
        blocking = syntax.print_fact(blocker) if blocker is not None else None
    payload = {"is_repair": ok, "method": used.value, "blocking_fact": blocking}
    _emit(args, payload, f"is_repair={ok} method={used.value}")
    return EXIT_TRUE if ok else EXIT_FALSE


def cmd_repairs(args) -> int:
    schema, deps, db = _load_instance(args)
    rs = repair.enumerate_repairs(db, deps, cap=args.cap)
    payload = {
        "repairs": [_facts_json(r) for r in rs.repairs],
        "intersection": _facts_json(rs.intersection),
    }
    text = "\n".join(
        ["repairs:"]
        + ["  {" + ", ".join(_facts_json(r)) + "}" for r in rs.repairs]
        + ["intersection: {" + ", ".join(_facts_json(rs.intersection)) + "}"]
    )
    _emit(args, payload, text)
    return EXIT_TRUE


def cmd_entail(args) -> int:
    schema, deps, db = _load_instance(args)
    query = _load_query(args, schema)
    semantics = Semantics(args.semantics)
    method = EntMethod(args.method)
    ok = entail_mod.entails(db, deps, query, semantics, method, cap=args.cap)
    used = method if method is not EntMethod.AUTO else entail_mod._auto_method(db, tuple(deps), semantics)
    witness = None
    if (semantics is Semantics.ALLREP and not ok) or (semantics is Semantics.INTREP and ok):
        raw = entail_mod.entailment_witness(db, deps, query, semantics, used, cap=args.cap)
        if raw is not None:
            witness = {k: _facts_json(v) for k, v in raw.items()}
    payload = {
        "entailed": ok,
        "semantics": semantics.value,
        "method": used.value,
        "witness": witness,
    }
    _emit(args, payload, f"entailed={ok} semantics={semantics.value} method={used.value}")
    return EXIT_TRUE if ok else EXIT_FALSE


REWRITE_TARGETS = ("check-fdet", "wcons", "wcons-al", "check-repair", "qent", "qent-al")


def cmd_rewrite(args) -> int:
    schema, deps, db = _load_instance(args, need_db=False)
    target = args.target
    if target == "check-fdet":
        sentence = check_fdet_sentence(deps)
    elif target == "wcons":
        sentence = weakcons.weak_consistency_sentence(deps)
    elif target == "wcons-al":
        sentence = weakcons.weak_consistency_sentence_linear(deps)
    elif target == "check-repair":
        sentence = repair.repair_check_sentence(deps)
    elif target == "qent":
        query = _load_query(args, schema)
        sentence = entail_mod.entailment_sentence(query, deps)
    elif target == "qent-al":
        query = _load_query(args, schema)
        sentence = entail_mod.entailment_sentence_linear(query, deps)
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit2(f"unknown rewrite target {target!r}")
    text = syntax.print_fo(sentence)
    payload: dict = {"target": target, "sentence": text}
    if args.aux_subset:
        if db is None:
            raise SystemExit2("--aux-subset needs a database (-d/--database)")
        subset = syntax.parse_subset(_read(args.aux_subset), db)
        verdict = fo.evaluate(sentence, fo.context(db.facts, subset))
        payload["verdict"] = verdict
        _emit(args, payload, f"{text}\nverdict={verdict}")
        return EXIT_TRUE if verdict else EXIT_FALSE
    _emit(args, payload, text)
    return EXIT_TRUE


def cmd_gadget(args) -> int:
    rng = random.Random(args.seed)
    if args.family == "stcon":
        n = max(2, args.size)
        verts = [f"n{i}" for i in range(n)]
        edges = sorted({(rng.choice(verts), rng.choice(verts)) for _ in range(args.edges or 2 * n)})
        g = gadgets.Digraph(tuple(verts), tuple(edges), verts[0], verts[-1])
        if args.variant == "repair":
            deps, db, probe = gadgets.reachability_repair_check(g)
            truth = {"reachable": gadgets.bfs_reachable(g), "empty_set_is_repair": gadgets.bfs_reachable(g)}
        else:
            deps, db, probe = gadgets.reachability_weak_consistency(g)
            truth = {
                "reachable": gadgets.bfs_reachable(g),
                "probe_weakly_consistent": not gadgets.bfs_reachable(g),
            }
    elif args.family == "horn3sat":
        nv = max(1, args.size)
        vars = [f"v{i}" for i in range(nv)]
        clauses = []
        for _ in range(args.clauses or 2 * nv):
            k = rng.randint(1, min(3, nv))
            lits = rng.sample(vars, k)
            if rng.random() < 0.7:
                clauses.append(gadgets.HornClause(tuple(lits[:-1]), lits[-1]))
            else:
                clauses.append(gadgets.HornClause(tuple(lits), None))
        phi = gadgets.HornFormula(tuple(clauses))
        deps, db, probe = gadgets.horn_weak_consistency(phi)
        truth = {"satisfiable": gadgets.horn_satisfiable(phi), "probe_weakly_consistent": gadgets.horn_satisfiable(phi)}
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit2(f"unknown gadget family {args.family!r}")
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    base = os.path.join(out, f"{args.family}-{args.seed}")
    with open(base + ".ded", "w", encoding="utf-8") as fh:
        fh.write(syntax.print_dependencies(deps))
    with open(base + ".db", "w", encoding="utf-8") as fh:
        fh.write(syntax.print_database(db))
    with open(base + ".subset", "w", encoding="utf-8") as fh:
        fh.write("".join(syntax.print_fact(f) + " .\n" for f in sort_facts(probe)))
    with open(base + ".truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, sort_keys=True, indent=2)
        fh.write("\n")
    payload = {"family": args.family, "files": [base + ext for ext in (".ded", ".db", ".subset", ".truth.json")], "truth": truth}
    _emit(args, payload, "\n".join(payload["files"]))
    return EXIT_TRUE


def cmd_oracle(args) -> int:
    """Ground truth by exhaustive enumeration only; for cross-checking."""
    schema, deps, db = _load_instance(args)
    rs = repair.enumerate_repairs(db, deps, cap=args.cap)
    payload: dict = {
        "repairs": [_facts_json(r) for r in rs.repairs],
        "intersection": _facts_json(rs.intersection),
    }
    if getattr(args, "subset", None):
        subset = _load_subset(args, db)
        payload["subset_weakly_consistent"] = weakcons.weakly_consistent_brute(subset, db, deps, cap=args.cap)
        payload["subset_is_repair"] = rs.contains(subset)
    if getattr(args, "query", None) or getattr(args, "query_file", None):
        query = _load_query(args, schema)
        from .core import holds

        payload["allrep_entailed"] = all(holds(query, r) for r in rs.repairs)
        payload["intrep_entailed"] = holds(query, rs.intersection)
    _emit(args, payload, json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_TRUE


# ---------------------------------------------------------------------------
# Wiring
# ---------------------------------------------------------------------------


def _add_common(p, db_required: bool = True, subset: bool = False, query: bool = False) -> None:
    p.add_argument("-c", "--constraints", required=True, help="dependency file (.ded)")
    p.add_argument("-d", "--database", required=db_required, help="database file (.db)")
    if subset:
        p.add_argument("-s", "--subset", help="subset file (facts, one per statement)")
    if query:
        p.add_argument("-q", "--query", help="inline query text")
        p.add_argument("--query-file", help="query file")
    p.add_argument("--cap", type=int, default=None, help="fact cap for exhaustive methods (default 20)")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cqa", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="dependency-set classification")
    _add_common(p, db_required=False)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("consistent", help="is the database consistent?")
    _add_common(p)
    p.set_defaults(fn=cmd_consistent)

    p = sub.add_parser("fdet", help="is the set forward-deterministic for the database?")
    _add_common(p)
    p.set_defaults(fn=cmd_fdet)

    p = sub.add_parser("weakcons", help="is the subset weakly consistent?")
    _add_common(p, subset=True)
    p.add_argument("--method", default="auto", choices=[m.value for m in WCMethod])
    p.set_defaults(fn=cmd_weakcons)

    p = sub.add_parser("repaircheck", help="is the subset a repair?")
    _add_common(p, subset=True)
    p.add_argument("--method", default="auto", choices=[m.value for m in RCMethod])
    p.set_defaults(fn=cmd_repaircheck)

    p = sub.add_parser("repairs", help="enumerate all repairs and their intersection")
    _add_common(p)
    p.set_defaults(fn=cmd_repairs)

    p = sub.add_parser("entail", help="Boolean query entailment over repairs")
    _add_common(p, query=True)
    p.add_argument("--semantics", default="allrep", choices=[s.value for s in Semantics])
    p.add_argument("--method", default="auto", choices=[m.value for m in EntMethod])
    p.set_defaults(fn=cmd_entail)

    p = sub.add_parser("rewrite", help="print a first-order rewriting")
    _add_common(p, db_required=False, query=True)
    p.add_argument("--target", required=True, choices=REWRITE_TARGETS)
    p.add_argument("--aux-subset", help="evaluate the sentence against database + auxiliary subset")
    p.set_defaults(fn=cmd_rewrite)

    p = sub.add_parser("gadget", help="generate a reduction instance with ground truth")
    p.add_argument("family", choices=("stcon", "horn3sat"))
    p.add_argument("--variant", default="weakcons", choices=("weakcons", "repair"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=5, help="vertices / variables")
    p.add_argument("--edges", type=int, default=None)
    p.add_argument("--clauses", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_gadget)

    p = sub.add_parser("oracle", help="brute-force ground truth for an instance")
    _add_common(p, subset=True, query=True)
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    if getattr(args, "cap", None) is None and hasattr(args, "cap"):
        env_cap = os.environ.get("CQA_CAP")
        args.cap = int(env_cap) if env_cap else DEFAULT_CAP
    if getattr(args, "cap", None) is not None and args.cap > 24:
        print(f"warning: cap {args.cap} makes exhaustive methods very slow", file=sys.stderr)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error [{exc.code}] at {exc.span}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MethodInapplicable, InstanceTooLarge, FormulaTooLarge) as exc:
        print(f"not applicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
