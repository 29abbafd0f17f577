"""Command-line front end.

Subcommands: ``build`` exports the letter-count formula as SMT-LIB2,
``member`` decides a vector with an optional witness, ``image`` enumerates
the image up to a norm, and ``diff`` cross-checks the solver against the
brute-force enumerator.

Exit codes: 0 success/SAT, 1 bounded-UNSAT or diff failure, 2 usage or
parse error. Output records are single-line and machine readable.
"""

from __future__ import annotations

import argparse
import sys

from .construction import build_formula
from .grammar import Grammar, GrammarError, ParikhVector, grammar_size, parse_grammar
from .oracle import image_up_to
from .presburger import formula_size, to_smt2
from .reconstruct import serialize_tree
from .solver import Sat, enumerate_image, solve_membership
from .grammar import parikh_of_word  # noqa: F401  (re-exported for scripts)


class UsageError(Exception):
    pass


def _load_grammar(path: str) -> Grammar:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read grammar file: {exc}") from exc
    return parse_grammar(text)


def parse_vector_spec(grammar: Grammar, text: str) -> ParikhVector:
    """Parse ``letter=count`` pairs; omitted letters default to zero."""
    counts: dict[str, int] = {}
    if text.strip():
        for part in text.split(","):
            if "=" not in part:
                raise UsageError(f"malformed vector entry {part!r} (expected letter=count)")
            name, _, raw = part.partition("=")
            name = name.strip()
            raw = raw.strip()
            if not grammar.is_terminal(name):
                raise UsageError(f"unknown terminal {name!r}")
            if not raw.isdigit():
                raise UsageError(f"count for {name!r} must be a decimal natural, got {raw!r}")
            if name in counts:
                raise UsageError(f"terminal {name!r} given twice")
            counts[name] = int(raw)
    return ParikhVector.of(grammar, counts)


def cmd_build(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    fixed = parse_vector_spec(grammar, args.fixed) if args.fixed is not None else None
    formula = build_formula(grammar)
    script = to_smt2(formula, fixed)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(script)
    else:
        sys.stdout.write(script)
    print(
        f"grammar_size={grammar_size(grammar)} formula_size={formula_size(formula)}",
        file=sys.stderr,
    )
    return 0


def _format_counts(values: list[int]) -> str:
    return ",".join(str(v) for v in values)


def cmd_member(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    z = parse_vector_spec(grammar, args.vector)
    result = solve_membership(grammar, z, args.bound)
    if isinstance(result, Sat):
        x = _format_counts([result.x[r.id] for r in grammar.rules])
        y = _format_counts([result.y[nt.name] for nt in grammar.nonterminals])
        record = f"SAT x={x} y={y}"
        if args.witness:
            record += " w=" + "".join(result.witness)
        if args.witness_tree:
            record += " tree=" + serialize_tree(result.tree)
        print(record)
        return 0
    print(f"UNSAT_UP_TO {result.bound}")
    return 1


def cmd_image(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    image = enumerate_image(grammar, args.max_norm, args.bound)
    for vector in sorted(image, key=lambda v: v.values):
        print(vector.to_text())
    return 0


def cmd_diff(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    solver_image = enumerate_image(grammar, args.max_norm, args.bound)
    oracle_image = {
        v for v in image_up_to(grammar, args.oracle_budget) if v.norm_inf() <= args.max_norm
    }
    missing = sorted(oracle_image - solver_image, key=lambda v: v.values)
    extra = sorted(solver_image - oracle_image, key=lambda v: v.values)
    for vector in missing:
        print(f"MISSING {vector.to_text()}")
    for vector in extra:
        # Witness-validated membership the enumerator's budget did not reach;
        # informational, not a failure.
        print(f"ORACLE_BUDGET_SHORT {vector.to_text()}")
    if missing:
        print(f"FAIL missing={len(missing)}")
        return 1
    print("OK")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parikh",
        description="Letter-count image of a context-free grammar: formula export, "
        "membership with witnesses, image enumeration, oracle diff.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="emit the formula as an SMT-LIB2 script")
    build.add_argument("-g", "--grammar", required=True, help="grammar file")
    build.add_argument("-z", "--fixed", dest="fixed", help="pin letter counts, e.g. a=2,b=2")
    build.add_argument("-o", "--output", help="output path (default: stdout)")
    build.set_defaults(func=cmd_build)

    member = sub.add_parser("member", help="decide membership of a count vector")
    member.add_argument("-g", "--grammar", required=True)
    member.add_argument("-z", "--vector", required=True, help="query vector, e.g. a=2,b=2")
    member.add_argument("--bound", type=int, help="search bound per rule count")
    member.add_argument("--witness", action="store_true", help="print a witness word")
    member.add_argument("--witness-tree", action="store_true", help="print the witness tree")
    member.set_defaults(func=cmd_member)

    image = sub.add_parser("image", help="enumerate the image up to a norm")
    image.add_argument("-g", "--grammar", required=True)
    image.add_argument("--max-norm", type=int, default=3)
    image.add_argument("--bound", type=int)
    image.set_defaults(func=cmd_image)

    diff = sub.add_parser("diff", help="cross-check solver against brute-force enumeration")
    diff.add_argument("-g", "--grammar", required=True)
    diff.add_argument("--max-norm", type=int, default=3)
    diff.add_argument("--oracle-budget", type=int, default=10)
    diff.add_argument("--bound", type=int)
    diff.set_defaults(func=cmd_diff)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return 2 if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except (UsageError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
