"""AST, evaluation, and SMT-LIB2 export for the formula fragment in use.

The fragment is deliberately tiny: atoms compare nonnegative linear terms
with ``=`` or ``>``, connectives are n-ary conjunction/disjunction, and the
only quantifier is a prenex existential block. Semantics are over the
natural numbers; no negation, no universal quantifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .grammar import ParikhVector

# Var kinds, in canonical sort order: rule-count x, nonterminal-index y,
# letter-count z. `index` is the rule id or declaration position.
RULE_COUNT = 0
NT_INDEX = 1
LETTER_COUNT = 2

_SMT_PREFIX = {RULE_COUNT: "x_", NT_INDEX: "y_", LETTER_COUNT: "z_"}


class EvaluationError(ValueError):
    """Unassigned variable or non-natural value during evaluation."""


@dataclass(frozen=True, order=True)
class Var:
    kind: int
    index: int
    key: str

    @property
    def smt_name(self) -> str:
        return _SMT_PREFIX[self.kind] + self.key

    def __repr__(self) -> str:
        return self.smt_name


@dataclass(frozen=True)
class LinearTerm:
    """constant + sum of coeff*var with positive coefficients, distinct vars."""

    constant: int
    monomials: tuple[tuple[int, Var], ...]


def linear(constant: int = 0, monomials: Iterable[tuple[int, Var]] = ()) -> LinearTerm:
    """Normalize: merge duplicate vars, drop zero coefficients, sort canonically."""
    merged: dict[Var, int] = {}
    for coeff, var in monomials:
        merged[var] = merged.get(var, 0) + coeff
    items = tuple(sorted(((c, v) for v, c in merged.items() if c != 0), key=lambda m: m[1]))
    for coeff, var in items:
        if coeff < 0:
            raise ValueError(f"negative coefficient {coeff} for {var}")
    if constant < 0:
        raise ValueError(f"negative constant {constant}")
    return LinearTerm(constant, items)


def _coerce(value: Union[int, Var, LinearTerm]) -> LinearTerm:
    if isinstance(value, LinearTerm):
        return value
    if isinstance(value, Var):
        return LinearTerm(0, ((1, value),))
    return linear(constant=value)


EQ = "="
GT = ">"


@dataclass(frozen=True)
class Atom:
    left: LinearTerm
    relation: str
    right: LinearTerm


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    bound: tuple[Var, ...]
    body: "Formula"


Formula = Union[Atom, And, Or, Exists]


def eq(left: Union[int, Var, LinearTerm], right: Union[int, Var, LinearTerm]) -> Atom:
    return Atom(_coerce(left), EQ, _coerce(right))


def gt(left: Union[int, Var, LinearTerm], right: Union[int, Var, LinearTerm]) -> Atom:
    return Atom(_coerce(left), GT, _coerce(right))


def conj(items: Iterable[Formula]) -> And:
    return And(tuple(items))


def disj(items: Iterable[Formula]) -> Or:
    return Or(tuple(items))


Assignment = Mapping[Var, int]


def term_value(term: LinearTerm, assignment: Assignment) -> int:
    total = term.constant
    for coeff, var in term.monomials:
        try:
            value = assignment[var]
        except KeyError:
            raise EvaluationError(f"unassigned variable {var.smt_name}") from None
        if value < 0:
            raise EvaluationError(f"negative value {value} for {var.smt_name}")
        total += coeff * value
    return total


def evaluate(formula: Formula, assignment: Assignment) -> bool:
    """Standard semantics over the naturals.

    An Exists node is evaluated by evaluating its body directly, so the
    assignment must also cover the bound variables; this is how candidate
    solutions are checked.
    """
    if isinstance(formula, Atom):
        left = term_value(formula.left, assignment)
        right = term_value(formula.right, assignment)
        return left == right if formula.relation == EQ else left > right
    if isinstance(formula, And):
        return all(evaluate(item, assignment) for item in formula.items)
    if isinstance(formula, Or):
        return any(evaluate(item, assignment) for item in formula.items)
    if isinstance(formula, Exists):
        return evaluate(formula.body, assignment)
    raise TypeError(f"not a formula: {formula!r}")


def _term_vars(term: LinearTerm) -> set[Var]:
    return {var for _, var in term.monomials}


def free_vars(formula: Formula) -> set[Var]:
    """Variables occurring in `formula` not captured by an Exists binder."""

    def walk(f: Formula, bound: frozenset[Var]) -> set[Var]:
        if isinstance(f, Atom):
            return (_term_vars(f.left) | _term_vars(f.right)) - bound
        if isinstance(f, (And, Or)):
            result: set[Var] = set()
            for item in f.items:
                result |= walk(item, bound)
            return result
        if isinstance(f, Exists):
            return walk(f.body, bound | frozenset(f.bound))
        raise TypeError(f"not a formula: {f!r}")

    return walk(formula, frozenset())


def all_vars(formula: Formula) -> set[Var]:
    """Every variable occurring in `formula`, bound or free."""
    if isinstance(formula, Atom):
        return _term_vars(formula.left) | _term_vars(formula.right)
    if isinstance(formula, (And, Or)):
        result: set[Var] = set()
        for item in formula.items:
            result |= all_vars(item)
        return result
    if isinstance(formula, Exists):
        return set(formula.bound) | all_vars(formula.body)
    raise TypeError(f"not a formula: {formula!r}")


def formula_size(formula: Formula) -> int:
    """AST nodes plus monomials; a term counts 1 plus its monomials."""
    if isinstance(formula, Atom):
        return 1 + (1 + len(formula.left.monomials)) + (1 + len(formula.right.monomials))
    if isinstance(formula, (And, Or)):
        return 1 + sum(formula_size(item) for item in formula.items)
    if isinstance(formula, Exists):
        return 1 + len(formula.bound) + formula_size(formula.body)
    raise TypeError(f"not a formula: {formula!r}")


def _render_term(term: LinearTerm) -> str:
    parts: list[str] = []
    if term.constant != 0 or not term.monomials:
        parts.append(str(term.constant))
    for coeff, var in term.monomials:
        parts.append(var.smt_name if coeff == 1 else f"(* {coeff} {var.smt_name})")
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _render(formula: Formula) -> str:
    if isinstance(formula, Atom):
        return f"({formula.relation} {_render_term(formula.left)} {_render_term(formula.right)})"
    if isinstance(formula, (And, Or)):
        op = "and" if isinstance(formula, And) else "or"
        if not formula.items:
            return "true" if op == "and" else "false"
        if len(formula.items) == 1:
            return _render(formula.items[0])
        return f"({op} " + " ".join(_render(item) for item in formula.items) + ")"
    if isinstance(formula, Exists):
        # Bound variables are flattened to global constants: the formulas in
        # use are a single prenex existential block, so this is sound and
        # keeps the script quantifier-free.
        return _render(formula.body)
    raise TypeError(f"not a formula: {formula!r}")


def to_smt2(formula: Formula, fixed: ParikhVector | None = None) -> str:
    """Emit a deterministic QF_LIA script for `formula`.

    Every variable (free and bound alike) becomes an Int constant with a
    nonnegativity assertion. When `fixed` is given, each letter-count
    variable is pinned to the corresponding value.
    """
    variables = all_vars(formula)
    pins: list[tuple[Var, int]] = []
    if fixed is not None:
        for position, (letter, value) in enumerate(zip(fixed.letters, fixed.values)):
            var = Var(LETTER_COUNT, position, letter)
            variables.add(var)
            pins.append((var, value))

    ordered = sorted(variables)
    lines = ["(set-logic QF_LIA)"]
    lines.extend(f"(declare-const {v.smt_name} Int)" for v in ordered)
    lines.extend(f"(assert (>= {v.smt_name} 0))" for v in ordered)
    lines.append(f"(assert {_render(formula)})")
    lines.extend(f"(assert (= {v.smt_name} {value}))" for v, value in pins)
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
