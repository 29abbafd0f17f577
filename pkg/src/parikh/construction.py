"""Builds the letter-count formula of a grammar.

For each nonterminal X there is a flow-balance equation (the number of X
nodes produced as rule heads equals the number of X slots consumed in rule
bodies, with a surplus of one at the start symbol) and a connectivity
constraint over index variables y_X that forces every used nonterminal to
be introduced by a used rule reachable from the start. For each letter a,
a counting equation ties the free variable z_a to the weighted rule counts.

Only rules actually mentioning the symbol at hand contribute monomials,
which keeps both the output size and the construction work linear in the
grammar size.
"""

from __future__ import annotations

from typing import Mapping

from .grammar import Grammar, GrammarError, ParikhVector, Rule, Symbol
from .presburger import (
    And,
    Exists,
    Formula,
    LETTER_COUNT,
    NT_INDEX,
    RULE_COUNT,
    Var,
    conj,
    disj,
    eq,
    gt,
    linear,
)


def rule_count_var(rule: Rule | int) -> Var:
    rid = rule.id if isinstance(rule, Rule) else rule
    return Var(RULE_COUNT, rid, f"p{rid}")


def nt_index_var(grammar: Grammar, symbol: Symbol | str) -> Var:
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    if name not in grammar.nt_index:
        raise GrammarError(f"{name!r} is not a nonterminal")
    return Var(NT_INDEX, grammar.nt_index[name], name)


def letter_count_var(grammar: Grammar, symbol: Symbol | str) -> Var:
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    if name not in grammar.t_index:
        raise GrammarError(f"{name!r} is not a terminal")
    return Var(LETTER_COUNT, grammar.t_index[name], name)


class _Steps:
    """Cheap work counter for the linear-construction check."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def tick(self, n: int = 1) -> None:
        self.count += n


def _alpha(grammar: Grammar, name: str, steps: _Steps) -> Formula:
    head_side = []
    for rule in grammar.rules_with_lhs(name):
        head_side.append((1, rule_count_var(rule)))
        steps.tick()
    body_side = []
    for rule, count in grammar.rhs_occurrences(name):
        body_side.append((count, rule_count_var(rule)))
        steps.tick()
    surplus = 1 if name == grammar.start.name else 0
    steps.tick()
    return eq(linear(0, head_side), linear(surplus, body_side))


def _beta(grammar: Grammar, name: str, steps: _Steps) -> Formula:
    y_x = nt_index_var(grammar, name)
    if name == grammar.start.name:
        steps.tick()
        return eq(y_x, 1)
    occurrences = grammar.rhs_occurrences(name)
    used_sum = linear(0, [(count, rule_count_var(rule)) for rule, count in occurrences])
    steps.tick(len(occurrences) + 1)
    disjuncts: list[Formula] = [conj([eq(y_x, 0), eq(used_sum, 0)])]
    for rule, _count in occurrences:
        y_head = nt_index_var(grammar, rule.lhs.name)
        disjuncts.append(
            conj(
                [
                    gt(rule_count_var(rule), 0),
                    gt(y_head, 0),
                    eq(y_x, linear(1, [(1, y_head)])),
                ]
            )
        )
        steps.tick(3)
    return disj(disjuncts)


def _gamma(grammar: Grammar, name: str, steps: _Steps) -> Formula:
    z_a = letter_count_var(grammar, name)
    body_side = []
    for rule, count in grammar.rhs_occurrences(name):
        body_side.append((count, rule_count_var(rule)))
        steps.tick()
    steps.tick()
    return eq(z_a, linear(0, body_side))


def build_alpha(grammar: Grammar, symbol: Symbol | str) -> Formula:
    """Flow balance for one nonterminal; empty sums degenerate to 0 = 0."""
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    if name not in grammar.nt_index:
        raise GrammarError(f"{name!r} is not a nonterminal")
    return _alpha(grammar, name, _Steps())


def build_beta(grammar: Grammar, symbol: Symbol | str) -> Formula:
    """Connectivity constraint for one nonterminal.

    For the start symbol this is just y_S = 1. Otherwise it is a disjunction:
    either the symbol is unused (its index and its weighted body occurrences
    are both zero), or some rule mentioning it is applied and the index is one
    past the index of that rule's head. Disjuncts follow rule-id order.
    """
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    if name not in grammar.nt_index:
        raise GrammarError(f"{name!r} is not a nonterminal")
    return _beta(grammar, name, _Steps())


def build_gamma(grammar: Grammar, symbol: Symbol | str) -> Formula:
    """Letter-count equation z_a = weighted sum of rule applications."""
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    if name not in grammar.t_index:
        raise GrammarError(f"{name!r} is not a terminal")
    return _gamma(grammar, name, _Steps())


def build_formula_with_stats(grammar: Grammar) -> tuple[Formula, int]:
    """Build the full formula plus the number of elementary construction steps."""
    steps = _Steps()
    conjuncts: list[Formula] = []
    for nt in grammar.nonterminals:
        conjuncts.append(_alpha(grammar, nt.name, steps))
        conjuncts.append(_beta(grammar, nt.name, steps))
    for t in grammar.terminals:
        conjuncts.append(_gamma(grammar, t.name, steps))
    bound = [rule_count_var(rule) for rule in grammar.rules]
    bound.extend(nt_index_var(grammar, nt) for nt in grammar.nonterminals)
    steps.tick(len(bound))
    return Exists(tuple(bound), conj(conjuncts)), steps.count


def build_formula(grammar: Grammar) -> Formula:
    """The full letter-count formula: one existential block binding all rule
    and index variables over the conjunction of all balance, connectivity,
    and counting constraints. Letter-count variables occur free."""
    formula, _ = build_formula_with_stats(grammar)
    return formula


def alpha_beta_body(grammar: Grammar) -> Formula:
    """Conjunction of all balance and connectivity constraints (no letter part)."""
    steps = _Steps()
    conjuncts: list[Formula] = []
    for nt in grammar.nonterminals:
        conjuncts.append(_alpha(grammar, nt.name, steps))
        conjuncts.append(_beta(grammar, nt.name, steps))
    return conj(conjuncts)


def assignment_for(
    grammar: Grammar,
    x: Mapping[int, int] | None = None,
    y: Mapping[str, int] | None = None,
    z: ParikhVector | None = None,
) -> dict[Var, int]:
    """Assemble a variable assignment from rule counts, indices, and letter counts."""
    assignment: dict[Var, int] = {}
    if x is not None:
        for rule in grammar.rules:
            assignment[rule_count_var(rule)] = x.get(rule.id, 0)
    if y is not None:
        for nt in grammar.nonterminals:
            assignment[nt_index_var(grammar, nt)] = y.get(nt.name, 0)
    if z is not None:
        for letter, value in zip(z.letters, z.values):
            assignment[letter_count_var(grammar, letter)] = value
    return assignment
