"""Shared test utilities: random grammars, the acceptance corpus, and
brute-force reference implementations."""

from __future__ import annotations

import random
from itertools import product

from parikh.construction import assignment_for, build_beta
from parikh.grammar import Grammar, parse_grammar
from parikh.oracle import count_trees
from parikh.presburger import conj, evaluate

NT_POOL = ["S", "A", "B", "C"]
T_POOL = ["a", "b", "c"]


def random_grammar(
    rng: random.Random,
    max_nts: int = 4,
    max_rules: int = 8,
    max_rhs: int = 3,
    max_terminals: int = 3,
) -> Grammar:
    """A random grammar within the corpus bounds. The first rule's head is S,
    and right-hand sides only use symbols that actually have rules, so the
    parsed classification matches the intended one."""
    nts = NT_POOL[: rng.randint(1, max_nts)]
    ts = T_POOL[: rng.randint(1, max_terminals)]
    n_rules = rng.randint(1, max_rules)
    heads = ["S"] + [rng.choice(nts) for _ in range(n_rules - 1)]
    active = [n for n in nts if n in set(heads)]
    lines = []
    for head in heads:
        rhs = []
        for _ in range(rng.randint(0, max_rhs)):
            rhs.append(rng.choice(ts) if rng.random() < 0.5 else rng.choice(active))
        lines.append(f"{head} -> {' '.join(rhs)}")
    return parse_grammar("\n".join(lines))


def make_corpus(
    count: int = 100,
    seed: int = 20240811,
    budget: int = 10,
    max_trees: int = 800,
) -> list[Grammar]:
    """Random grammars admitting between 1 and `max_trees` derivation trees
    within the enumeration budget (keeps the brute-force side desk-scale)."""
    rng = random.Random(seed)
    corpus: list[Grammar] = []
    while len(corpus) < count:
        grammar = random_grammar(rng)
        if not grammar.terminals:
            continue
        total = sum(count_trees(grammar, budget).values())
        if 1 <= total <= max_trees:
            corpus.append(grammar)
    return corpus


def brute_force_y(grammar: Grammar, x: dict[int, int]) -> dict[str, int] | None:
    """Exhaustive search for an index assignment satisfying all connectivity
    constraints, over values 0..|N| per nonterminal (chains from y_S = 1 never
    need more). Independent of the reachability-based synthesis."""
    names = [nt.name for nt in grammar.nonterminals]
    beta = conj([build_beta(grammar, name) for name in names])
    for combo in product(range(len(names) + 1), repeat=len(names)):
        y = dict(zip(names, combo))
        if evaluate(beta, assignment_for(grammar, x=x, y=y)):
            return y
    return None


def grammar_of_size(rng: random.Random, target: int) -> Grammar:
    """A random grammar with grammar_size close to `target`. The local rule
    shape (body length, terminal/nonterminal mix) is size-independent so
    size-to-formula ratios stay comparable across scales."""
    n_nts = max(2, target // 12)
    nts = [f"N{i}" for i in range(n_nts)]
    ts = ["a", "b", "c"]

    def rhs() -> str:
        parts = []
        for _ in range(rng.randint(0, 3)):
            parts.append(rng.choice(ts) if rng.random() < 0.5 else rng.choice(nts))
        return " ".join(parts)

    lines = [f"{nt} -> {rhs()}" for nt in nts]
    size = n_nts + 3 + sum(1 + len(line.split()) - 2 for line in lines)
    while size < target:
        head = rng.choice(nts)
        body = rhs()
        lines.append(f"{head} -> {body}")
        size += 1 + (len(body.split()) if body else 0)
    return parse_grammar("\n".join(lines))
