"""Bounded membership decision for letter-count vectors.

The search enumerates rule-count candidates satisfying the balance and
letter-count equations (depth-first over rules in id order, with constraint
propagation), synthesizes index variables by reachability, and certifies
every positive answer end to end by reconstructing an actual derivation
tree and checking its yield. A negative answer is only "no solution with
all rule counts up to the bound"; exact external checking is available via
the SMT-LIB2 export.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .grammar import Grammar, GrammarError, Kind, ParikhVector, parikh_of_word
from .reconstruct import (
    ReconstructionError,
    StepHook,
    TreeFragment,
    reconstruct,
    validate_tree,
    yield_word,
)

# Searching at least this deep keeps every derivation tree with that many
# rule applications within reach, whatever the grammar shape; the scaling
# term alone can undershoot for grammars whose smallest trees duplicate
# subtrees (e.g. S -> A A a; A -> B B B; B -> ).
MIN_BOUND = 10


@dataclass(frozen=True)
class Sat:
    """A certified positive answer: the witness tree was rebuilt and checked."""

    x: dict[int, int]
    y: dict[str, int]
    witness: tuple[str, ...]
    tree: TreeFragment = field(repr=False, compare=False)


@dataclass(frozen=True)
class UnsatUpTo:
    """No solution with every rule count at most `bound`; NOT an
    unconditional unsatisfiability claim."""

    bound: int


MembershipResult = Union[Sat, UnsatUpTo]


def default_bound(grammar: Grammar, z: ParikhVector) -> int:
    return max((z.norm_1() + 1) * (len(grammar.nonterminals) + 1), MIN_BOUND)


def _static_reachable(grammar: Grammar) -> set[str]:
    reach = {grammar.start.name}
    stack = [grammar.start.name]
    while stack:
        name = stack.pop()
        for rule in grammar.rules_with_lhs(name):
            for sym in rule.rhs:
                if sym.kind is Kind.NONTERMINAL and sym.name not in reach:
                    reach.add(sym.name)
                    stack.append(sym.name)
    return reach


def synthesize_y(grammar: Grammar, x: Mapping[int, int]) -> dict[str, int] | None:
    """Index assignment compatible with the connectivity constraints, or None.

    A nonterminal is used when it occurs in the body of an applied rule.
    Indices are breadth-first distances (plus one) from the start symbol in
    the graph whose edges follow applied rules; if some used nonterminal is
    unreachable there, no assignment exists.
    """
    for rid, value in x.items():
        if not 0 <= rid < len(grammar.rules):
            raise GrammarError(f"unknown rule id {rid}")
        if value < 0:
            raise GrammarError(f"negative count for rule {rid}")

    used: Counter[str] = Counter()
    for rule in grammar.rules:
        count = x.get(rule.id, 0)
        if count > 0:
            for sym in rule.rhs:
                if sym.kind is Kind.NONTERMINAL:
                    used[sym.name] += count

    start = grammar.start.name
    distance = {start: 0}
    frontier = [start]
    while frontier:
        next_frontier: list[str] = []
        for name in frontier:
            for rule in grammar.rules_with_lhs(name):
                if x.get(rule.id, 0) <= 0:
                    continue
                for sym in rule.rhs:
                    if sym.kind is Kind.NONTERMINAL and sym.name not in distance:
                        distance[sym.name] = distance[name] + 1
                        next_frontier.append(sym.name)
        frontier = next_frontier

    y: dict[str, int] = {}
    for nt in grammar.nonterminals:
        name = nt.name
        if name in distance:
            y[name] = distance[name] + 1
        elif name != start and used[name] > 0:
            return None
        else:
            y[name] = 0
    y[start] = 1
    return y


def _candidates(grammar: Grammar, z: ParikhVector, bound: int) -> Iterator[tuple[int, ...]]:
    """Rule-count tuples in {0..bound}^|P| satisfying all balance and
    letter-count equations, in lexicographic (DFS, rule-id) order.

    Pruning: per-rule upper bounds from remaining letter budgets, interval
    feasibility of each balance equation over the unassigned suffix, and a
    reachability check that abandons branches whose already-used nonterminals
    can no longer be connected to the start symbol.
    """
    rules = grammar.rules
    m = len(rules)
    n_nts = len(grammar.nonterminals)
    n_ts = len(grammar.terminals)
    start_idx = grammar.nt_index[grammar.start.name]
    zvals = list(z.values)
    reachable_heads = _static_reachable(grammar)

    lhs_idx = []
    letter_cf: list[list[tuple[int, int]]] = []
    nt_delta: list[list[tuple[int, int]]] = []
    nt_body: list[list[tuple[int, int]]] = []
    body_nts: list[list[int]] = []
    ub = []
    for rule in rules:
        li = grammar.nt_index[rule.lhs.name]
        lhs_idx.append(li)
        counts = Counter(s.name for s in rule.rhs)
        lc = sorted(
            (grammar.t_index[name], c) for name, c in counts.items() if name in grammar.t_index
        )
        letter_cf.append(lc)
        body = sorted(
            (grammar.nt_index[name], c) for name, c in counts.items() if name in grammar.nt_index
        )
        nt_body.append(body)
        body_nts.append([k for k, _ in body])
        delta = {k: -c for k, c in body}
        delta[li] = delta.get(li, 0) + 1
        nt_delta.append(sorted((k, d) for k, d in delta.items() if d != 0))
        # Rules with a statically unreachable head can never be applied in
        # any solution accepted by the connectivity constraints.
        u = bound if rule.lhs.name in reachable_heads else 0
        for j, c in lc:
            u = min(u, zvals[j] // c)
        ub.append(max(u, 0))

    target = [0] * n_nts
    target[start_idx] = 1

    suf_letter = [[0] * n_ts for _ in range(m + 1)]
    suf_min = [[0] * n_nts for _ in range(m + 1)]
    suf_max = [[0] * n_nts for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        for j in range(n_ts):
            suf_letter[i][j] = suf_letter[i + 1][j]
        for k in range(n_nts):
            suf_min[i][k] = suf_min[i + 1][k]
            suf_max[i][k] = suf_max[i + 1][k]
        for j, c in letter_cf[i]:
            suf_letter[i][j] += c * ub[i]
        for k, d in nt_delta[i]:
            contribution = d * ub[i]
            if contribution < 0:
                suf_min[i][k] += contribution
            else:
                suf_max[i][k] += contribution

    x = [0] * m
    acc = [0] * n_ts
    d_nt = [0] * n_nts
    used = [0] * n_nts

    def connectivity_feasible(depth: int) -> bool:
        # Potentially applicable rules: assigned positive, or unassigned with
        # room. Every nonterminal already used must still be reachable.
        adjacency: dict[int, list[int]] = {}
        for i in range(m):
            active = x[i] > 0 if i < depth else ub[i] > 0
            if active:
                adjacency.setdefault(lhs_idx[i], []).extend(body_nts[i])
        reach = {start_idx}
        stack = [start_idx]
        while stack:
            k = stack.pop()
            for nxt in adjacency.get(k, ()):
                if nxt not in reach:
                    reach.add(nxt)
                    stack.append(nxt)
        return all(used[k] == 0 or k in reach for k in range(n_nts))

    def feasible(depth: int) -> bool:
        for j in range(n_ts):
            if acc[j] > zvals[j] or acc[j] + suf_letter[depth][j] < zvals[j]:
                return False
        for k in range(n_nts):
            need = target[k] - d_nt[k]
            if not suf_min[depth][k] <= need <= suf_max[depth][k]:
                return False
        return connectivity_feasible(depth)

    def dfs(i: int) -> Iterator[tuple[int, ...]]:
        if i == m:
            if d_nt == target and acc == zvals:
                yield tuple(x)
            return
        limit = ub[i]
        for j, c in letter_cf[i]:
            limit = min(limit, (zvals[j] - acc[j]) // c)
        if limit < 0:
            return
        v = 0
        while True:
            x[i] = v
            if feasible(i + 1):
                yield from dfs(i + 1)
            if v == limit:
                break
            v += 1
            for j, c in letter_cf[i]:
                acc[j] += c
            for k, d in nt_delta[i]:
                d_nt[k] += d
            for k, c in nt_body[i]:
                used[k] += c
        for j, c in letter_cf[i]:
            acc[j] -= c * limit
        for k, d in nt_delta[i]:
            d_nt[k] -= d * limit
        for k, c in nt_body[i]:
            used[k] -= c * limit
        x[i] = 0

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 2 * m + 100))
    try:
        yield from dfs(0)
    finally:
        sys.setrecursionlimit(old_limit)


def solve_membership(
    grammar: Grammar,
    z: ParikhVector,
    bound: int | None = None,
    on_step: StepHook | None = None,
) -> MembershipResult:
    """Decide whether `z` is the letter-count vector of some derivable word.

    A Sat answer is unconditionally correct: the returned witness word comes
    from a reconstructed, validated derivation tree. UnsatUpTo(b) is complete
    only relative to the bound b.
    """
    letters = tuple(t.name for t in grammar.terminals)
    if z.letters != letters:
        raise GrammarError(f"vector alphabet {z.letters} does not match grammar terminals {letters}")
    if bound is None:
        bound = default_bound(grammar, z)
    if bound < 1:
        raise GrammarError("bound must be at least 1")

    y_cache: dict[frozenset[int], dict[str, int] | None] = {}
    for candidate in _candidates(grammar, z, bound):
        x = {i: v for i, v in enumerate(candidate)}
        support = frozenset(i for i, v in enumerate(candidate) if v > 0)
        if support in y_cache:
            y = y_cache[support]
        else:
            y = synthesize_y(grammar, x)
            y_cache[support] = y
        if y is None:
            continue
        tree = reconstruct(grammar, x, y, on_step)
        witness = yield_word(tree)
        if parikh_of_word(grammar, witness) != z or not validate_tree(grammar, tree):
            raise ReconstructionError("reconstructed witness does not realize the queried vector")
        return Sat(x=x, y=y, witness=witness, tree=tree)
    return UnsatUpTo(bound)


def enumerate_image(
    grammar: Grammar, max_norm: int, bound: int | None = None
) -> set[ParikhVector]:
    """All vectors with every component at most `max_norm` that are accepted
    by solve_membership (per-vector default bound when `bound` is None)."""
    from itertools import product

    letters = tuple(t.name for t in grammar.terminals)
    image: set[ParikhVector] = set()
    for values in product(range(max_norm + 1), repeat=len(letters)):
        z = ParikhVector(letters, values)
        if isinstance(solve_membership(grammar, z, bound), Sat):
            image.add(z)
    return image
