"""Brute-force enumeration of derivation trees for small budgets.

This is the independent ground truth behind the test suite: trees are
generated breadth-first by number of rule applications using leftmost
expansion only, so each derivation tree appears exactly once and in a
deterministic order. A dynamic-programming counter provides an independent
cross-check that the enumeration is exhaustive and duplicate-free.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterator

from .grammar import Grammar, Kind, ParikhVector, parikh_of_word
from .presburger import Var
from .reconstruct import (
    EPSILON,
    LETTER,
    OPEN,
    RULE,
    Node,
    TreeFragment,
    yield_word,
)

_INF = float("inf")


def min_completion_apps(grammar: Grammar) -> dict[str, float]:
    """Minimum rule applications to derive a terminal word from each
    nonterminal; unproductive nonterminals map to infinity."""
    best: dict[str, float] = {nt.name: _INF for nt in grammar.nonterminals}
    changed = True
    while changed:
        changed = False
        for rule in grammar.rules:
            cost = 1.0
            for sym in rule.rhs:
                if sym.kind is Kind.NONTERMINAL:
                    cost += best[sym.name]
            if cost < best[rule.lhs.name]:
                best[rule.lhs.name] = cost
                changed = True
    return best


def count_trees(grammar: Grammar, max_rule_apps: int) -> dict[int, int]:
    """Number of complete derivation trees per exact application count,
    computed by dynamic programming (independent of the enumerator)."""

    @lru_cache(maxsize=None)
    def trees(name: str, apps: int) -> int:
        if apps <= 0:
            return 0
        total = 0
        for rule in grammar.rules_with_lhs(name):
            nts = tuple(s.name for s in rule.rhs if s.kind is Kind.NONTERMINAL)
            total += sequences(nts, apps - 1)
        return total

    @lru_cache(maxsize=None)
    def sequences(names: tuple[str, ...], apps: int) -> int:
        if not names:
            return 1 if apps == 0 else 0
        head, tail = names[0], names[1:]
        return sum(trees(head, k) * sequences(tail, apps - k) for k in range(apps + 1))

    result = {n: trees(grammar.start.name, n) for n in range(1, max_rule_apps + 1)}
    trees.cache_clear()
    sequences.cache_clear()
    return result


def _leftmost_open(root: Node) -> Node | None:
    stack = [root]
    while stack:
        node = stack.pop()
        if node.kind == OPEN:
            return node
        stack.extend(reversed(node.children))
    return None


def _clone_with_leftmost_open(root: Node) -> tuple[Node, Node]:
    # Clone a partial tree and return (clone root, clone of its leftmost
    # open leaf); structure sharing is unsafe because expansion mutates.
    copy = Node(root.kind, root.label, root.rule_id)
    found: Node | None = None
    if root.kind == OPEN:
        return copy, copy
    children = []
    for child in root.children:
        child_copy, child_found = _clone_with_leftmost_open(child)
        children.append(child_copy)
        if found is None and child_found is not None:
            found = child_found
    copy.attach(children)
    return copy, found


def enumerate_trees(
    grammar: Grammar, max_rule_apps: int
) -> Iterator[tuple[TreeFragment, tuple[str, ...], dict[int, int]]]:
    """Yield every complete derivation tree using at most `max_rule_apps`
    applications, together with its yield and per-rule application counts.

    Breadth-first by application count, leftmost expansion, no duplicates.
    """
    if max_rule_apps <= 0:
        return
    min_apps = min_completion_apps(grammar)
    start = Node(OPEN, grammar.start.name)
    queue: deque[tuple[Node, int]] = deque([(start, 0)])
    while queue:
        root, apps = queue.popleft()
        leaf = _leftmost_open(root)
        if leaf is None:
            fragment = TreeFragment(root)
            yield fragment, yield_word(fragment), fragment.rule_counts()
            continue
        for rule in grammar.rules_with_lhs(leaf.label):
            clone, clone_leaf = _clone_with_leftmost_open(root)
            expansion = Node(RULE, rule.lhs.name, rule.id)
            if not rule.rhs:
                expansion.attach([Node(EPSILON, "")])
            else:
                expansion.attach(
                    [
                        Node(OPEN, s.name) if s.kind is Kind.NONTERMINAL else Node(LETTER, s.name)
                        for s in rule.rhs
                    ]
                )
            parent = clone_leaf.parent
            if parent is None:
                clone = expansion
            else:
                parent.children[parent.children.index(clone_leaf)] = expansion
                expansion.parent = parent
            new_apps = apps + 1
            remaining = sum(min_apps[n.label] for n in _preorder_opens(clone))
            if new_apps + remaining <= max_rule_apps:
                queue.append((clone, new_apps))


def _preorder_opens(root: Node) -> Iterator[Node]:
    stack = [root]
    while stack:
        node = stack.pop()
        if node.kind == OPEN:
            yield node
        stack.extend(reversed(node.children))


def image_up_to(grammar: Grammar, max_rule_apps: int) -> set[ParikhVector]:
    """Letter-count vectors of all yields within the application budget; a
    subset of the full image, complete for vectors whose minimal derivations
    fit the budget."""
    return {
        parikh_of_word(grammar, word)
        for _, word, _ in enumerate_trees(grammar, max_rule_apps)
    }


def soundness_assignment(grammar: Grammar, tree: TreeFragment) -> dict[Var, int]:
    """The full variable assignment a complete derivation tree induces: rule
    counts, breadth-first first-occurrence indices (unused nonterminals at
    zero), and the yield's letter counts. Satisfies the constructed formula."""
    from .construction import assignment_for
    from .solver import synthesize_y

    x = tree.rule_counts()
    y = synthesize_y(grammar, x)
    if y is None:
        raise ValueError("tree rule counts admit no index assignment; not a derivation tree?")
    z = parikh_of_word(grammar, yield_word(tree))
    return assignment_for(grammar, x=x, y=y, z=z)
