"""Derivation-tree fragments and the forest surgeries that assemble them.

Given rule counts x and indices y satisfying the balance and connectivity
constraints, reconstruction seeds one one-level tree per rule application,
greedily merges open nonterminal leaves with matching roots, and removes
the remaining cycle fragments (root label equals the label of their single
open leaf) by splicing them into other fragments or re-rooting them at a
node whose index is one smaller. The end result is a complete derivation
tree whose yield realizes exactly the letter counts implied by x.

Throughout, the forest keeps three conserved quantities: per-label root
counts match open-leaf counts (with a surplus of one root at the start
symbol), per-rule node counts match x, and per-letter leaf counts are
constant.
"""

from __future__ import annotations

from typing import Callable, Iterator, Mapping

from .grammar import Grammar, GrammarError, Kind, Rule
from .presburger import evaluate

# Node kinds.
RULE = "rule"
LETTER = "letter"
EPSILON = "eps"
OPEN = "open"
HOLE = "hole"


class ReconstructionError(RuntimeError):
    """Inputs violating the balance/connectivity preconditions, or an
    internal invariant breach (an algorithm bug)."""


class Node:
    __slots__ = ("kind", "label", "rule_id", "children", "parent")

    def __init__(self, kind: str, label: str, rule_id: int | None = None):
        self.kind = kind
        self.label = label
        self.rule_id = rule_id
        self.children: list[Node] = []
        self.parent: Node | None = None

    def attach(self, children: list["Node"]) -> "Node":
        self.children = children
        for child in children:
            child.parent = self
        return self

    def __repr__(self) -> str:
        return f"Node({self.kind}, {self.label!r})"


def _preorder(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children))


def _clone(node: Node) -> Node:
    copy = Node(node.kind, node.label, node.rule_id)
    copy.attach([_clone(child) for child in node.children])
    return copy


def _one_level(grammar: Grammar, rule: Rule) -> Node:
    root = Node(RULE, rule.lhs.name, rule.id)
    if not rule.rhs:
        return root.attach([Node(EPSILON, "")])
    children = [
        Node(OPEN, sym.name) if sym.kind is Kind.NONTERMINAL else Node(LETTER, sym.name)
        for sym in rule.rhs
    ]
    return root.attach(children)


class TreeFragment:
    """An ordered rule-labeled tree; open leaves are unexpanded nonterminals."""

    __slots__ = ("root",)

    def __init__(self, root: Node):
        self.root = root
        root.parent = None

    @property
    def root_label(self) -> str:
        return self.root.label

    def open_leaves(self) -> list[Node]:
        return [n for n in _preorder(self.root) if n.kind == OPEN]

    def is_cycle_fragment(self) -> bool:
        opens = self.open_leaves()
        return len(opens) == 1 and opens[0].label == self.root_label

    def rule_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for node in _preorder(self.root):
            if node.kind == RULE:
                counts[node.rule_id] = counts.get(node.rule_id, 0) + 1
        return counts

    def terminal_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for node in _preorder(self.root):
            if node.kind == LETTER:
                counts[node.label] = counts.get(node.label, 0) + 1
        return counts

    def nodes(self) -> Iterator[Node]:
        return _preorder(self.root)

    def contains(self, node: Node) -> bool:
        current: Node | None = node
        while current is not None:
            if current is self.root:
                return True
            current = current.parent
        return False

    def clone(self) -> "TreeFragment":
        return TreeFragment(_clone(self.root))

    def __repr__(self) -> str:
        return f"TreeFragment({serialize_tree(self)})"


class Context:
    """A fragment with one distinguished hole where a subtree was cut out."""

    __slots__ = ("root", "hole")

    def __init__(self, root: Node, hole: Node):
        self.root = root
        self.hole = hole

    @property
    def hole_label(self) -> str:
        return self.hole.label


class Forest:
    """A list of fragments plus the derived root/open/leaf statistics."""

    def __init__(self, grammar: Grammar, fragments: list[TreeFragment]):
        self.grammar = grammar
        self.fragments = fragments

    def root_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for fragment in self.fragments:
            label = fragment.root_label
            counts[label] = counts.get(label, 0) + 1
        return counts

    def open_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for fragment in self.fragments:
            for leaf in fragment.open_leaves():
                counts[leaf.label] = counts.get(leaf.label, 0) + 1
        return counts

    def rule_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for fragment in self.fragments:
            for rid, n in fragment.rule_counts().items():
                counts[rid] = counts.get(rid, 0) + n
        return counts

    def terminal_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for fragment in self.fragments:
            for name, n in fragment.terminal_counts().items():
                counts[name] = counts.get(name, 0) + n
        return counts

    def balanced(self) -> bool:
        """Root counts equal open counts per label, plus one root at start."""
        roots = self.root_counts()
        opens = self.open_counts()
        start = self.grammar.start.name
        for nt in self.grammar.nonterminals:
            surplus = 1 if nt.name == start else 0
            if roots.get(nt.name, 0) != opens.get(nt.name, 0) + surplus:
                return False
        return True

    def __repr__(self) -> str:
        return f"Forest({len(self.fragments)} fragments)"


StepHook = Callable[[str, Forest], None]


def seed_forest(grammar: Grammar, x: Mapping[int, int]) -> Forest:
    """One one-level fragment per rule application, in rule-id order."""
    fragments: list[TreeFragment] = []
    for rule in grammar.rules:
        count = x.get(rule.id, 0)
        if count < 0:
            raise GrammarError(f"negative count for rule {rule.id}")
        for _ in range(count):
            fragments.append(TreeFragment(_one_level(grammar, rule)))
    for rid in x:
        if not 0 <= rid < len(grammar.rules):
            raise GrammarError(f"unknown rule id {rid}")
    return Forest(grammar, fragments)


def _replace(fragment: TreeFragment, old: Node, new: Node) -> None:
    parent = old.parent
    if parent is None:
        fragment.root = new
        new.parent = None
    else:
        parent.children[parent.children.index(old)] = new
        new.parent = parent
    old.parent = None


def merge_all(forest: Forest, on_step: StepHook | None = None) -> Forest:
    """Graft fragments onto matching open leaves until no pair is left.

    Policy: take the smallest-index fragment having some closable open leaf,
    close its leftmost closable leaf, grafting the smallest-index other
    fragment with the matching root. On exit (for a balanced nonempty
    forest): exactly one fragment rooted at the start symbol with no open
    leaves, plus zero or more cycle fragments.
    """
    fragments = forest.fragments
    if fragments and not forest.balanced():
        raise ReconstructionError("forest root/open counts are unbalanced; rule counts violate flow balance")

    while True:
        merged = False
        for i, holder in enumerate(fragments):
            for leaf in holder.open_leaves():
                donor_index = next(
                    (j for j, f in enumerate(fragments) if j != i and f.root_label == leaf.label),
                    None,
                )
                if donor_index is None:
                    continue
                donor = fragments.pop(donor_index)
                _replace(holder, leaf, donor.root)
                merged = True
                if on_step is not None:
                    on_step("merge", forest)
                break
            if merged:
                break
        if not merged:
            break

    if fragments:
        complete = [f for f in fragments if not f.open_leaves()]
        start = forest.grammar.start.name
        ok = (
            len(complete) == 1
            and complete[0].root_label == start
            and all(f.is_cycle_fragment() for f in fragments if f is not complete[0])
        )
        if not ok:
            raise ReconstructionError("merge left an ill-shaped forest; rule counts violate flow balance")
    return forest


def factorize_at(fragment: TreeFragment, node: Node) -> tuple[Context, TreeFragment]:
    """Split `fragment` at `node`: the context keeps a hole where the subtree
    rooted at `node` was; plugging the subtree back reproduces the fragment."""
    if node.kind not in (RULE, OPEN):
        raise ValueError("factorization point must carry a nonterminal label")
    if not fragment.contains(node):
        raise ValueError("node is not part of the fragment")
    hole = Node(HOLE, node.label)
    root = fragment.root
    if node is root:
        return Context(hole, hole), TreeFragment(node)
    _replace(fragment, node, hole)
    return Context(root, hole), TreeFragment(node)


def plug(context: Context, fragment: TreeFragment) -> TreeFragment:
    """Fill the context's hole with a fragment carrying the same root label."""
    if fragment.root_label != context.hole_label:
        raise ValueError(
            f"cannot plug root {fragment.root_label!r} into hole {context.hole_label!r}"
        )
    if context.root is context.hole:
        return TreeFragment(fragment.root)
    parent = context.hole.parent
    parent.children[parent.children.index(context.hole)] = fragment.root
    fragment.root.parent = parent
    return TreeFragment(context.root)


def _as_open_fragment(context: Context) -> TreeFragment:
    # The hole becomes an ordinary open leaf; used when a whole context is
    # grafted somewhere and its hole turns into the new open end.
    context.hole.kind = OPEN
    return TreeFragment(context.root)


def _cycle_leaf(fragment: TreeFragment) -> Node:
    opens = fragment.open_leaves()
    if len(opens) != 1 or opens[0].label != fragment.root_label:
        raise ValueError("not a cycle fragment (need exactly one open leaf matching the root)")
    return opens[0]


def splice(host: TreeFragment, cycle: TreeFragment) -> TreeFragment:
    """Insert a cycle fragment at the first (preorder) matching node of `host`.

    The host is cut at that node, the cycle takes its place, and the cut
    subtree fills the cycle's open leaf. Joins two fragments into one.
    """
    label = cycle.root_label
    leaf = _cycle_leaf(cycle)
    site = next(
        (n for n in host.nodes() if n.label == label and n.kind in (RULE, OPEN)),
        None,
    )
    if site is None:
        raise ValueError(f"host has no node labeled {label!r}")
    context, subtree = factorize_at(host, site)
    combined = plug(context, cycle)
    _replace(combined, leaf, subtree.root)
    return TreeFragment(combined.root)


def _path_to_open(fragment: TreeFragment) -> list[Node]:
    leaf = _cycle_leaf(fragment)
    path = []
    current: Node | None = leaf
    while current is not None:
        path.append(current)
        current = current.parent
    path.reverse()
    return path


def rotate(fragment: TreeFragment, node: Node) -> TreeFragment:
    """Re-root a cycle fragment at a node on its root-to-open-leaf path.

    The piece above the node swings below: it is grafted into the open leaf,
    its cut point becoming the new open leaf. The result is a cycle fragment
    rooted at the node's label.
    """
    path = _path_to_open(fragment)
    if node not in path:
        raise ValueError("rotation point must lie on the root-to-open-leaf path")
    leaf = path[-1]
    new_root_label = node.label
    context, subtree = factorize_at(fragment, node)
    upper = _as_open_fragment(context)
    if leaf is subtree.root:
        # Degenerate cut at the open leaf itself: the upper part is the whole
        # tree with its open leaf refreshed.
        result = upper
    else:
        _replace(subtree, leaf, upper.root)
        result = TreeFragment(subtree.root)
    if not (result.root_label == new_root_label and result.is_cycle_fragment()):
        raise ReconstructionError("rotation produced an ill-shaped fragment")
    return result


def reroute(fragment: TreeFragment, node: Node) -> TreeFragment:
    """Re-root a cycle fragment at a node off the root-to-open-leaf path.

    The node's rule must mention the fragment's root label, so its subtree
    has a child with that label. That child subtree is cut out; the remainder
    of the node's subtree becomes the new root, the old tree (minus the
    node's subtree) fills its cut, and the child subtree fills the old open
    leaf. The cut point of the old tree becomes the new open leaf.
    """
    label = fragment.root_label
    path = _path_to_open(fragment)
    if node in path:
        raise ValueError("reroute point must lie off the root-to-open-leaf path")
    if node.kind != RULE:
        raise ValueError("reroute point must be an expanded rule node")
    if not fragment.contains(node):
        raise ValueError("node is not part of the fragment")
    if all(child.label != label for child in node.children):
        raise ValueError(f"rule at reroute point does not mention {label!r}")
    leaf = path[-1]

    context, subtree = factorize_at(fragment, node)
    pivot = next(child for child in subtree.root.children if child.label == label)
    inner_context, carried = factorize_at(subtree, pivot)
    upper = _as_open_fragment(context)
    combined = plug(inner_context, upper)
    _replace(combined, leaf, carried.root)
    result = TreeFragment(combined.root)
    if not (result.root_label == node.label and result.is_cycle_fragment()):
        raise ReconstructionError("reroute produced an ill-shaped fragment")
    return result


def _find_rewrite_node(
    grammar: Grammar, fragment: TreeFragment, y: Mapping[str, int]
) -> tuple[Node, bool]:
    """Locate a node applying a rule that mentions the fragment's root label
    with index exactly one smaller. Guaranteed to exist by the connectivity
    constraints; on-path nodes are preferred since rotation is cheaper."""
    label = fragment.root_label
    target = y[label] - 1
    path = _path_to_open(fragment)
    path_set = set(path)

    def is_witness(node: Node) -> bool:
        if node.kind != RULE or y.get(node.label, 0) != target:
            return False
        return any(child.label == label for child in node.children)

    for node in path:
        if is_witness(node):
            return node, True
    for node in fragment.nodes():
        if node not in path_set and is_witness(node):
            return node, False
    raise ReconstructionError(
        f"no index-decreasing rewrite node for {label!r}; connectivity constraints violated"
    )


def reconstruct(
    grammar: Grammar,
    x: Mapping[int, int],
    y: Mapping[str, int],
    on_step: StepHook | None = None,
) -> TreeFragment:
    """Build a complete derivation tree realizing the rule counts `x`.

    Requires (x, y) to satisfy the balance and connectivity constraints
    (checked up front). Cycle fragments are processed in increasing order of
    their root index, spliced into another fragment when their root label
    occurs elsewhere, and otherwise rotated/rerouted at an index-decreasing
    node, re-merging after every step.
    """
    from .construction import alpha_beta_body, assignment_for

    assignment = assignment_for(grammar, x=x, y=y)
    if not evaluate(alpha_beta_body(grammar), assignment):
        raise ReconstructionError(
            "rule counts and indices violate the balance/connectivity constraints"
        )

    forest = seed_forest(grammar, x)
    merge_all(forest, on_step)
    fragments = forest.fragments

    while True:
        cycles = [f for f in fragments if f.open_leaves()]
        if not cycles:
            break
        fragment = min(
            cycles, key=lambda f: (y[f.root_label], grammar.nt_index[f.root_label])
        )
        label = fragment.root_label
        position = fragments.index(fragment)

        host_index = next(
            (
                i
                for i, candidate in enumerate(fragments)
                if candidate is not fragment
                and any(n.label == label and n.kind in (RULE, OPEN) for n in candidate.nodes())
            ),
            None,
        )
        if host_index is not None:
            fragments[host_index] = splice(fragments[host_index], fragment)
            fragments.pop(position)
            if on_step is not None:
                on_step("splice", forest)
        else:
            node, on_path = _find_rewrite_node(grammar, fragment, y)
            rewritten = rotate(fragment, node) if on_path else reroute(fragment, node)
            fragments[position] = rewritten
            if on_step is not None:
                on_step("rotate" if on_path else "reroute", forest)
        merge_all(forest, on_step)

    if len(fragments) != 1 or fragments[0].root_label != grammar.start.name:
        raise ReconstructionError("reconstruction did not converge to a single start-rooted tree")
    return fragments[0]


def yield_word(fragment: TreeFragment) -> tuple[str, ...]:
    """Left-to-right terminal leaves; epsilon leaves contribute nothing."""
    word: list[str] = []
    for node in fragment.nodes():
        if node.kind == LETTER:
            word.append(node.label)
        elif node.kind in (OPEN, HOLE):
            raise ValueError("fragment still has open leaves")
    return tuple(word)


def validate_tree(grammar: Grammar, fragment: TreeFragment) -> bool:
    """True iff the fragment is a complete derivation tree of the grammar."""
    if fragment.root_label != grammar.start.name:
        return False
    for node in fragment.nodes():
        if node.kind in (OPEN, HOLE):
            return False
        if node.kind == LETTER:
            if not grammar.is_terminal(node.label) or node.children:
                return False
        elif node.kind == EPSILON:
            if node.children:
                return False
        elif node.kind == RULE:
            if node.rule_id is None or not 0 <= node.rule_id < len(grammar.rules):
                return False
            rule = grammar.rules[node.rule_id]
            if rule.lhs.name != node.label:
                return False
            if not rule.rhs:
                if len(node.children) != 1 or node.children[0].kind != EPSILON:
                    return False
            else:
                if len(node.children) != len(rule.rhs):
                    return False
                for child, sym in zip(node.children, rule.rhs):
                    if child.label != sym.name:
                        return False
                    expected = LETTER if sym.kind is Kind.TERMINAL else RULE
                    if child.kind != expected:
                        return False
        else:
            return False
    return True


def serialize_tree(fragment: TreeFragment) -> str:
    """Bracketed text form: ``X[id](child child ...)``, terminal leaves bare,
    epsilon leaves as ``()``, open leaves suffixed with ``?``."""

    def render(node: Node) -> str:
        if node.kind == RULE:
            return f"{node.label}[{node.rule_id}](" + " ".join(map(render, node.children)) + ")"
        if node.kind == LETTER:
            return node.label
        if node.kind == EPSILON:
            return "()"
        if node.kind == OPEN:
            return node.label + "?"
        return f"<hole {node.label}>"

    return render(fragment.root)
