"""Context-free grammar model, text format, and letter-count vectors.

Grammar file format (UTF-8):

    # comment to end of line
    %start NAME            # optional, must precede all rules
    LHS -> alt1 | alt2 | ...

One rule group per line; tokens are separated by ASCII spaces/tabs. An
empty alternative (nothing between two ``|`` or after ``->``) denotes an
epsilon rule. Blank lines are ignored. A symbol is a nonterminal exactly
when it appears on the left of some rule; everything else occurring in a
right-hand side is a terminal. Without a ``%start`` directive the start
symbol is the left-hand side of the first rule.

Canonical orders, used everywhere downstream for determinism: rules in
file order (their dense ids), nonterminals by first appearance as a rule
head, terminals by first appearance in a right-hand side.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping


class GrammarError(ValueError):
    """Malformed grammar text or a symbol outside the grammar."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            message = f"{where}: {message}"
        super().__init__(message)


class Kind(Enum):
    TERMINAL = "terminal"
    NONTERMINAL = "nonterminal"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: Kind

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Rule:
    """A production with a dense 0-based id; an empty rhs is the epsilon rule."""

    id: int
    lhs: Symbol
    rhs: tuple[Symbol, ...]

    def __str__(self) -> str:
        return f"{self.lhs.name} -> {' '.join(s.name for s in self.rhs)}"


class Grammar:
    """An immutable context-free grammar with precomputed occurrence indexes.

    The indexes (rules grouped by head, right-hand-side occurrence lists per
    symbol) are built once so that consumers touching only the rules relevant
    to a symbol stay linear in the total grammar size.
    """

    def __init__(
        self,
        nonterminals: Iterable[Symbol],
        terminals: Iterable[Symbol],
        rules: Iterable[Rule],
        start: Symbol,
    ):
        self.nonterminals: tuple[Symbol, ...] = tuple(nonterminals)
        self.terminals: tuple[Symbol, ...] = tuple(terminals)
        self.rules: tuple[Rule, ...] = tuple(rules)
        self.start: Symbol = start

        self.nt_index: dict[str, int] = {s.name: i for i, s in enumerate(self.nonterminals)}
        self.t_index: dict[str, int] = {s.name: i for i, s in enumerate(self.terminals)}
        self._symbols: dict[str, Symbol] = {s.name: s for s in self.nonterminals}
        self._symbols.update({s.name: s for s in self.terminals})
        self._validate()

        by_lhs: dict[str, list[Rule]] = {s.name: [] for s in self.nonterminals}
        occ: dict[str, list[tuple[Rule, int]]] = {name: [] for name in self._symbols}
        for rule in self.rules:
            by_lhs[rule.lhs.name].append(rule)
            for name, count in Counter(s.name for s in rule.rhs).items():
                occ[name].append((rule, count))
        self._by_lhs = {k: tuple(v) for k, v in by_lhs.items()}
        self._occ = {k: tuple(v) for k, v in occ.items()}

    def _validate(self) -> None:
        if len(self.nt_index) != len(self.nonterminals) or len(self.t_index) != len(self.terminals):
            raise GrammarError("duplicate symbol declaration")
        overlap = set(self.nt_index) & set(self.t_index)
        if overlap:
            raise GrammarError(f"symbols are both terminal and nonterminal: {sorted(overlap)}")
        if self.start.name not in self.nt_index:
            raise GrammarError(f"start symbol {self.start.name!r} is not a nonterminal")
        for i, rule in enumerate(self.rules):
            if rule.id != i:
                raise GrammarError(f"rule ids must be dense, got {rule.id} at position {i}")
            if rule.lhs.kind is not Kind.NONTERMINAL or rule.lhs.name not in self.nt_index:
                raise GrammarError(f"rule {i} head {rule.lhs.name!r} is not a nonterminal")
            for sym in rule.rhs:
                if sym.name not in self._symbols:
                    raise GrammarError(f"rule {i} uses unknown symbol {sym.name!r}")

    def symbol(self, name: str) -> Symbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise GrammarError(f"unknown symbol {name!r}") from None

    def is_nonterminal(self, name: str) -> bool:
        return name in self.nt_index

    def is_terminal(self, name: str) -> bool:
        return name in self.t_index

    def rules_with_lhs(self, name: str) -> tuple[Rule, ...]:
        """Rules whose head is `name`, in id order."""
        return self._by_lhs.get(name, ())

    def rhs_occurrences(self, name: str) -> tuple[tuple[Rule, int], ...]:
        """Pairs (rule, multiplicity) for rules whose body mentions `name`, in id order."""
        return self._occ.get(name, ())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            self.nonterminals == other.nonterminals
            and self.terminals == other.terminals
            and self.rules == other.rules
            and self.start == other.start
        )

    def __repr__(self) -> str:
        return (
            f"Grammar(|N|={len(self.nonterminals)}, |T|={len(self.terminals)}, "
            f"|P|={len(self.rules)}, start={self.start.name!r})"
        )


@dataclass(frozen=True)
class ParikhVector:
    """Per-letter occurrence counts over a grammar's full terminal alphabet.

    `letters` is always the grammar's canonical terminal order, so equal
    vectors compare and hash equal and serialize identically.
    """

    letters: tuple[str, ...]
    values: tuple[int, ...]

    @classmethod
    def of(cls, grammar: Grammar, counts: Mapping[str, int] | None = None) -> "ParikhVector":
        counts = dict(counts or {})
        letters = tuple(t.name for t in grammar.terminals)
        for name, value in counts.items():
            if name not in grammar.t_index:
                raise GrammarError(f"unknown terminal {name!r} in count vector")
            if value < 0:
                raise GrammarError(f"negative count for terminal {name!r}")
        return cls(letters, tuple(counts.get(name, 0) for name in letters))

    def count(self, letter: str) -> int:
        try:
            return self.values[self.letters.index(letter)]
        except ValueError:
            raise GrammarError(f"unknown terminal {letter!r}") from None

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.letters, self.values))

    def norm_1(self) -> int:
        return sum(self.values)

    def norm_inf(self) -> int:
        return max(self.values, default=0)

    def __add__(self, other: "ParikhVector") -> "ParikhVector":
        if self.letters != other.letters:
            raise GrammarError("cannot add count vectors over different alphabets")
        return ParikhVector(self.letters, tuple(a + b for a, b in zip(self.values, other.values)))

    def to_text(self) -> str:
        return ",".join(f"{a}={v}" for a, v in zip(self.letters, self.values))


def parikh_of_word(grammar: Grammar, word: Iterable[Symbol | str]) -> ParikhVector:
    """Count per-letter occurrences of `word`; additive under concatenation."""
    counts: dict[str, int] = {}
    for sym in word:
        name = sym.name if isinstance(sym, Symbol) else sym
        if name not in grammar.t_index:
            raise GrammarError(f"unknown terminal {name!r} in word")
        counts[name] = counts.get(name, 0) + 1
    return ParikhVector.of(grammar, counts)


def lhs_indicator(rule: Rule, symbol: Symbol | str) -> int:
    """1 if `symbol` is the rule's head, else 0."""
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    return 1 if rule.lhs.name == name else 0


def rhs_count(rule: Rule, symbol: Symbol | str) -> int:
    """Number of occurrences of `symbol` in the rule's body."""
    name = symbol.name if isinstance(symbol, Symbol) else symbol
    return sum(1 for s in rule.rhs if s.name == name)


def grammar_size(grammar: Grammar) -> int:
    """|N| + |T| + sum over rules of (1 + body length)."""
    return (
        len(grammar.nonterminals)
        + len(grammar.terminals)
        + sum(1 + len(r.rhs) for r in grammar.rules)
    )


_RESERVED = ("->", "|", "#")


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _check_symbol(token: str, lineno: int, column: int) -> None:
    for bad in _RESERVED:
        if bad in token:
            raise GrammarError(
                f"reserved token {bad!r} may not appear in symbol {token!r}", lineno, column
            )


def parse_grammar(text: str) -> Grammar:
    """Parse grammar text into a validated Grammar.

    Raises GrammarError with line/column information on syntax errors, on a
    ``%start`` directive that names a symbol with no rules, and on duplicate
    directives.
    """
    start_name: str | None = None
    start_line = 0
    raw_rules: list[tuple[str, tuple[str, ...]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        head, head_col = toks[0]

        if head == "%start":
            if raw_rules:
                raise GrammarError("%start must precede all rules", lineno, head_col)
            if start_name is not None:
                raise GrammarError("duplicate %start directive", lineno, head_col)
            if len(toks) != 2:
                raise GrammarError("expected exactly one name after %start", lineno, head_col)
            name, col = toks[1]
            _check_symbol(name, lineno, col)
            start_name, start_line = name, lineno
            continue

        _check_symbol(head, lineno, head_col)
        if len(toks) < 2 or toks[1][0] != "->":
            col = toks[1][1] if len(toks) > 1 else head_col + len(head)
            raise GrammarError("expected '->' after rule head", lineno, col)

        alt: list[str] = []
        for token, col in toks[2:]:
            if token == "|":
                raw_rules.append((head, tuple(alt)))
                alt = []
            else:
                _check_symbol(token, lineno, col)
                alt.append(token)
        raw_rules.append((head, tuple(alt)))

    if not raw_rules:
        raise GrammarError("grammar has no rules")

    nt_names: list[str] = []
    for lhs, _ in raw_rules:
        if lhs not in nt_names:
            nt_names.append(lhs)
    nt_set = set(nt_names)

    t_names: list[str] = []
    seen_terminals: set[str] = set()
    for _, rhs in raw_rules:
        for name in rhs:
            if name not in nt_set and name not in seen_terminals:
                seen_terminals.add(name)
                t_names.append(name)

    nonterminals = {name: Symbol(name, Kind.NONTERMINAL) for name in nt_names}
    terminals = {name: Symbol(name, Kind.TERMINAL) for name in t_names}
    symbols = {**nonterminals, **terminals}

    rules = [
        Rule(i, nonterminals[lhs], tuple(symbols[name] for name in rhs))
        for i, (lhs, rhs) in enumerate(raw_rules)
    ]

    if start_name is None:
        start_name = raw_rules[0][0]
    elif start_name not in nt_set:
        raise GrammarError(f"%start names {start_name!r}, which has no rules", start_line)

    return Grammar(nonterminals.values(), terminals.values(), rules, nonterminals[start_name])


def grammar_to_text(grammar: Grammar) -> str:
    """Serialize so that re-parsing yields a structurally identical grammar."""
    lines = [f"%start {grammar.start.name}"]
    lines.extend(str(rule) for rule in grammar.rules)
    return "\n".join(lines) + "\n"
