"""Letter-count (Parikh) image of context-free grammars.

Builds an existential linear-arithmetic formula describing exactly the
letter-count vectors of a grammar's language, decides membership of a
given vector by a bounded search that certifies every positive answer
with an actual derivation tree, and exports SMT-LIB2 scripts for exact
external checking.
"""

from .grammar import (
    Grammar,
    GrammarError,
    Kind,
    ParikhVector,
    Rule,
    Symbol,
    grammar_size,
    grammar_to_text,
    lhs_indicator,
    parikh_of_word,
    parse_grammar,
    rhs_count,
)
from .presburger import (
    And,
    Atom,
    EvaluationError,
    Exists,
    LinearTerm,
    Or,
    Var,
    evaluate,
    formula_size,
    free_vars,
    to_smt2,
)
from .construction import (
    build_alpha,
    build_beta,
    build_formula,
    build_gamma,
)
from .reconstruct import (
    Forest,
    ReconstructionError,
    TreeFragment,
    reconstruct,
    serialize_tree,
    validate_tree,
    yield_word,
)
from .solver import (
    MembershipResult,
    Sat,
    UnsatUpTo,
    default_bound,
    enumerate_image,
    solve_membership,
    synthesize_y,
)
from .oracle import enumerate_trees, image_up_to, soundness_assignment

__version__ = "0.1.0"
