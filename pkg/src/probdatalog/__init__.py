"""Exact probabilistic Datalog reasoning over tuple-independent databases.

The engine materializes derivations inside an execution graph with shared
structure, optionally collapsing same-root derivations, collects DNF
lineage per query answer, and computes exact probabilities by weighted
model counting.  A round-based fixpoint engine over per-atom formulas
serves as an independent reference implementation.
"""

from .derivations import (
    DerivationEntry,
    EntryBudgetError,
    FactIndex,
    Label,
    Leaf,
    NodeStore,
    collapse,
    instantiate_node,
    is_redundant,
    should_collapse,
    unfold,
)
from .graph import EgNode, ExecutionGraph, base_step, inductive_step, k_compatible
from .lineage import (
    FALSE,
    TRUE,
    Answer,
    Dnf,
    IncompleteReasoningError,
    LineageTooLargeError,
    UnknownPredicateError,
    collect_lineage,
    phi,
    round_bound_snapshot,
)
from .model import (
    Atom,
    ProbFact,
    Program,
    Rule,
    RuleKind,
    Symbol,
    SymbolKind,
    atom,
    constant,
    desugar_rule_probability,
    normalize,
    predicate,
    variable,
)
from .parser import ParseError, parse_atom, parse_program, serialize
from .reasoner import (
    CollapseMode,
    ReasonerOptions,
    ReasoningResult,
    run_pcor,
    run_pr,
)
from .tcp import (
    TcpInstance,
    TcpRoundLimitError,
    formulas_equivalent,
    tcp_fixpoint,
    tcp_initial,
    tcp_step,
)
from .wmc import (
    TooManyVariablesError,
    UnweightedVariableError,
    WmcBudgetError,
    brute_force_probability,
    probability,
    truth_table_equal,
)
from .generate import chain_program, powerlaw_program

__version__ = "0.1.0"
