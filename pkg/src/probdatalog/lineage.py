"""DNF lineage: canonical clause sets, formula extraction, lineage collection.

The lineage of a derived fact is a monotone DNF over fact variables: a set
of clauses, each clause a set of variable ids.  Clause sets are kept
absorption-normalized (no clause contains another), which for monotone
formulas is a canonical form: two normalized DNFs denote the same Boolean
function exactly when they are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Optional

from .derivations import DerivationEntry, Label, Leaf
from .model import Atom, Program, match_atom

if TYPE_CHECKING:  # pragma: no cover
    from .reasoner import ReasoningResult

Clause = FrozenSet[int]

DEFAULT_CLAUSE_CAP = 1_000_000


class LineageTooLargeError(RuntimeError):
    """Raised when a DNF would exceed the configured clause cap."""


class UnknownPredicateError(ValueError):
    pass


class IncompleteReasoningError(RuntimeError):
    """Raised when lineage is requested from a truncated reasoning result."""


def _absorb(clauses: Iterable[Clause]) -> frozenset[Clause]:
    """Drop every clause that is a superset of another clause."""
    unique = set(clauses)
    if frozenset() in unique:
        return frozenset({frozenset()})
    kept: List[Clause] = []
    occ: Dict[int, List[int]] = {}
    for c in sorted(unique, key=len):
        counts: Dict[int, int] = {}
        subsumed = False
        for v in c:
            for i in occ.get(v, ()):
                hits = counts.get(i, 0) + 1
                if hits == len(kept[i]):
                    subsumed = True
                    break
                counts[i] = hits
            if subsumed:
                break
        if not subsumed:
            idx = len(kept)
            kept.append(c)
            for v in c:
                occ.setdefault(v, []).append(idx)
    return frozenset(kept)


@dataclass(frozen=True)
class Dnf:
    """Absorption-normalized monotone DNF.

    The empty clause set denotes FALSE; a set containing the empty clause
    denotes TRUE.  Build instances through `from_clauses` or the operators,
    which maintain normalization.
    """

    clauses: frozenset[Clause]

    @staticmethod
    def from_clauses(clauses: Iterable[Iterable[int]]) -> "Dnf":
        return Dnf(_absorb(frozenset(c) for c in clauses))

    @staticmethod
    def single(var: int) -> "Dnf":
        return Dnf(frozenset({frozenset({var})}))

    @property
    def is_false(self) -> bool:
        return not self.clauses

    @property
    def is_true(self) -> bool:
        return frozenset() in self.clauses

    @cached_property
    def variables(self) -> frozenset[int]:
        return frozenset(v for c in self.clauses for v in c)

    def or_(self, other: "Dnf", max_clauses: Optional[int] = None) -> "Dnf":
        if self.is_true or other.is_false:
            return self
        if other.is_true or self.is_false:
            return other
        out = Dnf(_absorb(self.clauses | other.clauses))
        if max_clauses is not None and len(out.clauses) > max_clauses:
            raise LineageTooLargeError(
                f"lineage too large ({len(out.clauses)} > {max_clauses} disjuncts)"
            )
        return out

    def and_(self, other: "Dnf", max_clauses: Optional[int] = None) -> "Dnf":
        if self.is_false or other.is_true:
            return self
        if other.is_false or self.is_true:
            return other
        n = len(self.clauses) * len(other.clauses)
        if max_clauses is not None and n > max_clauses:
            raise LineageTooLargeError(
                f"lineage too large ({n} > {max_clauses} disjuncts)"
            )
        return Dnf(_absorb(a | b for a in self.clauses for b in other.clauses))

    def __or__(self, other: "Dnf") -> "Dnf":
        return self.or_(other)

    def __and__(self, other: "Dnf") -> "Dnf":
        return self.and_(other)

    def evaluate(self, true_vars: frozenset[int] | set[int]) -> bool:
        return any(c <= true_vars for c in self.clauses)

    def condition(self, var: int, value: bool) -> "Dnf":
        """Restrict the formula by fixing one (positive) variable."""
        if value:
            return Dnf(
                _absorb(c - {var} if var in c else c for c in self.clauses)
            )
        return Dnf(frozenset(c for c in self.clauses if var not in c))

    def sorted_clauses(self) -> list[tuple[int, ...]]:
        return sorted(tuple(sorted(c)) for c in self.clauses)

    def to_json(self, names: Dict[int, str]) -> list[list[str]]:
        """Clause list of fact-name lists, both levels sorted."""
        return sorted(sorted(names[v] for v in c) for c in self.clauses)

    def __str__(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        return " | ".join(
            "&".join(str(v) for v in c) for c in self.sorted_clauses()
        )


TRUE = Dnf(frozenset({frozenset()}))
FALSE = Dnf(frozenset())


# ---------------------------------------------------------------------------
# Formula extraction from stored derivations
# ---------------------------------------------------------------------------

def phi(
    entry: DerivationEntry | Leaf,
    max_clauses: Optional[int] = DEFAULT_CLAUSE_CAP,
    memo: Optional[Dict[int, Dnf]] = None,
) -> Dnf:
    """DNF of a stored derivation: leaves conjoin along AND entries and the
    alternatives of OR entries disjoin.

    Equals the disjunction, over every unfolded plain tree, of the
    conjunction of that tree's leaves.  Entries form a shared DAG, so
    results are memoized per entry; pass `memo` to share across calls.
    """
    if memo is None:
        memo = {}

    def rec(node) -> Dnf:
        if isinstance(node, Leaf):
            return Dnf.single(node.var)
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if node.label is Label.AND:
            out = TRUE
            for child in node.children:
                out = out.and_(rec(child), max_clauses)
        else:
            out = FALSE
            for child in node.children:
                out = out.or_(rec(child), max_clauses)
        memo[id(node)] = out
        return out

    return rec(entry)


@dataclass(frozen=True)
class Answer:
    fact: Atom
    lineage: Dnf
    probability: Optional[float] = None


def round_bound_snapshot(
    result: "ReasoningResult",
    k: int,
    memo: Optional[Dict[int, Dnf]] = None,
) -> Dict[Atom, Dnf]:
    """Lineage of every derived atom restricted to rounds <= k.

    A node of depth d is populated exactly in round d, so the snapshot is
    the disjunction over stores of nodes no deeper than k.  Probabilities
    of successive snapshots are nondecreasing and reach the exact value at
    the final round.
    """
    if memo is None:
        memo = {}
    out: Dict[Atom, Dnf] = {}
    for node_id, store in result.stores.items():
        if result.graph.node(node_id).depth > k:
            continue
        for root, entries in store.by_root.items():
            acc = out.get(root, FALSE)
            for e in entries:
                acc = acc.or_(phi(e, memo=memo))
            out[root] = acc
    return out


def collect_lineage(
    result: "ReasoningResult",
    prog: Program,
    query: Atom,
    max_clauses: Optional[int] = DEFAULT_CLAUSE_CAP,
) -> List[Answer]:
    """Answers for `query` with their DNF lineage.

    Ground instances of the query predicate present in the computed model
    are enumerated; a database fact contributes its own variable alongside
    any derivations of the same atom.
    """
    if result.truncated:
        raise IncompleteReasoningError(
            "reasoning was truncated by a resource limit; lineage would be partial"
        )
    if query.predicate not in prog.predicates:
        raise UnknownPredicateError(f"unknown predicate {query.predicate.text}")

    fact_var: Dict[Atom, int] = {f.fact: f.var for f in prog.facts}
    instances = {
        a for a in fact_var if match_atom(query, a, {}) is not None
    }
    for store in result.stores.values():
        for root in store.by_root:
            if match_atom(query, root, {}) is not None:
                instances.add(root)

    memo: Dict[int, Dnf] = {}
    answers = []
    for inst in sorted(instances, key=Atom.sort_key):
        dnf = FALSE
        if inst in fact_var:
            dnf = Dnf.single(fact_var[inst])
        for store in result.stores.values():
            for e in store.by_root.get(inst, ()):
                dnf = dnf.or_(phi(e, max_clauses, memo), max_clauses)
        answers.append(Answer(inst, dnf))
    return answers
