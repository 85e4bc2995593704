"""Derivation storage with structure sharing, collapsing, and unfolding.

A stored derivation is a DAG entry: an AND entry records one rule
instantiation and points at one child per body atom (either a database
fact leaf or an entry in a parent node's store); an OR entry merges
several same-root entries into one alternative.  Entries are never
materialized into full trees during reasoning; redundancy and formula
extraction walk the shared structure instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Union

from .graph import EgNode
from .model import Atom, ProbFact, RuleKind, join, substitute


class Label(Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class Leaf:
    """A database fact at the fringe of a derivation, by variable id."""

    var: int


@dataclass(eq=False)
class DerivationEntry:
    root: Atom
    label: Label
    children: tuple["Child", ...]
    home: int  # owning execution-graph node
    has_or: bool = field(init=False)

    def __post_init__(self):
        self.has_or = self.label is Label.OR or any(
            isinstance(c, DerivationEntry) and c.has_or for c in self.children
        )


Child = Union[Leaf, DerivationEntry]


class EntryBudgetError(RuntimeError):
    """Raised when instantiation would exceed the entry allocation budget."""


@dataclass
class NodeStore:
    """Stored (non-redundant) derivations of one execution-graph node."""

    owner: int
    entries: List[DerivationEntry] = field(default_factory=list)
    by_root: Dict[Atom, List[DerivationEntry]] = field(default_factory=dict)

    def add(self, entry: DerivationEntry) -> None:
        self.entries.append(entry)
        self.by_root.setdefault(entry.root, []).append(entry)

    def __len__(self) -> int:
        return len(self.entries)


class FactIndex:
    """Database facts indexed by predicate, in lexicographic atom order."""

    def __init__(self, facts: Iterable[ProbFact]):
        self.var_of: Dict[Atom, int] = {}
        self.by_pred: Dict[object, List[Atom]] = {}
        for f in facts:
            self.var_of[f.fact] = f.var
            self.by_pred.setdefault(f.fact.predicate, []).append(f.fact)
        for atoms in self.by_pred.values():
            atoms.sort(key=Atom.sort_key)


@dataclass
class InstantiationResult:
    by_root: Dict[Atom, List[DerivationEntry]]
    substitutions: int = 0
    allocated: int = 0


def instantiate_node(
    node: EgNode,
    facts: FactIndex,
    stores: Mapping[int, NodeStore],
    budget: Optional[int] = None,
) -> InstantiationResult:
    """Candidate derivations of one node, grouped by root fact.

    For a base-rule node the body joins against the database facts and each
    substitution yields one AND entry with leaf children.  Otherwise the
    i-th body atom joins against the root facts of the i-th parent's store,
    and each substitution yields one AND entry per element of the Cartesian
    product of the parents' matching entry lists.
    """
    rule = node.rule
    out: Dict[Atom, List[DerivationEntry]] = {}
    result = InstantiationResult(out)

    def charge(n: int) -> None:
        result.allocated += n
        if budget is not None and result.allocated > budget:
            raise EntryBudgetError(
                f"entry budget exceeded while instantiating node {node.id}"
            )

    if rule.kind is RuleKind.BASE:
        candidates = [facts.by_pred.get(a.predicate, []) for a in rule.body]
        for subst in join(rule.body, candidates):
            result.substitutions += 1
            root = substitute(rule.head, subst)
            children = tuple(
                Leaf(facts.var_of[substitute(a, subst)]) for a in rule.body
            )
            charge(1)
            out.setdefault(root, []).append(
                DerivationEntry(root, Label.AND, children, node.id)
            )
        return result

    parent_stores = [stores[p] for p in node.parents]
    candidates = [
        sorted(ps.by_root.keys(), key=Atom.sort_key) for ps in parent_stores
    ]
    for subst in join(rule.body, candidates):
        result.substitutions += 1
        root = substitute(rule.head, subst)
        entry_lists = [
            ps.by_root[substitute(a, subst)]
            for a, ps in zip(rule.body, parent_stores)
        ]
        bucket = out.setdefault(root, [])
        for combo in itertools.product(*entry_lists):
            charge(1)
            bucket.append(DerivationEntry(root, Label.AND, combo, node.id))
    return result


# ---------------------------------------------------------------------------
# Redundancy
# ---------------------------------------------------------------------------

def is_redundant(entry: DerivationEntry) -> bool:
    """True iff every unfolding of `entry` repeats its root fact internally.

    Such derivations add nothing to the lineage: the repeated subderivation
    already supplies a subsuming clause.  Computed without materializing
    unfoldings: avoid(x) decides whether some unfolding of subtree x is
    free of the root fact, conjoining over AND children and disjoining
    over OR alternatives, with memoization over the shared DAG.
    """
    target = entry.root
    memo: Dict[int, bool] = {}

    def avoid(x: Child) -> bool:
        if isinstance(x, Leaf):
            return True
        cached = memo.get(id(x))
        if cached is not None:
            return cached
        if x.root == target:
            res = False
        elif x.label is Label.AND:
            res = all(avoid(c) for c in x.children)
        else:
            res = any(avoid(c) for c in x.children)
        memo[id(x)] = res
        return res

    def root_clear(x: DerivationEntry) -> bool:
        # Occurrence of the root fact AT the root is allowed; an OR entry
        # is clear when some alternative is.
        if x.label is Label.AND:
            return all(avoid(c) for c in x.children)
        return any(root_clear(c) for c in x.children)

    return not root_clear(entry)


def _atom_cone(x: Child) -> frozenset[Atom]:
    """Facts occurring anywhere in an entry's DAG (cached per entry)."""
    if isinstance(x, Leaf):
        return frozenset()
    cached = getattr(x, "_cone", None)
    if cached is None:
        cached = frozenset({x.root}).union(*(_atom_cone(c) for c in x.children))
        x._cone = cached
    return cached


def is_hereditarily_redundant(entry: DerivationEntry) -> bool:
    """True iff in every unfolding of `entry` some fact repeats along a
    root-to-leaf path.

    A stored OR entry may carry alternatives whose unfoldings repeat facts
    other than the entry's own root; derivations built on top of those
    alternatives are subsumed (replacing the repeated fact's subtree by its
    inner occurrence yields a smaller derivation with a subsuming clause),
    yet the root-only check never rejects them.  Collapsed reasoning must
    filter by this stronger notion or it keeps deriving such subsumed
    trees forever and loses termination parity with uncollapsed reasoning.
    For entries whose children all come from root-only-filtered plain
    stores the two notions coincide.
    """
    memo: Dict[tuple, bool] = {}

    def ok(x: Child, ancestors: frozenset[Atom]) -> bool:
        if isinstance(x, Leaf):
            return True
        key = (id(x), ancestors & _atom_cone(x))
        cached = memo.get(key)
        if cached is not None:
            return cached
        if x.root in ancestors:
            res = False
        elif x.label is Label.AND:
            below = ancestors | {x.root}
            res = all(ok(c, below) for c in x.children)
        else:
            # OR alternatives share the entry's root; the unfolding keeps
            # exactly one of them, so ancestors are not extended here.
            res = any(ok(c, ancestors) for c in x.children)
        memo[key] = res
        return res

    return not ok(entry, frozenset())


# ---------------------------------------------------------------------------
# Collapse / unfold
# ---------------------------------------------------------------------------

def collapse(trees: Sequence[DerivationEntry]) -> DerivationEntry:
    """Merge several same-root derivations into one OR entry."""
    if len(trees) <= 1:
        raise ValueError("collapse requires more than one derivation")
    root = trees[0].root
    if any(t.root != root for t in trees):
        raise ValueError("collapse requires a common root fact")
    return DerivationEntry(root, Label.OR, tuple(trees), trees[0].home)


def should_collapse(
    trees_by_root: Mapping[Atom, Sequence[DerivationEntry]], threshold: int
) -> bool:
    """Collapse a node's derivations when the average per-root count
    reaches the threshold."""
    if not trees_by_root:
        raise ValueError("empty derivation map")
    total = sum(len(v) for v in trees_by_root.values())
    return total / len(trees_by_root) >= threshold


def unfold(entry: Child) -> Iterator[Child]:
    """Plain-AND derivations encoded by an entry, lazily.

    An entry without OR labels unfolds to itself; an OR entry to the
    concatenation of its children's unfoldings; an AND entry above an OR
    to the Cartesian product of its children's unfoldings, re-rooted under
    the entry's own root fact.
    """
    if isinstance(entry, Leaf) or not entry.has_or:
        yield entry
        return
    if entry.label is Label.OR:
        for child in entry.children:
            yield from unfold(child)
        return
    for combo in itertools.product(*(tuple(unfold(c)) for c in entry.children)):
        yield DerivationEntry(entry.root, Label.AND, combo, entry.home)


def iter_tree_atoms(entry: Child) -> Iterator[Atom]:
    """All fact occurrences at AND/OR positions of a derivation DAG,
    one per path (a shared entry reached twice is reported twice)."""
    if isinstance(entry, Leaf):
        return
    yield entry.root
    for c in entry.children:
        yield from iter_tree_atoms(c)
