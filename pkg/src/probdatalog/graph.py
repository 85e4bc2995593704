"""Execution graphs: acyclic rule-labeled digraphs that drive reasoning.

Each node is labeled with a rule.  Base-rule nodes have no parents and
depth 1; a non-base node has exactly one parent per body atom (canonical
form) and an edge `u ->_j v` requires the head predicate of u's rule to
equal the j-th body predicate of v's rule.  Nodes are only ever appended,
and removal is a tombstone so references into a node's store stay valid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Sequence

from .model import Rule, RuleKind


@dataclass(eq=False)
class EgNode:
    id: int
    rule: Rule
    depth: int
    parents: tuple[int, ...] = ()  # one parent node id per body position
    removed: bool = False


@dataclass
class ExecutionGraph:
    nodes: List[EgNode] = field(default_factory=list)

    def node(self, node_id: int) -> EgNode:
        return self.nodes[node_id]

    def live_nodes(self) -> Iterator[EgNode]:
        return (n for n in self.nodes if not n.removed)

    def depth(self) -> int:
        return max((n.depth for n in self.live_nodes()), default=0)

    def add_node(self, rule: Rule, parents: tuple[int, ...]) -> EgNode:
        depth = 1 + max((self.nodes[p].depth for p in parents), default=0)
        node = EgNode(len(self.nodes), rule, depth, parents)
        self.nodes.append(node)
        return node

    def remove_node(self, node_id: int) -> None:
        if not 0 <= node_id < len(self.nodes):
            raise KeyError(f"unknown node id {node_id}")
        node = self.nodes[node_id]
        if node.removed:
            raise KeyError(f"node {node_id} already removed")
        node.removed = True

    def dump(self) -> str:
        """Debug adjacency list: node id, rule id, depth, parents."""
        lines = []
        for n in self.live_nodes():
            parents = ",".join(str(p) for p in n.parents)
            lines.append(f"v{n.id} rule={n.rule.id} depth={n.depth} parents=[{parents}]")
        return "\n".join(lines)


def base_step(rules: Sequence[Rule]) -> ExecutionGraph:
    """Depth-1 graph with one node per base rule and no edges."""
    g = ExecutionGraph()
    for r in rules:
        if r.kind is RuleKind.BASE:
            g.add_node(r, ())
    return g


def k_compatible(
    g: ExecutionGraph, rule: Rule, k: int
) -> List[tuple[int, ...]]:
    """Parent tuples eligible to feed a fresh depth-k node for `rule`.

    Per body position the head predicate must match, every parent must be
    shallower than k, and at least one parent must sit at depth k - 1.
    Tuples come out in lexicographic node-id order.
    """
    per_position: List[List[EgNode]] = []
    for atom in rule.body:
        cands = [
            n
            for n in g.live_nodes()
            if n.depth < k and n.rule.head.predicate is atom.predicate
        ]
        if not cands:
            return []
        per_position.append(cands)
    out = []
    for combo in itertools.product(*per_position):
        if any(n.depth == k - 1 for n in combo):
            out.append(tuple(n.id for n in combo))
    return out


def inductive_step(
    g: ExecutionGraph, rules: Iterable[Rule], k: int
) -> List[EgNode]:
    """Extend the graph to depth k; returns the freshly added nodes.

    A fresh node is added per (non-base rule, k-compatible parent tuple);
    existing nodes and edges are never altered, and tombstoned nodes are
    never re-created since they are excluded from enumeration.
    """
    added = []
    for r in rules:
        if r.kind is not RuleKind.NONBASE:
            continue
        for parents in k_compatible(g, r, k):
            node = g.add_node(r, parents)
            assert node.depth == k
            added.append(node)
    return added
