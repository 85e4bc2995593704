"""Round-based reasoning loops that populate an execution graph.

Each round extends the graph by one depth level, computes the candidate
derivations of every fresh node, optionally collapses same-root sets, keeps
the non-redundant ones, and removes nodes that stored nothing.  The loop
stops when the graph depth stops growing, i.e. when every fresh node of the
round was removed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional

from .derivations import (
    EntryBudgetError,
    FactIndex,
    NodeStore,
    collapse,
    instantiate_node,
    is_hereditarily_redundant,
    is_redundant,
    should_collapse,
)
from .graph import ExecutionGraph, base_step, inductive_step
from .model import Program


class CollapseMode(Enum):
    OFF = "off"
    ON = "on"
    AUTO = "auto"


@dataclass
class ReasonerOptions:
    collapse: CollapseMode = CollapseMode.OFF
    threshold: int = 10
    max_depth: Optional[int] = None
    max_entries: Optional[int] = None
    # Disabling the redundancy filter turns the loop into the unfiltered
    # variant used to cross-check per-round lineage against the fixpoint
    # reference engine; it never terminates on its own, so pair it with
    # max_depth.
    redundancy_filter: bool = True

    def __post_init__(self):
        if isinstance(self.collapse, str):
            self.collapse = CollapseMode(self.collapse)
        if self.threshold < 2:
            raise ValueError("collapse threshold must be >= 2")
        if not self.redundancy_filter and self.max_depth is None:
            raise ValueError("redundancy_filter=False requires max_depth")


@dataclass
class RoundStats:
    round: int
    nodes_added: int = 0
    nodes_removed: int = 0
    entries_stored: int = 0
    or_entries: int = 0
    entries_allocated: int = 0
    instantiations: int = 0


@dataclass
class ReasonerStats:
    per_round: List[RoundStats] = field(default_factory=list)
    wall_s: float = 0.0

    @property
    def rounds_executed(self) -> int:
        return len(self.per_round)

    def total(self, attr: str) -> int:
        return sum(getattr(r, attr) for r in self.per_round)


@dataclass
class ReasoningResult:
    graph: ExecutionGraph
    stores: Dict[int, NodeStore]
    rounds: int  # final graph depth
    truncated: bool
    stats: ReasonerStats
    # "fixpoint" on natural termination, else the limit that stopped the
    # run: "max_depth" (all requested rounds completed) or "max_entries"
    # (the last round is partial)
    stop_reason: str = "fixpoint"

    def live_store_sizes(self) -> Dict[int, int]:
        return {
            n.id: len(self.stores[n.id])
            for n in self.graph.live_nodes()
            if n.id in self.stores
        }


def _run(prog: Program, opts: ReasonerOptions) -> ReasoningResult:
    if not prog.is_normalized():
        raise ValueError("program must be normalized before reasoning")
    t0 = time.perf_counter()
    facts = FactIndex(prog.facts)
    rules = sorted(prog.rules, key=lambda r: r.id)
    # Collapsed stores can hide derivations that repeat facts below the
    # surface of an OR alternative; the hereditary check is what keeps
    # collapsed reasoning terminating in the same round as plain reasoning.
    redundant = (
        is_redundant
        if opts.collapse is CollapseMode.OFF
        else is_hereditarily_redundant
    )
    g = ExecutionGraph()
    stores: Dict[int, NodeStore] = {}
    stats = ReasonerStats()
    stop_reason = "fixpoint"
    allocated_total = 0
    prev_depth = 0
    k = 0

    while True:
        k += 1
        if k == 1:
            g = base_step(rules)
            new_nodes = list(g.nodes)
        else:
            new_nodes = inductive_step(g, rules, k)
        rs = RoundStats(round=k, nodes_added=len(new_nodes))

        try:
            for v in new_nodes:
                budget = (
                    None
                    if opts.max_entries is None
                    else opts.max_entries - allocated_total
                )
                inst = instantiate_node(v, facts, stores, budget)
                allocated_total += inst.allocated
                rs.entries_allocated += inst.allocated
                rs.instantiations += inst.substitutions

                store = NodeStore(v.id)
                stores[v.id] = store
                collapsing = opts.collapse is CollapseMode.ON or (
                    opts.collapse is CollapseMode.AUTO
                    and inst.by_root
                    and should_collapse(inst.by_root, opts.threshold)
                )
                for root, entries in inst.by_root.items():
                    if collapsing and len(entries) > 1:
                        z = [collapse(entries)]
                        rs.or_entries += 1
                        rs.entries_allocated += 1
                        allocated_total += 1
                    else:
                        z = entries
                    for e in z:
                        if not opts.redundancy_filter or not redundant(e):
                            store.add(e)
                rs.entries_stored += len(store.entries)
                if not store.entries:
                    g.remove_node(v.id)
                    rs.nodes_removed += 1
                if opts.max_entries is not None and allocated_total > opts.max_entries:
                    raise EntryBudgetError("entry budget exceeded")
        except EntryBudgetError:
            stores.pop(v.id, None)
            stop_reason = "max_entries"

        stats.per_round.append(rs)
        if stop_reason != "fixpoint":
            break
        depth = g.depth()
        if depth == prev_depth:
            break
        prev_depth = depth
        if opts.max_depth is not None and k >= opts.max_depth:
            stop_reason = "max_depth"
            break

    stats.wall_s = time.perf_counter() - t0
    return ReasoningResult(
        graph=g,
        stores=stores,
        rounds=g.depth(),
        truncated=stop_reason != "fixpoint",
        stats=stats,
        stop_reason=stop_reason,
    )


def run_pr(prog: Program, opts: Optional[ReasonerOptions] = None) -> ReasoningResult:
    """Reason without collapsing: every non-redundant derivation is stored
    individually."""
    opts = replace(opts, collapse=CollapseMode.OFF) if opts else ReasonerOptions()
    return _run(prog, opts)


def run_pcor(prog: Program, opts: Optional[ReasonerOptions] = None) -> ReasoningResult:
    """Reason with same-root derivations collapsed into OR entries, always
    (`on`) or when a node's average per-root count reaches the threshold
    (`auto`)."""
    if opts is None:
        opts = ReasonerOptions(collapse=CollapseMode.AUTO)
    if opts.collapse is CollapseMode.OFF:
        raise ValueError("run_pcor requires collapse mode 'on' or 'auto'")
    return _run(prog, opts)
