"""Reference fixpoint engine: per-atom lineage formulas computed round by round.

Each round grounds every rule over the atoms derived so far, conjoins the
body formulas of each instantiation, aggregates the results per head atom,
and disjoins them into the atom's formula.  The run reaches its fixpoint in
the round whose formulas are all logically equivalent to the previous
round's.  `delta` mode restricts each round to instantiations that involve
at least one atom updated in the previous round (semi-naive evaluation) and
yields an equivalent fixpoint with fewer rule instantiations.

This engine is deliberately simple; it serves as the correctness oracle for
the graph-based reasoner and is exposed through the CLI for comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List

from .lineage import FALSE, TRUE, Dnf
from .model import Atom, Program, Symbol, join, substitute
from .wmc import probability, truth_table_equal


class TcpRoundLimitError(RuntimeError):
    pass


@dataclass
class TcpInstance:
    """Map from ground atom to its lineage formula after `round` rounds.

    `updated` holds the atoms whose formula changed (as a Boolean function)
    in the most recent round; the fixpoint is reached when it is empty.
    """

    formulas: Dict[Atom, Dnf]
    round: int = 0
    instantiations: int = 0
    updated: frozenset[Atom] = frozenset()


def tcp_initial(prog: Program) -> TcpInstance:
    formulas = {f.fact: Dnf.single(f.var) for f in prog.facts}
    return TcpInstance(formulas, 0, 0, frozenset(formulas))


def _by_predicate(formulas: Dict[Atom, Dnf]) -> Dict[Symbol, List[Atom]]:
    out: Dict[Symbol, List[Atom]] = {}
    for a in formulas:
        out.setdefault(a.predicate, []).append(a)
    for atoms in out.values():
        atoms.sort(key=Atom.sort_key)
    return out


def tcp_step(inst: TcpInstance, prog: Program, mode: str = "naive") -> TcpInstance:
    """One derive/aggregate/update round; returns the next instance."""
    if mode not in ("naive", "delta"):
        raise ValueError(f"unknown mode {mode!r}")
    by_pred = _by_predicate(inst.formulas)
    delta: Dict[Atom, Dnf] = {}
    count = 0

    def derive(body, candidate_lists, rule_head):
        nonlocal count
        for subst in join(body, candidate_lists):
            count += 1
            formula = TRUE
            for a in body:
                formula = formula & inst.formulas[substitute(a, subst)]
            head = substitute(rule_head, subst)
            delta[head] = delta.get(head, FALSE) | formula

    for rule in sorted(prog.rules, key=lambda r: r.id):
        atoms_per_pos = [by_pred.get(a.predicate, []) for a in rule.body]
        if mode == "naive":
            derive(rule.body, atoms_per_pos, rule.head)
        else:
            # Semi-naive split: position j takes updated atoms, earlier
            # positions take only non-updated ones, so every instantiation
            # with at least one updated atom is enumerated exactly once.
            for j in range(len(rule.body)):
                lists = []
                for i, atoms in enumerate(atoms_per_pos):
                    if i < j:
                        lists.append([a for a in atoms if a not in inst.updated])
                    elif i == j:
                        lists.append([a for a in atoms if a in inst.updated])
                    else:
                        lists.append(atoms)
                derive(rule.body, lists, rule.head)

    formulas = dict(inst.formulas)
    changed = set()
    for head, mu in delta.items():
        old = formulas.get(head, FALSE)
        new = old | mu
        # Normalized monotone DNFs are canonical, so logical equivalence
        # reduces to equality here.
        if new != old:
            changed.add(head)
        formulas[head] = new
    return TcpInstance(
        formulas, inst.round + 1, inst.instantiations + count, frozenset(changed)
    )


def tcp_fixpoint(
    prog: Program, mode: str = "naive", max_rounds: int = 64
) -> TcpInstance:
    """Iterate rounds until no formula changes; `round` names the round
    that detected the fixpoint."""
    inst = tcp_initial(prog)
    for _ in range(max_rounds):
        nxt = tcp_step(inst, prog, mode)
        if not nxt.updated:
            return nxt
        inst = nxt
    raise TcpRoundLimitError(f"no fixpoint within {max_rounds} rounds")


def formulas_equivalent(
    a: Dnf,
    b: Dnf,
    max_tt_vars: int = 20,
    trials: int = 8,
    seed: int = 0,
) -> bool:
    """Boolean equivalence of two lineage formulas.

    Equal normal forms short-circuit the check.  Up to `max_tt_vars`
    variables the comparison is an exact truth table; beyond that it falls
    back to probabilistic identity testing (evaluate both formulas at
    `trials` random weight vectors and compare within 1e-9), which is a
    testing-grade shortcut rather than a proof.
    """
    if a == b:
        return True
    variables = sorted(a.variables | b.variables)
    if len(variables) <= max_tt_vars:
        return truth_table_equal(a, b, max_tt_vars)
    rng = random.Random(seed)
    for _ in range(trials):
        weights = {v: rng.uniform(0.05, 0.95) for v in variables}
        if abs(probability(a, weights) - probability(b, weights)) > 1e-9:
            return False
    return True
