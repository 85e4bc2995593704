"""Domain types for probabilistic logic programs.

A program is a set of Datalog rules evaluated over a tuple-independent
probabilistic database: every ground fact is an independent Bernoulli
variable that is true with its annotated probability.  Rules may carry a
probability themselves, which is desugared into an auxiliary nullary fact
appended to the rule body.

Symbols (constants, predicates, variables) are interned process-wide so
that equality and hashing reduce to integer comparisons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence


class SymbolKind(Enum):
    CONSTANT = "constant"
    PREDICATE = "predicate"
    VARIABLE = "variable"


@dataclass(frozen=True)
class Symbol:
    kind: SymbolKind
    id: int
    text: str

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"{self.kind.value[:5]}:{self.text}"


# Intern tables, one per kind.  Same text within a kind always yields the
# same Symbol object, so (kind, id) <-> text is bijective.
_TABLES: dict[SymbolKind, dict[str, Symbol]] = {k: {} for k in SymbolKind}


def intern_symbol(kind: SymbolKind, text: str) -> Symbol:
    table = _TABLES[kind]
    sym = table.get(text)
    if sym is None:
        sym = Symbol(kind, len(table), text)
        table[text] = sym
    return sym


def constant(text: str) -> Symbol:
    return intern_symbol(SymbolKind.CONSTANT, text)


def variable(text: str) -> Symbol:
    return intern_symbol(SymbolKind.VARIABLE, text)


def predicate(text: str) -> Symbol:
    return intern_symbol(SymbolKind.PREDICATE, text)


@dataclass(frozen=True)
class Atom:
    """A predicate applied to constant/variable arguments; nullary allowed."""

    predicate: Symbol
    args: tuple[Symbol, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return all(a.kind is SymbolKind.CONSTANT for a in self.args)

    def sort_key(self) -> tuple:
        return (self.predicate.text,) + tuple(a.text for a in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate.text
        return f"{self.predicate.text}({','.join(a.text for a in self.args)})"

    __repr__ = __str__


def atom(pred: str, *args: str) -> Atom:
    """Convenience constructor: uppercase-initial arguments are variables."""
    return Atom(
        predicate(pred),
        tuple(variable(a) if a[:1].isupper() else constant(a) for a in args),
    )


class RuleKind(Enum):
    BASE = "base"          # body references database predicates only
    NONBASE = "nonbase"    # body references derived predicates only


@dataclass(frozen=True)
class Rule:
    id: int
    head: Atom
    body: tuple[Atom, ...]
    kind: Optional[RuleKind] = None  # assigned by normalize()

    def __str__(self) -> str:
        return f"{self.head} :- {', '.join(str(a) for a in self.body)}"


@dataclass(frozen=True)
class ProbFact:
    """A ground fact with probability in (0, 1] and a unique variable id."""

    fact: Atom
    prob: float
    var: int


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]
    facts: tuple[ProbFact, ...]
    queries: tuple[Atom, ...] = ()

    @cached_property
    def fact_predicates(self) -> frozenset[Symbol]:
        return frozenset(f.fact.predicate for f in self.facts)

    @cached_property
    def head_predicates(self) -> frozenset[Symbol]:
        return frozenset(r.head.predicate for r in self.rules)

    @cached_property
    def predicates(self) -> frozenset[Symbol]:
        preds = set(self.fact_predicates) | set(self.head_predicates)
        for r in self.rules:
            preds.update(a.predicate for a in r.body)
        preds.update(q.predicate for q in self.queries)
        return frozenset(preds)

    @cached_property
    def weights(self) -> dict[int, float]:
        """Fact-variable id -> probability of the fact being true."""
        return {f.var: f.prob for f in self.facts}

    @cached_property
    def var_names(self) -> dict[int, str]:
        return {f.var: str(f.fact) for f in self.facts}

    @cached_property
    def fact_atoms(self) -> frozenset[Atom]:
        return frozenset(f.fact for f in self.facts)

    def is_normalized(self) -> bool:
        if self.fact_predicates & self.head_predicates:
            return False
        return all(r.kind is not None for r in self.rules)


# ---------------------------------------------------------------------------
# Substitutions and joins
# ---------------------------------------------------------------------------

Substitution = dict  # variable Symbol -> constant Symbol


def substitute(a: Atom, subst: Mapping[Symbol, Symbol]) -> Atom:
    if not a.args:
        return a
    return Atom(
        a.predicate,
        tuple(subst.get(t, t) if t.kind is SymbolKind.VARIABLE else t for t in a.args),
    )


def match_atom(
    pattern: Atom, fact: Atom, subst: Mapping[Symbol, Symbol]
) -> Optional[Substitution]:
    """Extend `subst` so that pattern[subst] == fact, or return None."""
    if pattern.predicate is not fact.predicate or pattern.arity != fact.arity:
        return None
    out = dict(subst)
    for t, c in zip(pattern.args, fact.args):
        if t.kind is SymbolKind.VARIABLE:
            bound = out.get(t)
            if bound is None:
                out[t] = c
            elif bound is not c:
                return None
        elif t is not c:
            return None
    return out


def join(
    body: Sequence[Atom], candidates: Sequence[Sequence[Atom]]
) -> Iterator[Substitution]:
    """Enumerate substitutions grounding `body` against per-position facts.

    Substitutions come out in lexicographic order of the chosen candidate
    facts, so iteration is deterministic when the candidate lists are sorted.
    """

    def rec(i: int, subst: Substitution) -> Iterator[Substitution]:
        if i == len(body):
            yield subst
            return
        for fact in candidates[i]:
            ext = match_atom(body[i], fact, subst)
            if ext is not None:
                yield from rec(i + 1, ext)

    yield from rec(0, {})


def check_safety(head: Atom, body: Sequence[Atom]) -> Optional[Symbol]:
    """Return an unsafe head variable (one missing from the body), if any."""
    body_vars = {
        t for a in body for t in a.args if t.kind is SymbolKind.VARIABLE
    }
    for t in head.args:
        if t.kind is SymbolKind.VARIABLE and t not in body_vars:
            return t
    return None


# ---------------------------------------------------------------------------
# Rule-probability desugaring
# ---------------------------------------------------------------------------

def fresh_predicate_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    for i in itertools.count(2):
        cand = f"{base}{i}"
        if cand not in taken:
            return cand
    raise AssertionError("unreachable")


def desugar_rule_probability(
    rule: Rule,
    prob: float,
    *,
    taken_names: Iterable[str] = (),
    aux_index: int = 0,
    var: int = 0,
) -> tuple[Rule, ProbFact]:
    """Turn a probability-annotated rule into a plain rule plus a dummy fact.

    A fresh nullary atom is appended to the rule body and returned as a
    probabilistic fact carrying the rule's probability.  Distinct annotated
    rules must receive distinct auxiliary predicates (pass `taken_names`).
    """
    if not 0.0 < prob <= 1.0:
        raise ValueError(f"rule probability {prob} outside (0,1]")
    name = fresh_predicate_name(f"aux__{aux_index}", taken_names)
    dummy = Atom(predicate(name))
    new_rule = replace(rule, body=rule.body + (dummy,))
    return new_rule, ProbFact(dummy, prob, var)


# ---------------------------------------------------------------------------
# Normalization into base / non-base form
# ---------------------------------------------------------------------------

def normalize(prog: Program) -> Program:
    """Rewrite a program so every rule is base or non-base.

    Post conditions:
      * database predicates (those carrying facts) and derived predicates
        (those in rule heads) are disjoint;
      * base rules reference only database predicates in their bodies,
        non-base rules only derived ones.

    Two rewrites achieve this.  A predicate straddling facts and rule heads
    has its facts moved to a fresh database predicate `p__f`, bridged by a
    base rule `p(...) :- p__f(...)`.  A database predicate `p` occurring in
    a body next to derived predicates is replaced there by a fresh derived
    alias `p__d`, defined by the base rule `p__d(...) :- p(...)`.

    The rewrite is total, deterministic, and idempotent.
    """
    taken = {p.text for p in prog.predicates}
    rules = list(prog.rules)
    facts = list(prog.facts)
    next_rule_id = max((r.id for r in rules), default=-1) + 1

    # Step 1: split predicates that have both facts and defining rules.
    straddling = sorted(
        prog.fact_predicates & prog.head_predicates, key=lambda p: p.text
    )
    for pred in straddling:
        arity = next(f.fact.arity for f in facts if f.fact.predicate is pred)
        src_name = fresh_predicate_name(f"{pred.text}__f", taken)
        taken.add(src_name)
        src = predicate(src_name)
        facts = [
            replace(f, fact=Atom(src, f.fact.args))
            if f.fact.predicate is pred
            else f
            for f in facts
        ]
        head_vars = tuple(variable(f"X{i}") for i in range(arity))
        rules.append(
            Rule(
                next_rule_id,
                Atom(pred, head_vars),
                (Atom(src, head_vars),),
                RuleKind.BASE,
            )
        )
        next_rule_id += 1

    # Step 2: classify bodies; alias database predicates in mixed bodies.
    derived = {r.head.predicate for r in rules}
    aliases: dict[Symbol, Symbol] = {}
    alias_rules: list[Rule] = []

    def alias_for(pred: Symbol, arity: int) -> Symbol:
        nonlocal next_rule_id
        cached = aliases.get(pred)
        if cached is not None:
            return cached
        name = fresh_predicate_name(f"{pred.text}__d", taken)
        taken.add(name)
        alias = predicate(name)
        aliases[pred] = alias
        head_vars = tuple(variable(f"X{i}") for i in range(arity))
        alias_rules.append(
            Rule(
                next_rule_id,
                Atom(alias, head_vars),
                (Atom(pred, head_vars),),
                RuleKind.BASE,
            )
        )
        next_rule_id += 1
        return alias

    out_rules: list[Rule] = []
    for rule in rules:
        in_derived = [a.predicate in derived for a in rule.body]
        if not any(in_derived):
            out_rules.append(replace(rule, kind=RuleKind.BASE))
        elif all(in_derived):
            out_rules.append(replace(rule, kind=RuleKind.NONBASE))
        else:
            body = tuple(
                a
                if a.predicate in derived
                else Atom(alias_for(a.predicate, a.arity), a.args)
                for a in rule.body
            )
            out_rules.append(replace(rule, body=body, kind=RuleKind.NONBASE))

    out = Program(
        tuple(out_rules + alias_rules), tuple(facts), prog.queries
    )
    assert out.is_normalized()
    return out
