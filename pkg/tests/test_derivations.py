import random

import pytest

from conftest import collapse_example
from probdatalog import (
    CollapseMode,
    ReasonerOptions,
    base_step,
    collapse,
    inductive_step,
    instantiate_node,
    is_redundant,
    normalize,
    parse_atom,
    parse_program,
    run_pcor,
    run_pr,
    should_collapse,
    unfold,
)
from probdatalog.derivations import (
    DerivationEntry,
    FactIndex,
    Label,
    Leaf,
    NodeStore,
    is_hereditarily_redundant,
)
from probdatalog.model import atom


def run_rounds(prog, depth, filter_redundant=True):
    """Drive instantiate_node round by round, mirroring the plain loop."""
    g = base_step(prog.rules)
    facts = FactIndex(prog.facts)
    stores = {}
    for k in range(1, depth + 1):
        nodes = list(g.live_nodes()) if k == 1 else inductive_step(g, prog.rules, k)
        for v in nodes:
            store = NodeStore(v.id)
            stores[v.id] = store
            for entries in instantiate_node(v, facts, stores).by_root.values():
                for e in entries:
                    if not filter_redundant or not is_redundant(e):
                        store.add(e)
            if not store.entries:
                g.remove_node(v.id)
    return g, stores


def tree_signature(x):
    """Materialized shape of an unfolded derivation, for multiset compares."""
    if isinstance(x, Leaf):
        return ("leaf", x.var)
    return (str(x.root), x.label.value, tuple(tree_signature(c) for c in x.children))


def count_atom(x, target) -> int:
    if isinstance(x, Leaf):
        return 0
    return int(x.root == target) + sum(count_atom(c, target) for c in x.children)


class TestInstantiateNode:
    def test_base_node_joins_database_facts(self, running_prog):
        g = base_step(running_prog.rules)
        facts = FactIndex(running_prog.facts)
        result = instantiate_node(g.node(0), facts, {})
        roots = {str(r) for r in result.by_root}
        assert roots == {"p(a,b)", "p(b,c)", "p(a,c)", "p(c,b)"}
        assert all(
            len(es) == 1 and isinstance(es[0].children[0], Leaf)
            for es in result.by_root.values()
        )
        assert result.substitutions == 4

    def test_depth_two_node_composes_parent_roots(self, running_prog):
        g, stores = run_rounds(running_prog, 1)
        (v2,) = inductive_step(g, running_prog.rules, 2)
        result = instantiate_node(v2, FactIndex(running_prog.facts), stores)
        # joins: (a,b)+(b,c), (a,c)+(c,b), (b,c)+(c,b), (c,b)+(b,c)
        assert {str(r) for r in result.by_root} == {
            "p(a,c)",
            "p(a,b)",
            "p(b,b)",
            "p(c,c)",
        }
        for es in result.by_root.values():
            for e in es:
                assert e.label is Label.AND
                assert all(isinstance(c, DerivationEntry) for c in e.children)

    def test_empty_parent_store_yields_nothing(self, running_prog):
        g, stores = run_rounds(running_prog, 1)
        (v2,) = inductive_step(g, running_prog.rules, 2)
        stores[0] = NodeStore(0)  # pretend the parent stored nothing
        result = instantiate_node(v2, FactIndex(running_prog.facts), stores)
        assert result.by_root == {}

    def test_cartesian_product_over_parent_entries(self):
        prog = normalize(parse_program(collapse_example(3)))
        result = run_pr(prog)
        t_store = next(
            s
            for s in result.stores.values()
            if any(str(r) == "t(a)" for r in s.by_root)
        )
        assert len(t_store.by_root[parse_atom("t(a)")]) == 3


class TestRedundancy:
    def test_depth_two_derivation_is_not_redundant(self, running_prog):
        _, stores = run_rounds(running_prog, 2)
        (entry,) = stores[1].by_root[parse_atom("p(a,b)")]
        assert not is_redundant(entry)

    def test_round_three_candidates_all_redundant(self, running_prog):
        g, stores = run_rounds(running_prog, 2)
        facts = FactIndex(running_prog.facts)
        candidates = []
        for v in inductive_step(g, running_prog.rules, 3):
            stores[v.id] = NodeStore(v.id)
            result = instantiate_node(v, facts, stores)
            candidates += [e for es in result.by_root.values() for e in es]
        assert candidates
        assert all(is_redundant(e) for e in candidates)
        # cross-check against the materialized definition
        for e in candidates:
            trees = list(unfold(e))
            assert all(count_atom(t, e.root) > 1 for t in trees)

    def test_collapsed_entry_with_one_clean_unfolding_is_kept(self):
        # one alternative repeats the root, the others do not
        prog = normalize(parse_program(collapse_example(4)))
        result = run_pcor(prog, ReasonerOptions(collapse=CollapseMode.ON))
        r_atom = parse_atom("r(a,b1)")
        entry = next(
            e
            for s in result.stores.values()
            for e in s.by_root.get(r_atom, ())
            if e.has_or
        )
        trees = list(unfold(entry))
        assert any(count_atom(t, r_atom) > 1 for t in trees)
        assert any(count_atom(t, r_atom) == 1 for t in trees)
        assert not is_redundant(entry)

    def test_redundancy_matches_brute_force_on_random_dags(self):
        rng = random.Random(7)
        preds = [atom(f"d{i}") for i in range(6)]
        for _ in range(300):
            entries = [
                DerivationEntry(rng.choice(preds), Label.AND, (Leaf(rng.randrange(4)),), 0)
            ]
            for _ in range(rng.randint(2, 10)):
                k = rng.randint(1, min(3, len(entries)))
                children = tuple(rng.choice(entries) for _ in range(k))
                if rng.random() < 0.4 and len({c.root for c in children}) == 1:
                    entries.append(
                        DerivationEntry(children[0].root, Label.OR, children, 0)
                    )
                else:
                    if rng.random() < 0.5:
                        children += (Leaf(rng.randrange(4)),)
                    entries.append(
                        DerivationEntry(rng.choice(preds), Label.AND, children, 0)
                    )
            e = entries[-1]
            trees = list(unfold(e))
            if len(trees) > 1000:
                continue
            brute = all(count_atom(t, e.root) > 1 for t in trees)
            assert is_redundant(e) == brute

    def test_hereditary_check_is_strictly_stronger(self):
        # both alternatives repeat some inner fact, neither repeats the root
        beta, gamma, delta, alpha = atom("b"), atom("g"), atom("d"), atom("a")

        def chain(root, inner):
            deep = DerivationEntry(inner, Label.AND, (Leaf(0),), 0)
            mid = DerivationEntry(inner, Label.AND, (deep,), 0)
            return DerivationEntry(root, Label.AND, (mid,), 0)

        alt1, alt2 = chain(beta, gamma), chain(beta, delta)
        or_entry = collapse([alt1, alt2])
        top = DerivationEntry(alpha, Label.AND, (or_entry,), 0)
        assert not is_redundant(top)
        assert is_hereditarily_redundant(top)
        # on entries whose unfoldings are path-distinct the notions agree
        clean = DerivationEntry(alpha, Label.AND, (Leaf(0), Leaf(1)), 0)
        assert not is_redundant(clean)
        assert not is_hereditarily_redundant(clean)


class TestCollapseUnfold:
    def test_collapse_builds_or_entry(self):
        a = atom("t", "a")
        e1 = DerivationEntry(a, Label.AND, (Leaf(0),), 0)
        e2 = DerivationEntry(a, Label.AND, (Leaf(1),), 0)
        merged = collapse([e1, e2])
        assert merged.label is Label.OR
        assert merged.children == (e1, e2)

    def test_identical_structure_children_are_not_deduplicated(self):
        a = atom("t", "a")
        e1 = DerivationEntry(a, Label.AND, (Leaf(0),), 0)
        e2 = DerivationEntry(a, Label.AND, (Leaf(0),), 0)
        assert len(collapse([e1, e2]).children) == 2

    def test_collapse_rejects_short_input(self):
        a = atom("t", "a")
        e1 = DerivationEntry(a, Label.AND, (Leaf(0),), 0)
        with pytest.raises(ValueError):
            collapse([e1])
        with pytest.raises(ValueError):
            collapse([])

    def test_collapse_rejects_mixed_roots(self):
        e1 = DerivationEntry(atom("t", "a"), Label.AND, (Leaf(0),), 0)
        e2 = DerivationEntry(atom("t", "b"), Label.AND, (Leaf(1),), 0)
        with pytest.raises(ValueError):
            collapse([e1, e2])

    def test_pure_and_entry_unfolds_to_itself(self):
        e = DerivationEntry(atom("t", "a"), Label.AND, (Leaf(0), Leaf(1)), 0)
        assert list(unfold(e)) == [e]

    def test_or_entry_unfolds_to_alternatives(self):
        a = atom("t", "a")
        alts = [DerivationEntry(a, Label.AND, (Leaf(i),), 0) for i in range(5)]
        assert list(unfold(collapse(alts))) == alts

    def test_and_above_or_takes_cartesian_product(self):
        # the collapsed alternatives pair up with the plain second child
        a, r = atom("t", "a"), atom("r", "a", "b1")
        alts = [DerivationEntry(a, Label.AND, (Leaf(i),), 0) for i in range(4)]
        top = DerivationEntry(r, Label.AND, (collapse(alts), Leaf(9)), 0)
        trees = list(unfold(top))
        assert len(trees) == 4
        for t, alt in zip(trees, alts):
            assert tree_signature(t) == (
                "r(a,b1)",
                "and",
                (tree_signature(alt), ("leaf", 9)),
            )

    def test_collapse_then_unfold_is_lossless(self):
        rng = random.Random(3)
        a = atom("t", "a")
        pool = [DerivationEntry(a, Label.AND, (Leaf(rng.randrange(6)),), 0) for _ in range(6)]
        nested = [
            DerivationEntry(a, Label.AND, (collapse(pool[:2]), Leaf(7)), 0),
            DerivationEntry(a, Label.AND, (Leaf(8),), 0),
            pool[3],
        ]
        merged = collapse(nested)
        direct = sorted(tree_signature(t) for t in unfold(merged))
        union = sorted(tree_signature(t) for e in nested for t in unfold(e))
        assert direct == union


class TestShouldCollapse:
    def test_average_at_threshold(self):
        a, b = atom("x"), atom("y")
        mk = lambda n: [DerivationEntry(a, Label.AND, (Leaf(i),), 0) for i in range(n)]
        assert should_collapse({a: mk(12), b: mk(10)}, 10)  # average 11
        assert not should_collapse({a: mk(1)}, 10)
        assert should_collapse({a: mk(1000)}, 10)

    def test_empty_map_is_an_error(self):
        with pytest.raises(ValueError):
            should_collapse({}, 10)
