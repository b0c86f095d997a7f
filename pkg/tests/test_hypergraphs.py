import itertools
import random

import pytest

from foarith.evaluate import evaluate
from foarith.hypergraphs import (
    Hypergraph, brute_force_hitting_set, e3_formula, extension_count_formula,
    hypergraph_structure, iset_formula, kernelize, reduce_level, set_formula,
    structure_hypergraph, subset_formula, triple_structure,
    vertex_incidence_bound_holds,
)
from foarith.structures import ArithStructure, StructureError
from foarith.vertexcover import Graph, all_graphs, buss_kernelize, random_graph

RUNNING = Hypergraph.from_lists(4, [[0, 1, 2], [0, 1, 3]], 3)


def random_hypergraph(n, d, rng, max_edges=10):
    edges = set()
    for _ in range(rng.randrange(0, max_edges + 1)):
        size = rng.randrange(1, d + 1)
        edges.add(frozenset(rng.sample(range(n), size)))
    return Hypergraph(n, frozenset(edges), d)


# -- type invariants

def test_hypergraph_validation():
    with pytest.raises(ValueError):
        Hypergraph.from_lists(3, [[]], 2)
    with pytest.raises(ValueError):
        Hypergraph.from_lists(3, [[0, 1, 2]], 2)
    with pytest.raises(ValueError):
        Hypergraph.from_lists(2, [[0, 5]], 3)


# -- oracle

def test_brute_force_hitting_set_fixtures():
    g = Hypergraph.from_lists(3, [[0, 1], [2]], 2)
    assert brute_force_hitting_set(g, 1) is False
    assert brute_force_hitting_set(g, 2) is True
    assert brute_force_hitting_set(Hypergraph.from_lists(3, [], 2), 0) is True


# -- reduction levels

def test_reduce_level_running_example():
    g3 = reduce_level(RUNNING, 1, 3, 3)
    assert g3.edges == frozenset({frozenset({0, 1})})
    g2 = reduce_level(g3, 1, 3, 2)
    assert g2 is g3  # no singleton exceeds k^{d-1} = 1


def test_reduce_level_identity_when_quiet():
    g = Hypergraph.from_lists(5, [[0, 1, 2], [3, 4]], 3)
    assert reduce_level(g, 2, 3, 3) is g


def test_reduce_level_hypothesis_violation():
    # entering level 2 requires every 2-set to have at most k extensions;
    # {0,1} has two here while k = 1
    g = Hypergraph.from_lists(4, [[0, 1, 2], [0, 1]], 3)
    with pytest.raises(ValueError):
        reduce_level(g, 1, 3, 2)


def test_reduce_level_preserves_small_hitting_sets():
    rng = random.Random(4)
    for _ in range(100):
        g = random_hypergraph(9, 3, rng)
        k = rng.randrange(1, 4)
        try:
            g3 = reduce_level(g, k, 3, 3)
        except ValueError:
            continue
        assert brute_force_hitting_set(g, k) == brute_force_hitting_set(g3, k)


def test_kernelize_running_example():
    kernel, bounds = kernelize(RUNNING, 1, 3)
    assert kernel.edges == frozenset({frozenset({0, 1})})
    assert bounds == {"edge_bound_ok": True, "vertex_bound_ok": True}
    assert brute_force_hitting_set(kernel, 1) is True
    assert brute_force_hitting_set(RUNNING, 1) is True


def test_kernelize_empty():
    g = Hypergraph.from_lists(4, [], 3)
    kernel, _ = kernelize(g, 0, 3)
    assert kernel.edges == frozenset()
    assert brute_force_hitting_set(kernel, 0) is True


def test_kernelize_equivalence_random():
    rng = random.Random(8)
    checked = 0
    for _ in range(100):
        d = rng.choice((2, 3))
        g = random_hypergraph(rng.randrange(3, 13), d, rng)
        k = rng.randrange(1, 4)
        kernel, bounds = kernelize(g, k, d)
        want = brute_force_hitting_set(g, k)
        assert brute_force_hitting_set(kernel, k) == want
        assert vertex_incidence_bound_holds(kernel, k, d)
        if want:
            assert bounds["edge_bound_ok"] and bounds["vertex_bound_ok"]
        checked += 1
    assert checked == 100


def test_kernelize_d2_matches_buss_surviving_edges():
    # exhaustive n <= 5 plus a seeded n in {6,7} sample (the full n = 7
    # sweep is 2^21 graphs; see ledger)
    def check(g: Graph, k: int):
        h = Hypergraph.from_lists(g.n, [list(e) for e in g.edges], 2)
        kernel, _ = kernelize(h, k, 2)
        kernel_2edges = {tuple(sorted(e)) for e in kernel.edges if len(e) == 2}
        buss = buss_kernelize(g, k)
        assert kernel_2edges == set(buss.surviving_edges()), (g, k)

    for n in range(1, 6):
        for g in all_graphs(n):
            for k in (0, 1, 2):
                check(g, k)
    rng = random.Random(12)
    for _ in range(400):
        g = random_graph(rng.choice((6, 7)), rng)
        check(g, rng.randrange(0, 3))


# -- {E0, eps} structure view

def test_hypergraph_structure_example():
    g = Hypergraph.from_lists(2, [[0, 1]], 2)
    a = hypergraph_structure(g)
    assert a.n == 3
    assert a.rels["E0"] == {(2,)}
    assert a.rels["eps"] == {(0, 2), (1, 2)}
    assert structure_hypergraph(a, 2) == g


def test_hypergraph_structure_round_trip_random():
    rng = random.Random(6)
    for _ in range(50):
        g = random_hypergraph(8, 3, rng)
        assert structure_hypergraph(hypergraph_structure(g), 3) == g


def test_structure_hypergraph_rejects_bad_eps():
    a = ArithStructure(3, {"E0": {(2,)}, "eps": {(0, 1)}})
    with pytest.raises(StructureError):
        structure_hypergraph(a, 2)


# -- triple encoding

def test_triple_structure_edge_encodings():
    g = Hypergraph.from_lists(2, [[1], [0, 1]], 3)
    a, view = triple_structure(g)
    assert view.m == 3 and a.n == 27
    # {1} shifts to {2} -> (0,0,2); {0,1} shifts to {1,2} -> (0,1,2)
    marked = {view.tuple_of(t[0]) for t in a.rels["E"]}
    assert marked == {(0, 0, 2), (0, 1, 2)}
    assert a.rels["Zero"] == {(0,)}


def test_iset_formulas_exhaustive():
    g = Hypergraph.from_lists(3, [[0, 1]], 3)
    a, view = triple_structure(g)
    f1, f2, f3 = iset_formula(1), iset_formula(2), iset_formula(3)
    for idx in range(a.n):
        u, v, w = view.tuple_of(idx)
        assert evaluate(a, f1, {"x": idx}) == (u == 0 and v == 0 and w > 0)
        assert evaluate(a, f2, {"x": idx}) == (u == 0 and 0 < v < w)
        assert evaluate(a, f3, {"x": idx}) == (0 < u < v < w)


def decode_set(view, idx):
    parts = [c for c in view.tuple_of(idx) if c != 0]
    return frozenset(parts) if len(set(parts)) == len(parts) else None


def test_subset_formula_against_semantic_oracle():
    g = Hypergraph.from_lists(3, [[0, 1]], 3)
    a, view = triple_structure(g)
    sub = subset_formula()
    sets = {}
    for idx in range(a.n):
        u, v, w = view.tuple_of(idx)
        if (u == 0 and v == 0 and w > 0) or (u == 0 and 0 < v < w) or (0 < u < v < w):
            sets[idx] = decode_set(view, idx)
    assert evaluate(a, sub, {"x": view.index(0, 0, 1), "y": view.index(0, 1, 2)}) is True
    assert evaluate(a, sub, {"x": view.index(0, 0, 3), "y": view.index(0, 1, 2)}) is False
    for x in range(a.n):
        for y in list(sets)[:12] + [5, 9]:
            want = x in sets and y in sets and sets[x] <= sets[y]
            assert evaluate(a, sub, {"x": x, "y": y}) == want, (view.tuple_of(x), view.tuple_of(y))


def test_e3_formula_matches_reduce_level():
    # running example: k=1, edges {0,1,2} and {0,1,3} collapse to {0,1}
    a, view = triple_structure(RUNNING)
    want_kernel = reduce_level(RUNNING, 1, 3, 3)
    want = {view.index(*view.encode_edge(e)) for e in want_kernel.edges}
    f = e3_formula(1)
    got = {idx for idx in range(a.n) if evaluate(a, f, {"x": idx})}
    assert got == want


def test_extension_count_formula_against_oracle():
    a, view = triple_structure(RUNNING)
    f = extension_count_formula(1)  # more than 1 extension
    sets = {}
    for idx in range(a.n):
        s = decode_set(view, idx)
        u, v, w = view.tuple_of(idx)
        ascending = (u == 0 and v == 0 and w > 0) or (u == 0 and 0 < v < w) or (0 < u < v < w)
        if s is not None and ascending:
            sets[idx] = s
    edge_sets = [frozenset(x + 1 for x in e) for e in RUNNING.edges]
    for idx, s in sets.items():
        want = sum(1 for e in edge_sets if s <= e) > 1
        assert evaluate(a, f, {"x": idx}) == want, view.tuple_of(idx)
