"""Bounded-size hypergraphs, the d-hitting-set kernelization chain, and the
triple-encoding structure with its formula fragments for d = 3.

The kernel works level by level: once every l-set of vertices has at most
k^(d-l) extensions among the hyperedges, any (l-1)-set exceeding k^(d-(l-1))
extensions cannot be avoided by a small hitting set, so all its extensions
collapse into the (l-1)-set itself.  Chaining l = d..2 bounds every vertex's
incidence by k^(d-1) and, on yes-instances, the kernel by k^d edges over at
most d*k^d non-isolated vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .colorcoding import build_chi
from .formula import And, Atom, Exists, Forall, Formula, Not, Or, Var, implies
from .structures import ArithStructure, StructureError

Edge = FrozenSet[int]


@dataclass(frozen=True)
class Hypergraph:
    """Vertex set {0..n-1} plus a duplicate-free family of nonempty edges of
    size at most d."""

    n: int
    edges: FrozenSet[Edge]
    d: int

    def __post_init__(self):
        for e in self.edges:
            if not e:
                raise ValueError("empty hyperedge")
            if len(e) > self.d:
                raise ValueError(f"edge {sorted(e)} exceeds size bound {self.d}")
            if any(not (0 <= v < self.n) for v in e):
                raise ValueError(f"edge {sorted(e)} outside vertex range")

    @staticmethod
    def from_lists(n: int, edges: Iterable[Iterable[int]], d: int) -> "Hypergraph":
        return Hypergraph(n, frozenset(frozenset(e) for e in edges), d)


def brute_force_hitting_set(g: Hypergraph, k: int) -> bool:
    """Exhaustive: does some set of at most k vertices meet every edge?"""
    if not g.edges:
        return k >= 0
    if k <= 0:
        return False
    for size in range(1, min(k, g.n) + 1):
        for cand in itertools.combinations(range(g.n), size):
            chosen = set(cand)
            if all(chosen & e for e in g.edges):
                return True
    return False


def extensions(g: Hypergraph, s: FrozenSet[int]) -> List[Edge]:
    """Hyperedges extending s (supersets, including s itself)."""
    return [e for e in g.edges if s <= e]


def reduce_level(g: Hypergraph, k: int, d: int, level: int) -> Hypergraph:
    """One kernelization step: collapse every (level-1)-set with more than
    k^(d-(level-1)) extensions into a hyperedge of its own.

    Requires 1 < level <= d and the entry hypothesis that every level-set
    has at most k^(d-level) extensions (raises on violation).
    """
    if not (1 < level <= d):
        raise ValueError("need 1 < level <= d")
    if g.d > d:
        raise ValueError("hypergraph exceeds the declared edge bound")
    for s in itertools.combinations(range(g.n), level):
        count = len(extensions(g, frozenset(s)))
        if count > k ** (d - level):
            raise ValueError(
                f"hypothesis violated: {set(s)} has {count} > k^{d - level} extensions"
            )
    bound = k ** (d - (level - 1))
    bad = [
        frozenset(s)
        for s in itertools.combinations(range(g.n), level - 1)
        if len(extensions(g, frozenset(s))) > bound
    ]
    if not bad:
        return g
    edges = {e for e in g.edges if not any(s <= e for s in bad)}
    edges.update(bad)
    return Hypergraph(g.n, frozenset(edges), d)


def kernelize(g: Hypergraph, k: int, d: int) -> Tuple[Hypergraph, Dict[str, bool]]:
    """Full chain level = d..2.  Returns the kernel plus the paper's size
    bounds: every vertex in at most k^(d-1) edges, and (meaningful only on
    yes-instances) at most k^d edges over at most d*k^d non-isolated
    vertices."""
    if g.d > d:
        raise ValueError("hypergraph exceeds the declared edge bound")
    out = g
    for level in range(d, 1, -1):
        out = reduce_level(out, k, d, level)
    touched = {v for e in out.edges for v in e}
    bounds = {
        "edge_bound_ok": len(out.edges) <= k ** d,
        "vertex_bound_ok": len(touched) <= d * k ** d,
    }
    return out, bounds


def vertex_incidence_bound_holds(g: Hypergraph, k: int, d: int) -> bool:
    """Property (a'): every vertex lies in at most k^(d-1) kernel edges."""
    for v in range(g.n):
        if sum(1 for e in g.edges if v in e) > k ** (d - 1):
            return False
    return True


# -- the {E0, eps} structure view

def hypergraph_structure(g: Hypergraph) -> ArithStructure:
    """Universe V + E (edges numbered after vertices); E0 marks edges, eps is
    vertex-edge membership."""
    edges = sorted(g.edges, key=sorted)
    n = g.n + len(edges)
    if n < 1:
        raise StructureError("structures need a nonempty universe")
    e0 = {(g.n + i,) for i in range(len(edges))}
    eps = {(v, g.n + i) for i, e in enumerate(edges) for v in e}
    return ArithStructure(n, {"E0": e0, "eps": eps})


def structure_hypergraph(a: ArithStructure, d: int) -> Hypergraph:
    """Inverse of hypergraph_structure; validates the encoding."""
    e0 = {t[0] for t in a.rels.get("E0", frozenset())}
    if e0:
        first = min(e0)
        if e0 != set(range(first, a.n)):
            raise StructureError("E0 must mark a tail segment of the universe")
        n_vertices = first
    else:
        n_vertices = a.n
    edges: Dict[int, set] = {e: set() for e in e0}
    for (v, e) in a.rels.get("eps", frozenset()):
        if e not in e0:
            raise StructureError(f"eps points at non-edge element {e}")
        if v in e0:
            raise StructureError(f"edge element {v} used as a vertex")
        edges[e].add(v)
    return Hypergraph.from_lists(n_vertices, edges.values(), d)


# -- d=3 triple encoding: universe V^3 over V = {0} union (shifted) V0

@dataclass(frozen=True)
class TripleView:
    """Bookkeeping for the V^3 structure: m = |V| = original n + 1 (vertex v
    encodes as v+1; 0 is the padding element)."""

    m: int

    def index(self, u: int, v: int, w: int) -> int:
        return (u * self.m + v) * self.m + w

    def tuple_of(self, idx: int) -> Tuple[int, int, int]:
        w = idx % self.m
        v = (idx // self.m) % self.m
        return (idx // (self.m * self.m), v, w)

    def encode_edge(self, e: Edge) -> Tuple[int, int, int]:
        vs = sorted(v + 1 for v in e)
        while len(vs) < 3:
            vs.insert(0, 0)
        return tuple(vs)


def triple_structure(g: Hypergraph) -> Tuple[ArithStructure, TripleView]:
    """The sigma-structure on V^3 (lexicographic order = the built-in one):
    Zero marks (0,0,0), First/Second/Third project components as (0,0,*),
    E marks the 0-padded ascending encodings of the hyperedges."""
    if g.d > 3:
        raise ValueError("triple encoding needs edge size <= 3")
    view = TripleView(g.n + 1)
    m = view.m
    idx = view.index
    first, second, third = set(), set(), set()
    for u in range(m):
        for v in range(m):
            for w in range(m):
                t = idx(u, v, w)
                first.add((t, idx(0, 0, u)))
                second.add((t, idx(0, 0, v)))
                third.add((t, idx(0, 0, w)))
    e_rel = {(idx(*view.encode_edge(e)),) for e in g.edges}
    rels = {
        "Zero": {(0,)},
        "E": e_rel,
        "First": first,
        "Second": second,
        "Third": third,
    }
    return ArithStructure(m ** 3, rels), view


def iset_formula(i: int, var: str = "x") -> Formula:
    """var encodes an i-element set: 0-padded strictly ascending components."""
    if i not in (1, 2, 3):
        raise ValueError("i must be 1, 2 or 3")
    x = Var(var)
    x1, x2, x3 = Var("x1"), Var("x2"), Var("x3")
    proj = (
        Atom("First", (x, x1)),
        Atom("Second", (x, x2)),
        Atom("Third", (x, x3)),
    )
    if i == 1:
        shape = (Atom("Zero", (x1,)), Atom("Zero", (x2,)), Not(Atom("Zero", (x3,))))
    elif i == 2:
        shape = (Atom("Zero", (x1,)), Atom("<", (x1, x2)), Atom("<", (x2, x3)))
    else:
        shape = (Not(Atom("Zero", (x1,))), Atom("<", (x1, x2)), Atom("<", (x2, x3)))
    return Exists("x1", Exists("x2", Exists("x3", And(proj + shape))))


def set_formula(var: str = "x") -> Formula:
    return Or((iset_formula(1, var), iset_formula(2, var), iset_formula(3, var)))


def _member(s: Var, z: Var) -> Formula:
    return Or((
        Atom("First", (s, z)), Atom("Second", (s, z)), Atom("Third", (s, z)),
    ))


def subset_formula(sub: str = "x", sup: str = "y") -> Formula:
    """sub and sup encode sets and sub is contained in sup (every nonzero
    projection of sub is a projection of sup)."""
    if "z" in (sub, sup) or len({sub, sup}) != 2:
        raise ValueError("subset variables must be distinct and not 'z'")
    z = Var("z")
    return And((
        set_formula(sub),
        set_formula(sup),
        Forall("z", implies(
            And((Not(Atom("Zero", (z,))), _member(Var(sub), z))),
            _member(Var(sup), z),
        )),
    ))


def extension_count_formula(k: int, var: str = "x") -> Formula:
    """chi^{k+1} for phi(var, w) = (var subset w and Ew): var has more than
    k extensions among the hyperedges."""
    witness = "y" if var != "y" else "y1"
    phi = And((subset_formula(var, witness), Atom("E", (Var(witness),))))
    return build_chi(k + 1, phi, witness)


def e3_formula(k: int) -> Formula:
    """Edge relation of the level-3 kernel, defined against the original E:
    singletons stay; overloaded 2-sets become edges; other edges stay unless
    some 2-subset is overloaded."""
    x = Var("x")
    return Or((
        And((iset_formula(1, "x"), Atom("E", (x,)))),
        And((iset_formula(2, "x"), extension_count_formula(k, "x"))),
        And((
            Atom("E", (x,)),
            Not(Exists("y", And((
                iset_formula(2, "y"),
                subset_formula("y", "x"),
                extension_count_formula(k, "y"),
            )))),
        )),
    ))
