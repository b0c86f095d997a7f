"""Vertex cover and deg-independent-set slice sentences, Buss kernelization,
and the brute-force graph oracles they are checked against.

The k-th vertex-cover slice sentence follows the kernelization shape: guess
how many vertices have degree >= k+1 (they are forced into any cover), count
the surviving kernel vertices, and assert the kernel is isomorphic to one of
the precomputed j-vertex graphs with a small enough cover.  Kernel vertices
are ordered by hashing them injectively onto a guessed tuple of hash values,
which keeps the quantifier rank at 16 independently of k.  deg-Independent-Set
needs only the degree bound, giving rank 13.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .colorcoding import build_chi, chain_hash, hash_eq_macro, threshold_n
from .evaluate import EvalSession
from .formula import (
    And, Atom, BigOr, Equal, Exists, Forall, Formula, IndexFamily, Macro,
    Not, Or, TRUE, Var,
)
from .slices import SliceFamily, wrap_eventual
from .structures import ArithStructure, StructureError, Vocabulary

GRAPH_VOCAB = Vocabulary((("E", 2),))

#: largest k for which slice-sentence generation/evaluation is supported;
#: beyond it the index families outgrow any feasible evaluation budget.
MAX_SLICE_K = 2


class GeneratorBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1; edges as sorted pairs."""

    n: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if not (a < b):
                raise ValueError(f"edge {(a, b)} not sorted")
            if not (0 <= a and b < self.n):
                raise ValueError(f"edge {(a, b)} outside vertex range")

    @staticmethod
    def from_pairs(n: int, pairs: Iterable[Tuple[int, int]]) -> "Graph":
        return Graph(n, frozenset(
            (min(a, b), max(a, b)) for a, b in pairs if a != b
        ))

    def degree(self, v: int) -> int:
        return sum(1 for a, b in self.edges if v in (a, b))

    def degrees(self) -> List[int]:
        out = [0] * self.n
        for a, b in self.edges:
            out[a] += 1
            out[b] += 1
        return out

    def max_degree(self) -> int:
        return max(self.degrees(), default=0) if self.n else 0


def graph_structure(g: Graph) -> ArithStructure:
    """Structure with E listing both orientations (universe needs n >= 1)."""
    if g.n < 1:
        raise StructureError("structures need a nonempty universe")
    sym = set()
    for a, b in g.edges:
        sym.add((a, b))
        sym.add((b, a))
    return ArithStructure(g.n, {"E": sym})


def structure_graph(a: ArithStructure) -> Graph:
    """Inverse of graph_structure; rejects loops and asymmetric E."""
    e = a.rels.get("E", frozenset())
    for (u, v) in e:
        if u == v:
            raise StructureError(f"self-loop at {u}")
        if (v, u) not in e:
            raise StructureError(f"edge ({u},{v}) lacks its mirror")
    return Graph.from_pairs(a.n, e)


def all_graphs(n: int) -> Iterator[Graph]:
    slots = list(itertools.combinations(range(n), 2))
    for bits in itertools.product((False, True), repeat=len(slots)):
        yield Graph(n, frozenset(s for s, b in zip(slots, bits) if b))


def random_graph(n: int, rng, max_edges: Optional[int] = None) -> Graph:
    cap = comb(n, 2)
    want = rng.randrange(0, min(max_edges if max_edges is not None else cap, cap) + 1)
    return Graph(n, frozenset(rng.sample(list(itertools.combinations(range(n), 2)), want)))


# -- oracles

def brute_force_vc(g: Graph, k: int) -> bool:
    """Exhaustive: does g have a vertex cover of size at most k?
    (Any smaller cover pads to size exactly min(k, n), so this coincides
    with the exact-size reading whenever k <= n.)"""
    if not g.edges:
        return k >= 0
    if k <= 0:
        return False
    size = min(k, g.n)
    for cand in itertools.combinations(range(g.n), size):
        chosen = set(cand)
        if all(a in chosen or b in chosen for a, b in g.edges):
            return True
    return False


def brute_force_deg_is(g: Graph, k: int) -> bool:
    """Is k >= deg(g) and has g an independent set of k - deg(g) vertices?"""
    d = g.max_degree()
    if k < d:
        return False
    want = k - d
    if want == 0:
        return True
    if want > g.n:
        return False
    for cand in itertools.combinations(range(g.n), want):
        chosen = set(cand)
        if all(not (a in chosen and b in chosen) for a, b in g.edges):
            return True
    return False


@dataclass(frozen=True)
class KernelResult:
    verdict: str                      # yes | no | reduced
    reduced: Graph                    # relabeled onto 0..m-1
    kept: Tuple[int, ...]             # original labels of kernel vertices
    k_residual: int
    removed_high_degree: int

    def surviving_edges(self) -> FrozenSet[Tuple[int, int]]:
        """Kernel edges in original labels."""
        back = dict(enumerate(self.kept))
        return frozenset(
            (min(back[a], back[b]), max(back[a], back[b]))
            for a, b in self.reduced.edges
        )


def buss_kernelize(g: Graph, k: int) -> KernelResult:
    """Buss kernel: drop degree >= k+1 vertices (forced into any k-cover),
    decrement k per drop, drop isolated vertices, then size-check."""
    if k < 0:
        raise ValueError("k must be >= 0")
    deg = g.degrees()
    high = {v for v in range(g.n) if deg[v] >= k + 1}
    k2 = k - len(high)
    surviving = [
        (a, b) for a, b in g.edges if a not in high and b not in high
    ]
    kept = tuple(sorted({v for e in surviving for v in e}))
    relabel = {v: i for i, v in enumerate(kept)}
    reduced = Graph(len(kept), frozenset(
        (relabel[a], relabel[b]) for a, b in surviving
    ))
    if k2 < 0 or reduced.n > k2 * (k + 1):
        verdict = "no"
    elif not reduced.edges:
        verdict = "yes"
    else:
        verdict = "reduced"
    return KernelResult(verdict, reduced, kept, k2, len(high))


# -- formulas

def naive_vc_sentence(k: int) -> Formula:
    """psi_k: exists x1..xk, pairwise distinct, covering every edge; qr = k+2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    xs = [Var(f"x{i + 1}") for i in range(k)]
    u, v = Var("u"), Var("v")
    hits = tuple(Or((Equal(u, x), Equal(v, x))) for x in xs)
    covered = Or((Not(Atom("E", (u, v))),) + hits) if hits else Not(Atom("E", (u, v)))
    matrix: Formula = Forall("u", Forall("v", covered))
    distinct = [
        Not(Equal(xs[i], xs[j]))
        for i in range(k) for j in range(i + 1, k)
    ]
    if distinct:
        matrix = And(tuple(distinct) + (matrix,))
    for x in reversed(xs):
        matrix = Exists(x.name, matrix)
    return matrix


def high_degree_formula(k: int, var: str = "x") -> Formula:
    """chi^{k+1} for phi(x,y) = Exy: var has degree >= k+1 (valid above
    threshold_n(k+1))."""
    witness = "y" if var != "y" else "y1"
    phi = Atom("E", (Var(var), Var(witness)))
    return build_chi(k + 1, phi, witness)


def uni_formula(k: int, var: str = "x") -> Formula:
    """var survives Buss kernelization: low degree and some low-degree
    neighbor; qr <= 13."""
    other = "y" if var != "y" else "y0"
    hd_var = high_degree_formula(k, var)
    hd_other = high_degree_formula(k, other)
    e = Atom("E", (Var(var), Var(other)))
    return And((
        Not(hd_var),
        Not(Forall(other, Or((Not(e), hd_other)))),
    ))


@lru_cache(maxsize=None)
def vc_pattern_graphs(j: int, bound: int) -> Tuple[FrozenSet[Tuple[int, int]], ...]:
    """Edge sets of the graphs on {0..j-1} with a vertex cover of size <= bound."""
    if bound < 0:
        return ()
    return tuple(
        g.edges for g in all_graphs(j) if brute_force_vc(g, bound)
    )


def rho_formula(j: int, k: int, removed: int) -> Formula:
    """rho_j: the kernel (assumed to have exactly j vertices by the sibling
    count conjuncts) has a vertex cover of size k - removed.

    Guesses (p,q) and a sorted tuple of j hash values; asserts every
    kernel vertex hashes onto the tuple and every tuple entry is hit (with
    the exact-j count this makes the hash a bijection onto the tuple), then
    matches the induced adjacency pattern against the precomputed j-vertex
    graphs with a small enough cover.  The inner vertex of an edge pattern
    is identified by low degree plus adjacency to a kernel vertex, which is
    equivalent to kernel membership there and keeps qr(rho_j) <= 16.
    """
    if not (0 <= removed <= k):
        raise ValueError("need 0 <= removed <= k")
    if not (0 <= j <= (k - removed) * (k + 1)):
        raise ValueError("need 0 <= j <= (k-removed)*(k+1)")
    jsq = j * j
    pats = vc_pattern_graphs(j, k - removed)
    uni_y = uni_formula(k, "y")
    hd_y2 = high_degree_formula(k, "y2")
    pv, qv = Var("p"), Var("q")
    hash_y = [hash_eq_macro(pv, qv, Var("y"), i, j) if j else None for i in range(jsq)]
    hash_y2 = [hash_eq_macro(pv, qv, Var("y2"), i, j) if j else None for i in range(jsq)]
    e_y_y2 = Atom("E", (Var("y"), Var("y2")))

    @lru_cache(maxsize=None)
    def pos_pattern(ia: int, ib: int) -> Formula:
        return Exists("y", And((
            uni_y,
            hash_y[ia],
            Exists("y2", And((hash_y2[ib], Not(hd_y2), e_y_y2))),
        )))

    def tuple_child(T: Tuple[int, ...]) -> Formula:
        cover = Forall("y", Or((Not(uni_y),) + tuple(hash_y[i] for i in T)))
        surj = tuple(
            Exists("y", And((uni_y, hash_y[i])))
            for i in T
        )
        pairs = [(a, b) for a in range(j) for b in range(a + 1, j)]
        def h_child(edges: FrozenSet[Tuple[int, int]]) -> Formula:
            lits = tuple(
                pos_pattern(T[a], T[b]) if (a, b) in edges
                else Not(pos_pattern(T[a], T[b]))
                for a, b in pairs
            )
            return And(lits)
        h_disj = BigOr(IndexFamily(
            indices=lambda: iter(pats),
            child=h_child,
            size=len(pats),
            free_vars=frozenset({"p", "q"}),
            uniform_rank=True,
            label=f"{j}-vertex graphs with vc<={k - removed}",
        ))
        return And((cover,) + surj + (h_disj,))

    tuple_family = IndexFamily(
        indices=lambda: itertools.combinations(range(jsq), j),
        child=tuple_child,
        size=comb(jsq, j),
        free_vars=frozenset({"p", "q"}),
        uniform_rank=True,
        label=f"sorted {j}-tuples < {jsq}",
    )
    pat_set = frozenset(pats)

    def sem(session, values):
        n = session.n
        if j and n <= jsq:  # clamped constants: defer to the expansion
            return session.eval(cell["node"].expansion(), {})
        unis = _kernel_vertices(session, uni_y)
        if j == 0:
            return not unis and bool(pats)
        if len(unis) < j:
            return False
        return _rho_scan(session, unis, j, pat_set, hd_y2)

    cell: dict = {}
    rho = Macro(
        name=f"rho[j={j},k={k},l={removed}]",
        args=(),
        expand=lambda: Exists("p", Exists("q", BigOr(tuple_family))),
        semantics=sem,
        rank=None,
    )
    cell["node"] = rho
    return rho


def _kernel_vertices(session: EvalSession, uni_y: Formula) -> Tuple[int, ...]:
    key = ("unis", id(uni_y))
    got = session.scratch.get(key)
    if got is None:
        got = tuple(
            v for v in range(session.n) if session.eval(uni_y, {"y": v})
        )
        session.scratch[key] = got
        session._pins.append(uni_y)
    return got


def _adjacency(session: EvalSession) -> Dict[int, Tuple[int, ...]]:
    got = session.scratch.get("adj")
    if got is None:
        adj: Dict[int, list] = {}
        for (a, b) in session.structure.rels.get("E", frozenset()):
            adj.setdefault(a, []).append(b)
        got = {v: tuple(sorted(ws)) for v, ws in adj.items()}
        session.scratch["adj"] = got
    return got


def _rho_scan(session, unis, j, pat_set, hd_y2) -> bool:
    """Scan (p,q); for pairs whose hash is defined on all kernel vertices
    with exactly j distinct values, match the adjacency pattern."""
    n = session.n
    jsq = j * j
    us = np.asarray(unis, dtype=np.int64)
    qs = np.arange(n, dtype=np.int64)[:, None]
    adj = _adjacency(session)
    pattern_cache: dict = {}

    def lowdeg(v: int) -> bool:
        return not session.eval(hd_y2, {"y2": v})

    def pattern_matches(p: int, q: int) -> bool:
        values = [chain_hash(n, p, q, v, jsq) for v in unis]
        img = sorted(set(values))
        if None in values or len(img) != j:
            return False
        slot_of = {val: a for a, val in enumerate(img)}
        slots = tuple(
            tuple(v for v, val in zip(unis, values) if val == img[a])
            for a in range(j)
        )
        got = pattern_cache.get(slots)
        if got is None:
            edges = set()
            for a in range(j):
                for v in slots[a]:
                    for w in adj.get(v, ()):
                        if lowdeg(w):
                            hw = chain_hash(n, p, q, w, jsq)
                            if hw is not None and hw in slot_of and slot_of[hw] > a:
                                edges.add((a, slot_of[hw]))
            got = frozenset(edges)
            pattern_cache[slots] = got
        return got in pat_set

    for p in range(1, n):
        gamma = us % p
        beta = qs * gamma[None, :]
        vals = np.where(beta < n, (beta % p) % jsq, -1)
        sv = np.sort(vals, axis=1)
        defined = sv[:, 0] >= 0
        if j > 1:
            distinct = (np.diff(sv, axis=1) != 0).sum(axis=1) + 1
        else:
            distinct = np.ones(n, dtype=np.int64)
        for q in np.nonzero(defined & (distinct == j))[0]:
            if pattern_matches(p, int(q)):
                return True
    return False


def _index_budget(k: int) -> int:
    """Largest hash-family size a k-slice sentence uses."""
    return max(1, k * (k + 1) + 1)


def vc_slice_sentence(k: int) -> Formula:
    """The k-th vertex-cover slice sentence (valid for n >= vc_threshold(k));
    qr <= 16.  k beyond MAX_SLICE_K raises (the index families outgrow the
    evaluation budget; nothing is silently truncated)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > MAX_SLICE_K:
        raise GeneratorBudgetError(
            f"k={k} exceeds the slice-generation budget (max {MAX_SLICE_K}); "
            f"the j={k * (k + 1)} branch alone enumerates "
            f"C({(k * (k + 1)) ** 2},{k * (k + 1)}) hash tuples"
        )
    hd_y = high_degree_formula(k, "y")
    uni_y = uni_formula(k, "y")
    count_hd = {
        c: build_chi(c, hd_y, "y") for c in range(k + 2)
    }
    count_uni = {
        c: build_chi(c, uni_y, "y") for c in range(k * (k + 1) + 2)
    }
    branches = []
    for removed in range(k + 1):
        inner = []
        for j in range((k - removed) * (k + 1) + 1):
            inner.append(And((
                count_uni[j],
                Not(count_uni[j + 1]),
                rho_formula(j, k, removed),
            )))
        branches.append(And((
            count_hd[removed],
            Not(count_hd[removed + 1]),
            Or(tuple(inner)),
        )))
    return Or(tuple(branches))


def vc_threshold(k: int) -> int:
    """Validity threshold for the k-th slice sentence: the largest hash
    family it uses must be inside its verified window."""
    return threshold_n(_index_budget(k))


def vc_slice_family() -> SliceFamily:
    return SliceFamily(
        name="vc",
        vocab=GRAPH_VOCAB,
        m=lambda k: _index_budget(k) ** 2 + 1,
        phi=vc_slice_sentence,
        g=vc_threshold,
        decider=lambda a, k: brute_force_vc(structure_graph(a), k),
    )


def vc_total_family(mode: str = "lazy") -> SliceFamily:
    """Wrapped family: correct on every structure size."""
    fam = vc_slice_family()
    return wrap_eventual(fam, vc_threshold, fam.decider, mode=mode)


# -- deg-Independent-Set

def deg_is_slice_sentence(k: int) -> Formula:
    """k-th deg-Independent-Set slice: some d <= k is exactly the maximum
    degree (valid for n >= deg_is_threshold(k)); qr <= 13."""
    if k < 0:
        raise ValueError("k must be >= 0")
    phi = Atom("E", (Var("u"), Var("y")))
    chis = {d: build_chi(d, phi, "y") for d in range(k + 2)}
    branches = tuple(
        And((
            Exists("u", chis[d]),
            Not(Exists("u", chis[d + 1])),
        ))
        for d in range(k + 1)
    )
    return Or(branches)


def deg_is_threshold(k: int) -> int:
    """Graphs with at least (deg+1)*(k-deg) vertices always contain the
    needed independent set, so above max(threshold, (k+1)k) only the degree
    test matters."""
    return max(threshold_n(k + 1), (k + 1) * k)


def deg_is_family() -> SliceFamily:
    return SliceFamily(
        name="deg-is",
        vocab=GRAPH_VOCAB,
        m=lambda k: (k + 1) ** 2 + 1,
        phi=deg_is_slice_sentence,
        g=deg_is_threshold,
        decider=lambda a, k: brute_force_deg_is(structure_graph(a), k),
    )


def deg_is_total_family(mode: str = "lazy") -> SliceFamily:
    fam = deg_is_family()
    return wrap_eventual(fam, deg_is_threshold, fam.decider, mode=mode)
