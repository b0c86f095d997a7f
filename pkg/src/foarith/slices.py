"""Slice families, quantifier-free structure characterization, and the
eventually-definable -> totally-definable wrapper.

A slice family maps a parameter k to a constant budget m_k, a sentence
phi_k, and (optionally) a validity threshold g(k) below which phi_k is not
trusted.  ``wrap_eventual`` turns such a family into a total one: the wrapped
sentence is (the universe has >= g(k) elements  and  phi_k)  or  SmallCases,
where SmallCases enumerates the yes-instances below the threshold.  The
small-instance disjunction can be materialized literally (only feasible for
toy thresholds) or carried as a rank-0 macro whose semantic evaluator calls
the instance decider and whose declared expansion is the literal disjunction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Optional

from .formula import And, Atom, Const, Equal, Formula, Macro, Not, Or, free_vars
from .structures import ArithStructure, StructureError, Vocabulary


def characterize_structure(a: ArithStructure, m: int,
                           vocab: Optional[Vocabulary] = None) -> Formula:
    """Quantifier-free sentence (over C(m)) satisfied exactly by structures
    isomorphic to `a`, among arithmetical structures with constant budget m.

    Requires |a| < m.  Built-in order rigidifies structures, so isomorphism
    is equality of size and relation contents; the sentence conjoins size
    clauses (constants c_{n-1} != c_{n-2} and c_n = c_{n-1}, using clamping)
    with one literal per tuple of every vocabulary relation.
    """
    n = a.n
    if m <= n:
        raise StructureError(f"need m > |A|; got m={m}, |A|={n}")
    if vocab is None:
        rels = []
        for name in sorted(a.rels):
            tuples = a.rels[name]
            if not tuples:
                raise StructureError(
                    f"empty relation {name!r} has no inferable arity; pass a vocabulary"
                )
            rels.append((name, len(next(iter(tuples)))))
        vocab = Vocabulary(tuple(rels), m)
    clauses: list[Formula] = []
    if n >= 2:
        clauses.append(Not(Equal(Const(n - 1), Const(n - 2))))
    clauses.append(Equal(Const(n), Const(n - 1)))
    for name, arity in sorted(vocab.relations):
        held = a.rels.get(name, frozenset())
        for t in itertools.product(range(n), repeat=arity):
            atom = Atom(name, tuple(Const(x) for x in t))
            clauses.append(atom if t in held else Not(atom))
    return And(tuple(clauses))


def enumerate_structures(vocab: Vocabulary, n: int) -> Iterator[ArithStructure]:
    """All arithmetical structures on [n] over vocab (one per isomorphism
    class; the built-in order admits no nontrivial automorphisms)."""
    spaces = []
    for name, arity in vocab.relations:
        tuples = list(itertools.product(range(n), repeat=arity))
        spaces.append((name, tuples))
    def rec(i: int, acc: dict):
        if i == len(spaces):
            yield ArithStructure(n, {k: frozenset(v) for k, v in acc.items()})
            return
        name, tuples = spaces[i]
        for bits in itertools.product((False, True), repeat=len(tuples)):
            acc[name] = frozenset(t for t, b in zip(tuples, bits) if b)
            yield from rec(i + 1, acc)
    yield from rec(0, {})


@dataclass
class SliceFamily:
    """Generator mapping a parameter k to (constant budget, sentence, threshold)."""

    name: str
    vocab: Vocabulary
    m: Callable[[int], int]
    phi: Callable[[int], Formula]
    g: Optional[Callable[[int], int]] = None
    decider: Optional[Callable[[ArithStructure, int], bool]] = None

    def sentence(self, k: int) -> Formula:
        return self.phi(k)


class ThresholdError(ValueError):
    pass


def wrap_eventual(family: SliceFamily, g: Callable[[int], int],
                  decider: Callable[[ArithStructure, int], bool],
                  mode: str = "lazy") -> SliceFamily:
    """Total slice family from an eventually-valid one.

    psi_k = (c_{g(k)-1} != c_{g(k)-2} and phi_k) or SmallCases.  The size
    guard exploits constant clamping: the inequality holds exactly on
    universes with >= g(k) elements.  SmallCases is the disjunction of
    characterize_structure sentences over yes-instances with < g(k) elements;
    in lazy mode (default) it is a rank-0 macro deferring to `decider`, in
    materialize mode the literal disjunction.  qr(psi_k) = qr(phi_k).
    """
    if mode not in ("lazy", "materialize"):
        raise ValueError(f"unknown mode {mode!r}")
    g_seen: Dict[int, int] = {}

    def g_checked(k: int) -> int:
        gk = g(k)
        if gk < 1:
            raise ThresholdError(f"g({k}) = {gk} must be >= 1")
        for k2, g2 in g_seen.items():
            if (k2 < k and g2 > gk) or (k2 > k and g2 < gk):
                raise ThresholdError(f"g not monotone: g({k2})={g2}, g({k})={gk}")
        g_seen[k] = gk
        return gk

    def small_expansion(k: int, gk: int, budget: int) -> Formula:
        parts = []
        for n in range(1, gk):
            for b in enumerate_structures(family.vocab, n):
                if decider(b, k):
                    parts.append(characterize_structure(b, budget, family.vocab))
        return Or(tuple(parts))

    def psi(k: int) -> Formula:
        gk = g_checked(k)
        budget = max(gk, family.m(k))
        phi_k = family.phi(k)
        if gk >= 2:
            guard: Formula = Not(Equal(Const(gk - 1), Const(gk - 2)))
            above = And((guard, phi_k))
        else:
            above = phi_k  # every structure has >= 1 element
        if mode == "materialize":
            small: Formula = small_expansion(k, gk, budget)
        else:
            def sem(session, values, _k=k, _g=gk):
                st = session.structure
                return decider(st, _k) if st.n < _g else False

            small = Macro(
                name=f"smallCases[{family.name},k={k}]",
                args=(),
                expand=lambda _k=k, _g=gk, _b=budget: small_expansion(_k, _g, _b),
                semantics=sem,
                rank=0,
            )
        return Or((above, small))

    return SliceFamily(
        name=f"{family.name}-total",
        vocab=family.vocab,
        m=lambda k: max(g_checked(k), family.m(k)),
        phi=psi,
        g=None,
        decider=decider,
    )
