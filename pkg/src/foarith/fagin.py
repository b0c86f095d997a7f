"""Fagin-defined problems: formulas with one positive second-order variable,
their brute-force semantics, and the reduction to bounded hitting set.

Normal form is structural: a FaginFormula is a universal prefix over a
conjunction of clauses, each clause a set of disjuncts that are either
second-order atoms X applied to prefix variables or first-order formulas in
which X does not occur.  (Anything with X under negation or an existential
is unrepresentable here by construction; a validity pass also rejects any
first-order part that mentions the reserved relation name "X".)

The reduction: a clause whose first-order disjuncts all fail at some prefix
assignment can only be saved by its X-disjuncts, so the assignment's witness
tuples form a hyperedge that any valid S must hit.  A failing clause with no
X-disjunct at all makes the instance unsatisfiable, encoded as a fixed
NO-hypergraph of k+1 disjoint singleton edges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .evaluate import EvalSession, evaluate
from .formula import And, Atom, Equal, Exists, Forall, Formula, Not, Or, Var, free_vars, implies, walk
from .hypergraphs import Hypergraph, brute_force_hitting_set
from .structures import ArithStructure

X_REL = "X"


@dataclass(frozen=True)
class SecondOrder:
    """Disjunct X y_{q1} ... y_{qr}: indices into the universal prefix."""

    indices: Tuple[int, ...]


@dataclass(frozen=True)
class FirstOrder:
    formula: Formula


Disjunct = Union[SecondOrder, FirstOrder]


@dataclass(frozen=True)
class FaginFormula:
    universals: Tuple[str, ...]
    clauses: Tuple[Tuple[Disjunct, ...], ...]
    arity: int

    def __post_init__(self):
        names = set(self.universals)
        if len(names) != len(self.universals):
            raise ValueError("universal variables must be distinct")
        for clause in self.clauses:
            for d in clause:
                if isinstance(d, SecondOrder):
                    if len(d.indices) != self.arity:
                        raise ValueError(
                            f"X-disjunct arity {len(d.indices)} != {self.arity}"
                        )
                    if any(not (0 <= q < len(self.universals)) for q in d.indices):
                        raise ValueError("X-disjunct index out of range")
                elif isinstance(d, FirstOrder):
                    if not free_vars(d.formula) <= names:
                        raise ValueError(
                            "first-order disjunct with free variables outside the prefix"
                        )
                    for node in walk(d.formula):
                        if isinstance(node, Atom) and node.rel == X_REL:
                            raise ValueError(
                                "X occurs inside a first-order part; not in normal form"
                            )
                else:
                    raise ValueError(f"not a disjunct: {d!r}")

    def _disjunct_formula(self, d: Disjunct) -> Formula:
        if isinstance(d, SecondOrder):
            return Atom(X_REL, tuple(Var(self.universals[q]) for q in d.indices))
        return d.formula

    def sentence(self) -> Formula:
        """The plain FO sentence over tau + X (X as an ordinary relation),
        with each clause mini-scoped: a disjunct sits directly under the
        innermost universal it mentions.  Logically equivalent to the flat
        prefix form, but evaluation can discharge a clause without entering
        quantifier towers the surviving disjuncts do not need."""
        position = {name: i for i, name in enumerate(self.universals)}
        clause_formulas = []
        for clause in self.clauses:
            by_level: Dict[int, List[Formula]] = {}
            closed: List[Formula] = []
            for d in clause:
                f = self._disjunct_formula(d)
                fv = free_vars(f)
                if fv:
                    by_level.setdefault(max(position[v] for v in fv), []).append(f)
                else:
                    closed.append(f)
            body: Optional[Formula] = None
            for i in range(len(self.universals) - 1, -1, -1):
                ready = by_level.get(i, [])
                if not ready and body is None:
                    continue
                parts = tuple(ready) + ((body,) if body is not None else ())
                inner = parts[0] if len(parts) == 1 else Or(parts)
                body = Forall(self.universals[i], inner)
            parts = tuple(closed) + ((body,) if body is not None else ())
            if not parts:
                parts = (Or(()),)
            clause_formulas.append(parts[0] if len(parts) == 1 else Or(parts))
        return And(tuple(clause_formulas))


def brute_force_fagin(a: ArithStructure, phi: FaginFormula, k: int) -> bool:
    """Exhaustive over S subset of A^r with |S| = k: interpret X as S and
    model-check phi's sentence."""
    sentence = phi.sentence()
    tuples = list(itertools.product(range(a.n), repeat=phi.arity))
    if k > len(tuples):
        return False
    for s in itertools.combinations(tuples, k):
        expanded = ArithStructure(a.n, {**a.rels, X_REL: frozenset(s)})
        if evaluate(expanded, sentence, mode="memoized"):
            return True
    return False


def tuple_vertex(a_n: int, t: Tuple[int, ...]) -> int:
    """Lexicographic rank of an r-tuple over [a_n] (hypergraph vertex id)."""
    out = 0
    for x in t:
        out = out * a_n + x
    return out


def no_instance_hypergraph(k: int) -> Hypergraph:
    """k+1 pairwise disjoint singleton edges: no k vertices hit them all."""
    return Hypergraph.from_lists(k + 1, [[v] for v in range(k + 1)], 1)


def fagin_to_hypergraph(a: ArithStructure, phi: FaginFormula, k: int) -> Hypergraph:
    """Hyperedges = X-witness tuples of clause instances whose first-order
    disjuncts all fail; (A, k) is Fagin-yes iff the result has a hitting set
    of size k (checked by the test suite, not assumed)."""
    session = EvalSession(a, "memoized")
    ln = len(phi.universals)
    edges: set = set()
    d_bound = 1
    for clause in phi.clauses:
        fo = [d.formula for d in clause if isinstance(d, FirstOrder)]
        so = [d.indices for d in clause if isinstance(d, SecondOrder)]
        d_bound = max(d_bound, len(so))
        for assignment in itertools.product(range(a.n), repeat=ln):
            env = dict(zip(phi.universals, assignment))
            if any(session.eval(f, env) for f in fo):
                continue
            if not so:
                return no_instance_hypergraph(k)
            edges.add(frozenset(
                tuple_vertex(a.n, tuple(assignment[q] for q in idx))
                for idx in so
            ))
    return Hypergraph(a.n ** phi.arity, frozenset(edges), d_bound)


def fagin_pipeline(a: ArithStructure, phi: FaginFormula, k: int) -> bool:
    return brute_force_hitting_set(fagin_to_hypergraph(a, phi, k), k)


def vertex_cover_fagin() -> FaginFormula:
    """forall y1 y2 (not E y1 y2 or X y1 or X y2): the reduction reproduces
    the edge set."""
    return FaginFormula(
        universals=("y1", "y2"),
        clauses=((
            FirstOrder(Not(Atom("E", (Var("y1"), Var("y2"))))),
            SecondOrder((0,)),
            SecondOrder((1,)),
        ),),
        arity=1,
    )


# -- matrix domination

def matrix_structure(matrix: Sequence[Sequence[int]]) -> ArithStructure:
    n = len(matrix)
    ones = {
        (i, j) for i in range(n) for j in range(n) if matrix[i][j]
    }
    return ArithStructure(n, {"One": ones})


def matrix_domination_instance(
    matrix: Sequence[Sequence[int]], bound: int
) -> Tuple[ArithStructure, FaginFormula]:
    """Structure + Fagin formula (binary X) for matrix domination: a set of
    entries such that every one-entry shares a row or column with one of
    them.  Every row and column must carry at most `bound` ones.

    Normal form of the displayed sentence: one clause over the prefix
    (x, y, y_1..y_bound, x_1..x_bound) with first-order disjuncts
    "not One(x,y)" and "the y_i / x_i do not list x's row / y's column",
    and X-disjuncts X(x, y_i), X(x_i, y).
    """
    n = len(matrix)
    for row in matrix:
        if len(row) != n or any(v not in (0, 1) for v in row):
            raise ValueError("matrix must be square over {0,1}")
    for i in range(n):
        if sum(matrix[i]) > bound:
            raise ValueError(f"row {i} has more than {bound} ones")
        if sum(matrix[j][i] for j in range(n)) > bound:
            raise ValueError(f"column {i} has more than {bound} ones")

    x, y = Var("x"), Var("y")
    ys = [Var(f"y{i + 1}") for i in range(bound)]
    xs = [Var(f"x{i + 1}") for i in range(bound)]
    z = Var("z")
    row_lists = And((
        Forall("z", implies(
            Atom("One", (x, z)), Or(tuple(Equal(z, yi) for yi in ys))
        )),
    ) + tuple(Atom("One", (x, yi)) for yi in ys))
    col_lists = And((
        Forall("z", implies(
            Atom("One", (z, y)), Or(tuple(Equal(z, xi) for xi in xs))
        )),
    ) + tuple(Atom("One", (xi, y)) for xi in xs))

    universals = ("x", "y") + tuple(v.name for v in ys) + tuple(v.name for v in xs)
    so = tuple(SecondOrder((0, 2 + i)) for i in range(bound)) + tuple(
        SecondOrder((2 + bound + i, 1)) for i in range(bound)
    )
    clause = (
        FirstOrder(Not(Atom("One", (x, y)))),
        FirstOrder(Not(row_lists)),
        FirstOrder(Not(col_lists)),
    ) + so
    phi = FaginFormula(universals=universals, clauses=(clause,), arity=2)
    return matrix_structure(matrix), phi
