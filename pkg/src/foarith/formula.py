"""AST for first-order formulas over relational vocabularies with constants.

Nodes compare by *identity*: subformula sharing (a DAG) is supported and
exploited by the evaluator's memo tables.  Use :func:`structurally_equal`
for structural comparison.  Connectives are n-ary; ``And(())`` is true and
``Or(())`` is false.  ``BigOr``/``BigAnd`` hold a finite index family whose
children are generated on demand, so huge disjunctions are never held in
memory at once.  ``Macro`` nodes are named abbreviations with a declared
(lazily built) expansion and an optional semantic evaluator hook.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Optional, Tuple, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """Constant symbol c_index; denotes min(index, n-1) in a structure of size n."""

    index: int

    def __str__(self) -> str:
        return f"c{self.index}"


Term = Union[Var, Const]


class Formula:
    """Base class for formula nodes (identity equality, shareable)."""

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class Equal(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    rel: str
    args: Tuple[Term, ...]


@dataclass(frozen=True, eq=False)
class Not(Formula):
    child: Formula


@dataclass(frozen=True, eq=False)
class And(Formula):
    children: Tuple[Formula, ...]


@dataclass(frozen=True, eq=False)
class Or(Formula):
    children: Tuple[Formula, ...]


@dataclass(frozen=True, eq=False)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=False)
class Forall(Formula):
    var: str
    body: Formula


class IndexFamily:
    """Finite, lazily enumerable index set with a child generator.

    ``size`` is the exact number of indices, ``free_vars`` the declared free
    variables of every child (validated by tests on small families), and
    ``uniform_rank`` promises all children share one quantifier rank, letting
    rank queries look at a single child instead of enumerating.
    """

    def __init__(
        self,
        indices: Callable[[], Iterator[Any]],
        child: Callable[[Any], Formula],
        size: int,
        free_vars: frozenset[str],
        uniform_rank: bool = True,
        label: str = "",
    ):
        self._indices = indices
        self.child = child
        self.size = size
        self.free_vars = free_vars
        self.uniform_rank = uniform_rank
        self.label = label

    def indices(self) -> Iterator[Any]:
        return self._indices()

    def first_child(self) -> Formula:
        return self.child(next(iter(self.indices())))

    def mapped(self, fn: Callable[[Formula], Formula]) -> "IndexFamily":
        """Family with the same indices whose children are fn(original child)."""
        return IndexFamily(
            self._indices,
            lambda idx: fn(self.child(idx)),
            self.size,
            self.free_vars,
            self.uniform_rank,
            self.label,
        )


@dataclass(frozen=True, eq=False)
class BigOr(Formula):
    family: IndexFamily


@dataclass(frozen=True, eq=False)
class BigAnd(Formula):
    family: IndexFamily


@dataclass(frozen=True, eq=False)
class Macro(Formula):
    """Named abbreviation.

    ``expand`` builds the declared Macro-free-able expansion on first use.
    ``semantics``, when set, is a callable ``(session, arg_values) -> bool``
    used by macro-semantic evaluation; it must agree with the expansion,
    including relational-overflow partiality.  ``rank`` declares the
    expansion's quantifier rank so it can be reported without forcing huge
    expansions (verified against forced expansions in tests).
    """

    name: str
    args: Tuple[Term, ...]
    expand: Callable[[], Formula]
    semantics: Optional[Callable[..., bool]] = None
    rank: Optional[int] = None

    def expansion(self) -> Formula:
        cached = self.__dict__.get("_exp")
        if cached is None:
            cached = self.expand()
            object.__setattr__(self, "_exp", cached)
        return cached


TRUE = And(())
FALSE = Or(())


def make_and(children: Iterable[Formula]) -> Formula:
    """Conjunction that unwraps the single-child case."""
    cs = tuple(children)
    return cs[0] if len(cs) == 1 else And(cs)


def make_or(children: Iterable[Formula]) -> Formula:
    cs = tuple(children)
    return cs[0] if len(cs) == 1 else Or(cs)


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


def free_vars(f: Formula) -> frozenset[str]:
    """Free variables of f.  BigOr/BigAnd use the family's declaration."""
    memo: dict[int, frozenset[str]] = {}

    def go(g: Formula) -> frozenset[str]:
        got = memo.get(id(g))
        if got is not None:
            return got
        if isinstance(g, Equal):
            out = frozenset(t.name for t in (g.left, g.right) if isinstance(t, Var))
        elif isinstance(g, Atom):
            out = frozenset(t.name for t in g.args if isinstance(t, Var))
        elif isinstance(g, Not):
            out = go(g.child)
        elif isinstance(g, (And, Or)):
            out = frozenset().union(*(go(c) for c in g.children)) if g.children else frozenset()
        elif isinstance(g, (Exists, Forall)):
            out = go(g.body) - {g.var}
        elif isinstance(g, (BigOr, BigAnd)):
            out = g.family.free_vars
        elif isinstance(g, Macro):
            out = frozenset(t.name for t in g.args if isinstance(t, Var))
        else:
            raise TypeError(f"not a formula node: {g!r}")
        memo[id(g)] = out
        return out

    return go(f)


def quantifier_rank(f: Formula) -> int:
    """Quantifier rank, by the inductive definition.

    Macro nodes report their declared rank (the rank of the expansion);
    uniform-rank families are ranked from a single child.
    """
    memo: dict[int, int] = {}

    def go(g: Formula) -> int:
        got = memo.get(id(g))
        if got is not None:
            return got
        if isinstance(g, (Equal, Atom)):
            out = 0
        elif isinstance(g, Not):
            out = go(g.child)
        elif isinstance(g, (And, Or)):
            out = max((go(c) for c in g.children), default=0)
        elif isinstance(g, (Exists, Forall)):
            out = 1 + go(g.body)
        elif isinstance(g, (BigOr, BigAnd)):
            fam = g.family
            if fam.size == 0:
                out = 0
            elif fam.uniform_rank:
                out = go(fam.first_child())
            else:
                out = max(go(fam.child(i)) for i in fam.indices())
        elif isinstance(g, Macro):
            out = g.rank if g.rank is not None else go(g.expansion())
        else:
            raise TypeError(f"not a formula node: {g!r}")
        memo[id(g)] = out
        return out

    return go(f)


def expand_macros(f: Formula) -> Formula:
    """Replace every Macro by its declared expansion (recursively).

    BigOr/BigAnd families are rewrapped so their children expand on demand;
    nothing is materialized.
    """
    memo: dict[int, Formula] = {}
    pins: list[Formula] = []  # keep originals alive so ids stay unique

    def go(g: Formula) -> Formula:
        got = memo.get(id(g))
        if got is not None:
            return got
        if isinstance(g, (Equal, Atom)):
            out: Formula = g
        elif isinstance(g, Not):
            out = Not(go(g.child))
        elif isinstance(g, And):
            out = And(tuple(go(c) for c in g.children))
        elif isinstance(g, Or):
            out = Or(tuple(go(c) for c in g.children))
        elif isinstance(g, Exists):
            out = Exists(g.var, go(g.body))
        elif isinstance(g, Forall):
            out = Forall(g.var, go(g.body))
        elif isinstance(g, BigOr):
            out = BigOr(g.family.mapped(expand_macros))
        elif isinstance(g, BigAnd):
            out = BigAnd(g.family.mapped(expand_macros))
        elif isinstance(g, Macro):
            out = go(g.expansion())
        else:
            raise TypeError(f"not a formula node: {g!r}")
        memo[id(g)] = out
        pins.append(g)
        return out

    return go(f)


class NodeBudgetExceeded(Exception):
    """A BigOr/BigAnd materialization would exceed the node budget."""


def materialize(f: Formula, budget: int = 100_000) -> Formula:
    """Turn BigOr/BigAnd into plain Or/And, refusing past `budget` children."""
    seen = 0

    def go(g: Formula) -> Formula:
        nonlocal seen
        seen += 1
        if seen > budget:
            raise NodeBudgetExceeded(f"materialization exceeds {budget} nodes")
        if isinstance(g, (Equal, Atom)):
            return g
        if isinstance(g, Not):
            return Not(go(g.child))
        if isinstance(g, And):
            return And(tuple(go(c) for c in g.children))
        if isinstance(g, Or):
            return Or(tuple(go(c) for c in g.children))
        if isinstance(g, Exists):
            return Exists(g.var, go(g.body))
        if isinstance(g, Forall):
            return Forall(g.var, go(g.body))
        if isinstance(g, BigOr):
            if g.family.size > budget:
                raise NodeBudgetExceeded(
                    f"BigOr family of size {g.family.size} exceeds budget {budget}"
                )
            return Or(tuple(go(g.family.child(i)) for i in g.family.indices()))
        if isinstance(g, BigAnd):
            if g.family.size > budget:
                raise NodeBudgetExceeded(
                    f"BigAnd family of size {g.family.size} exceeds budget {budget}"
                )
            return And(tuple(go(g.family.child(i)) for i in g.family.indices()))
        if isinstance(g, Macro):
            return Macro(g.name, g.args, lambda gg=g: materialize(gg.expansion(), budget),
                         g.semantics, g.rank)
        raise TypeError(f"not a formula node: {g!r}")

    return go(f)


def substitute(f: Formula, mapping: dict[str, Term]) -> Formula:
    """Capture-avoiding is NOT attempted: callers must ensure replacement
    terms are not captured by binders in f (builders use disjoint name pools).
    Bound occurrences shadow the mapping."""

    def sub_term(t: Term, m: dict[str, Term]) -> Term:
        if isinstance(t, Var) and t.name in m:
            return m[t.name]
        return t

    def go(g: Formula, m: dict[str, Term]) -> Formula:
        if not m:
            return g
        if isinstance(g, Equal):
            return Equal(sub_term(g.left, m), sub_term(g.right, m))
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(sub_term(t, m) for t in g.args))
        if isinstance(g, Not):
            return Not(go(g.child, m))
        if isinstance(g, And):
            return And(tuple(go(c, m) for c in g.children))
        if isinstance(g, Or):
            return Or(tuple(go(c, m) for c in g.children))
        if isinstance(g, (Exists, Forall)):
            inner = {k: v for k, v in m.items() if k != g.var}
            for repl in inner.values():
                if isinstance(repl, Var) and repl.name == g.var:
                    raise ValueError(f"substitution would capture {g.var}")
            body = go(g.body, inner)
            return Exists(g.var, body) if isinstance(g, Exists) else Forall(g.var, body)
        if isinstance(g, BigOr):
            return BigOr(g.family.mapped(lambda c: go(c, m)))
        if isinstance(g, BigAnd):
            return BigAnd(g.family.mapped(lambda c: go(c, m)))
        if isinstance(g, Macro):
            return Macro(
                g.name,
                tuple(sub_term(t, m) for t in g.args),
                lambda gg=g, mm=dict(m): substitute(gg.expansion(), mm),
                g.semantics,
                g.rank,
            )
        raise TypeError(f"not a formula node: {g!r}")

    return go(f, dict(mapping))


def structurally_equal(a: Formula, b: Formula) -> bool:
    """Structural equality (BigOr/BigAnd and Macro compare by enumerated /
    expanded content only when both sides are small enough to walk)."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, Equal):
        return a.left == b.left and a.right == b.right
    if isinstance(a, Atom):
        return a.rel == b.rel and a.args == b.args
    if isinstance(a, Not):
        return structurally_equal(a.child, b.child)
    if isinstance(a, (And, Or)):
        return len(a.children) == len(b.children) and all(
            structurally_equal(x, y) for x, y in zip(a.children, b.children)
        )
    if isinstance(a, (Exists, Forall)):
        return a.var == b.var and structurally_equal(a.body, b.body)
    if isinstance(a, (BigOr, BigAnd)):
        fa, fb = a.family, b.family
        if fa.size != fb.size:
            return False
        return all(
            structurally_equal(fa.child(i), fb.child(j))
            for i, j in zip(fa.indices(), fb.indices())
        )
    if isinstance(a, Macro):
        return a.name == b.name and a.args == b.args
    raise TypeError(f"not a formula node: {a!r}")


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order walk (does not enter Big families or Macro expansions)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.child)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.children))
        elif isinstance(g, (Exists, Forall)):
            stack.append(g.body)
