"""Finite structures over {0..n-1} with built-in order and arithmetic.

The built-in relations <, +, x are never stored for canonical structures:
they are computed on demand as the natural relations restricted to the
universe, so overflow shows up as tuple absence.  Structure unions
(:mod:`foarith.parafo`) produce structures that carry explicit interpretations
for the reserved names; those override the computed built-ins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Tuple

MUL = "×"  # multiplication relation symbol
BUILTIN_ARITIES = {"<": 2, "+": 3, MUL: 3}


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Relation symbols with arities, plus the constant budget m (C(m)).

    The reserved names <, +, x are always present (arities 2, 3, 3) and may
    not be redeclared.
    """

    relations: Tuple[Tuple[str, int], ...] = ()
    constant_budget: int = 0

    def __post_init__(self):
        seen = set()
        for name, arity in self.relations:
            if name in BUILTIN_ARITIES:
                raise StructureError(f"relation name {name!r} is reserved")
            if name in seen:
                raise StructureError(f"duplicate relation name {name!r}")
            if arity < 1:
                raise StructureError(f"relation {name!r} must have arity >= 1")
            seen.add(name)

    def arity(self, name: str) -> int:
        if name in BUILTIN_ARITIES:
            return BUILTIN_ARITIES[name]
        for rel, arity in self.relations:
            if rel == name:
                return arity
        raise StructureError(f"unknown relation {name!r}")

    def has(self, name: str) -> bool:
        if name in BUILTIN_ARITIES:
            return True
        return any(rel == name for rel, _ in self.relations)

    def with_budget(self, m: int) -> "Vocabulary":
        return Vocabulary(self.relations, m)


class ArithStructure:
    """Structure on universe {0..n-1} with implicit built-in <, +, x.

    ``rels`` maps relation names to tuple sets.  Reserved names are rejected
    unless ``allow_builtin_relations`` is set (used by structure unions,
    where the stored relation overrides the computed one).
    """

    def __init__(self, n: int, rels: Dict[str, Iterable[Tuple[int, ...]]] | None = None,
                 allow_builtin_relations: bool = False):
        if n < 1:
            raise StructureError("universe size must be >= 1")
        self.n = n
        self.rels: Dict[str, FrozenSet[Tuple[int, ...]]] = {}
        for name, tuples in (rels or {}).items():
            if name in BUILTIN_ARITIES and not allow_builtin_relations:
                raise StructureError(f"built-in relation {name!r} may not be stored")
            stored = frozenset(tuple(t) for t in tuples)
            arities = {len(t) for t in stored}
            if len(arities) > 1:
                raise StructureError(f"mixed arities in relation {name!r}")
            for t in stored:
                if any(not (0 <= a < n) for a in t):
                    raise StructureError(f"tuple {t} of {name!r} outside universe [{n}]")
            self.rels[name] = stored

    def const(self, index: int) -> int:
        """Value of the constant c_index: index, clamped to n-1."""
        return index if index < self.n else self.n - 1

    def holds(self, rel: str, args: Tuple[int, ...]) -> bool:
        """Membership test; built-ins are computed unless stored explicitly."""
        stored = self.rels.get(rel)
        if stored is not None:
            return args in stored
        if rel == "<":
            a, b = args
            return a < b
        if rel == "+":
            a, b, c = args
            return a + b == c
        if rel == MUL:
            a, b, c = args
            return a * b == c
        raise StructureError(f"unknown relation {rel!r}")

    def knows(self, rel: str) -> bool:
        return rel in self.rels or rel in BUILTIN_ARITIES

    def arity_of(self, rel: str) -> int:
        if rel in self.rels:
            for t in self.rels[rel]:
                return len(t)
            if rel in BUILTIN_ARITIES:
                return BUILTIN_ARITIES[rel]
            raise StructureError(f"relation {rel!r} is empty; arity unknown")
        if rel in BUILTIN_ARITIES:
            return BUILTIN_ARITIES[rel]
        raise StructureError(f"unknown relation {rel!r}")

    def relation(self, rel: str) -> FrozenSet[Tuple[int, ...]]:
        """Stored tuples (empty set for declared-but-empty relations)."""
        return self.rels.get(rel, frozenset())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ArithStructure)
            and self.n == other.n
            and self.rels == other.rels
        )

    def __hash__(self):
        return hash((self.n, tuple(sorted((k, v) for k, v in self.rels.items()))))

    def __repr__(self):
        rels = ", ".join(f"{k}:{len(v)}" for k, v in sorted(self.rels.items()))
        return f"ArithStructure(n={self.n}, {rels})"


def render_structure(a: ArithStructure, arities: Dict[str, int] | None = None) -> str:
    """Serialize to the structure file format.

    Relations are written sorted by name, one tuple per line.  ``arities``
    lets empty relations declare an arity.  Explicit built-in relations
    (union structures) are written like any other relation.
    """
    lines = ["structure", f"universe {a.n}"]
    for name in sorted(a.rels):
        tuples = sorted(a.rels[name])
        if tuples:
            arity = len(tuples[0])
        elif arities and name in arities:
            arity = arities[name]
        elif name in BUILTIN_ARITIES:
            arity = BUILTIN_ARITIES[name]
        else:
            raise StructureError(f"cannot determine arity of empty relation {name!r}")
        lines.append(f"relation {name} {arity}")
        for t in tuples:
            lines.append(" ".join(str(x) for x in t))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> ArithStructure:
    """Parse the structure file format (inverse of render_structure)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "structure":
        raise StructureError("expected 'structure' header")
    if len(lines) < 2 or not lines[1].startswith("universe "):
        raise StructureError("expected 'universe <n>' line")
    try:
        n = int(lines[1].split()[1])
    except (IndexError, ValueError):
        raise StructureError("malformed universe line") from None
    rels: Dict[str, list] = {}
    current: str | None = None
    arity = 0
    for ln in lines[2:]:
        if ln == "end":
            has_builtin = any(name in BUILTIN_ARITIES for name in rels)
            return ArithStructure(n, rels, allow_builtin_relations=has_builtin)
        if ln.startswith("relation "):
            parts = ln.split()
            if len(parts) != 3:
                raise StructureError(f"malformed relation line: {ln!r}")
            current = parts[1]
            arity = int(parts[2])
            if arity < 1:
                raise StructureError(f"relation {current!r} must have arity >= 1")
            if current in rels:
                raise StructureError(f"duplicate relation {current!r}")
            rels[current] = []
        else:
            if current is None:
                raise StructureError(f"tuple line outside a relation block: {ln!r}")
            t = tuple(int(x) for x in ln.split())
            if len(t) != arity:
                raise StructureError(
                    f"tuple {t} has arity {len(t)}, expected {arity} for {current!r}"
                )
            rels[current].append(t)
    raise StructureError("missing 'end'")


def render_vocabulary(v: Vocabulary) -> str:
    lines = ["vocab"]
    for name, arity in v.relations:
        lines.append(f"relation {name} {arity}")
    lines.append(f"constants {v.constant_budget}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_vocabulary(text: str) -> Vocabulary:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "vocab":
        raise StructureError("expected 'vocab' header")
    relations = []
    budget = 0
    for ln in lines[1:]:
        if ln == "end":
            return Vocabulary(tuple(relations), budget)
        if ln.startswith("relation "):
            _, name, arity = ln.split()
            relations.append((name, int(arity)))
        elif ln.startswith("constants "):
            budget = int(ln.split()[1])
        else:
            raise StructureError(f"unexpected vocab line: {ln!r}")
    raise StructureError("missing 'end'")
