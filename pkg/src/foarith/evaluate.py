"""Model checking of formulas on arithmetical structures.

Three modes:

* ``naive`` -- the reference semantics: plain recursion, quantifiers loop
  over the whole universe, Macro nodes evaluate their declared expansion.
* ``memoized`` -- same semantics with a per-session cache keyed on node
  identity plus the assignment restricted to the node's free variables
  (DAG sharing pays off), and candidate-guided existentials.
* ``macro-semantic`` -- memoized, but Macro nodes with a registered
  semantic evaluator are computed by that evaluator.  Evaluators must
  replicate the expansion's semantics exactly, including relational
  overflow partiality; exhaustive small-structure tests enforce this.

Results are identical across modes for every formula/structure (tested).
"""

from __future__ import annotations

import time
from typing import Dict, Iterable, Optional

from .formula import (
    And, Atom, BigAnd, BigOr, Const, Equal, Exists, Forall, Formula, Macro,
    Not, Or, Var, free_vars,
)
from .structures import MUL, ArithStructure, StructureError

MODES = ("naive", "memoized", "macro-semantic")

_ABSENT = object()
_BIG_KINDS = (Exists, Forall, BigOr, BigAnd, Macro)


class EvalError(Exception):
    pass


class MissingVariableError(EvalError):
    pass


class UnregisteredMacroError(EvalError):
    pass


class EvalTimeout(EvalError):
    """Raised when a session exceeds its per-instance time budget."""


class EvalSession:
    """One evaluation run: owns the memo tables and the time budget.

    Sessions are single-use per (structure, mode); distinct sessions are
    independent, so distinct (structure, formula) pairs can be evaluated
    concurrently.
    """

    def __init__(self, structure: ArithStructure, mode: str = "macro-semantic",
                 timeout_s: Optional[float] = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.structure = structure
        self.n = structure.n
        self.mode = mode
        self.memo: Dict[tuple, bool] = {}
        self.scratch: Dict[object, object] = {}
        self._plans: Dict[int, list] = {}
        self._fvs: Dict[int, tuple] = {}
        self._pins: list = []  # keeps memoized nodes alive so ids stay unique
        self._deadline = None if timeout_s is None else time.monotonic() + timeout_s
        self._steps = 0

    # -- plumbing

    def _tick(self):
        self._steps += 1
        if self._deadline is not None and self._steps % 2048 == 0:
            if time.monotonic() > self._deadline:
                raise EvalTimeout("evaluation time budget exhausted")

    def _free(self, f: Formula) -> tuple:
        got = self._fvs.get(id(f))
        if got is None:
            got = tuple(sorted(free_vars(f)))
            self._fvs[id(f)] = got
            self._pins.append(f)
        return got

    def term_value(self, t, env: Dict[str, int]) -> int:
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise MissingVariableError(f"free variable {t.name!r} unassigned") from None
        return self.structure.const(t.index)

    # -- evaluation

    def eval(self, f: Formula, env: Dict[str, int]) -> bool:
        kind = type(f)
        if kind is Atom:
            return self.structure.holds(
                f.rel, tuple(self.term_value(t, env) for t in f.args)
            )
        if kind is Equal:
            return self.term_value(f.left, env) == self.term_value(f.right, env)
        if kind is Not:
            return not self.eval(f.child, env)
        if kind is And:
            return all(self.eval(c, env) for c in f.children)
        if kind is Or:
            return any(self.eval(c, env) for c in f.children)
        if kind not in _BIG_KINDS:
            raise TypeError(f"not a formula node: {f!r}")

        if self.mode == "naive":
            return self._eval_big(f, env)

        key = (id(f), tuple(env[v] for v in self._free(f)))
        got = self.memo.get(key)
        if got is None:
            got = self._eval_big(f, env)
            self.memo[key] = got
        return got

    def _eval_big(self, f: Formula, env: Dict[str, int]) -> bool:
        self._tick()
        if isinstance(f, Exists):
            shadowed = env.get(f.var, _ABSENT)
            try:
                for v in self._exists_candidates(f, env):
                    env[f.var] = v
                    if self.eval(f.body, env):
                        return True
                return False
            finally:
                if shadowed is _ABSENT:
                    env.pop(f.var, None)
                else:
                    env[f.var] = shadowed
        if isinstance(f, Forall):
            shadowed = env.get(f.var, _ABSENT)
            try:
                for v in range(self.n):
                    env[f.var] = v
                    if not self.eval(f.body, env):
                        return False
                return True
            finally:
                if shadowed is _ABSENT:
                    env.pop(f.var, None)
                else:
                    env[f.var] = shadowed
        if isinstance(f, BigOr):
            for idx in f.family.indices():
                self._tick()
                if self.eval(f.family.child(idx), env):
                    return True
            return False
        if isinstance(f, BigAnd):
            for idx in f.family.indices():
                self._tick()
                if not self.eval(f.family.child(idx), env):
                    return False
            return True
        if isinstance(f, Macro):
            if self.mode == "macro-semantic":
                if f.semantics is None:
                    raise UnregisteredMacroError(
                        f"macro {f.name!r} has no semantic evaluator"
                    )
                values = tuple(self.term_value(t, env) for t in f.args)
                return bool(f.semantics(self, values))
            return self.eval(f.expansion(), env)
        raise TypeError(f"not a formula node: {f!r}")

    def _exists_candidates(self, f: Exists, env: Dict[str, int]) -> Iterable[int]:
        """Candidate values for an existential: in non-naive modes a positive
        conjunct mentioning the variable restricts the range (any witness must
        satisfy the conjunct, so this is semantics-preserving).  Stored
        relations restrict by projection; built-in +/x atoms with the other
        arguments bound determine the variable arithmetically."""
        if self.mode == "naive":
            return range(self.n)
        plan = self._plans.get(id(f))
        if plan is None:
            plan = self._compile_guides(f)
            self._plans[id(f)] = plan
            self._pins.append(f)
        best = None
        for guide in plan:
            cands = guide(env)
            if cands is None:
                continue
            if best is None or len(cands) < len(best):
                best = cands
            if not best:
                break
        if best is None:
            return range(self.n)
        return sorted(best)

    def _compile_guides(self, f: Exists) -> list:
        """One closure per usable positive conjunct, mapping env -> candidate
        set (or None when some other argument is unbound)."""
        conjuncts = f.body.children if isinstance(f.body, And) else (f.body,)
        n = self.n
        guides = []
        for c in conjuncts:
            if not isinstance(c, Atom):
                continue
            positions = tuple(i for i, t in enumerate(c.args)
                              if isinstance(t, Var) and t.name == f.var)
            if not positions:
                continue
            # (slot index, fetcher) for the non-target arguments
            fetch = []
            for i, t in enumerate(c.args):
                if i in positions:
                    continue
                if isinstance(t, Const):
                    fetch.append((i, None, self.structure.const(t.index)))
                else:
                    fetch.append((i, t.name, None))
            stored = self.structure.rels.get(c.rel)
            if stored is not None:
                # index the relation once on the fixed argument positions
                fixed_slots = tuple(i for i, _, _ in fetch)
                index: Dict[tuple, set] = {}
                for tup in stored:
                    vals = {tup[i] for i in positions}
                    if len(vals) == 1:
                        key = tuple(tup[i] for i in fixed_slots)
                        index.setdefault(key, set()).add(vals.pop())
                empty: set = set()

                def rel_guide(env, index=index, fetch=fetch, empty=empty):
                    key = []
                    for _, name, value in fetch:
                        if name is not None:
                            value = env.get(name)
                            if value is None:
                                return None
                        key.append(value)
                    return index.get(tuple(key), empty)
                guides.append(rel_guide)
            elif c.rel in ("+", MUL) and len(positions) == 1 and len(fetch) == 2:
                pos = positions[0]
                mul = c.rel == MUL
                def arith_guide(env, fetch=fetch, pos=pos, mul=mul):
                    vals = {}
                    for i, name, value in fetch:
                        if name is not None:
                            value = env.get(name)
                            if value is None:
                                return None
                        vals[i] = value
                    if pos == 2:
                        out = vals[0] * vals[1] if mul else vals[0] + vals[1]
                        return {out} if out < n else set()
                    known = vals[1 if pos == 0 else 0]
                    want = vals[2]
                    if mul:
                        if known == 0:
                            return set(range(n)) if want == 0 else set()
                        if want % known == 0 and want // known < n:
                            return {want // known}
                        return set()
                    return {want - known} if 0 <= want - known < n else set()
                guides.append(arith_guide)
        return guides


def evaluate(structure: ArithStructure, f: Formula,
             assignment: Optional[Dict[str, int]] = None,
             mode: str = "macro-semantic",
             timeout_s: Optional[float] = None) -> bool:
    """Evaluate f on the structure under the assignment (default empty)."""
    env = dict(assignment or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise MissingVariableError(f"unassigned free variables: {sorted(missing)}")
    for name, value in env.items():
        if not (0 <= value < structure.n):
            raise EvalError(f"assignment {name}={value} outside universe [{structure.n}]")
    return EvalSession(structure, mode, timeout_s).eval(f, env)


def agree_on_modes(structure: ArithStructure, f: Formula,
                   assignment: Optional[Dict[str, int]] = None) -> bool:
    """True when all three modes give one answer (test helper)."""
    results = {evaluate(structure, f, assignment, mode) for mode in MODES}
    return len(results) == 1
