"""Concrete syntax: parse_formula / render_formula.

Grammar (whitespace-insensitive; ``#`` starts a line comment):

    formula := quant | binop
    quant   := ("exists"|"forall") VAR "." formula
    binop   := unary (("&"|"|") unary)*        # & binds tighter than |
    unary   := "!" unary | "(" formula ")" | atom
    atom    := REL "(" term ("," term)* ")" | term ("="|"!="|"<") term
    term    := VAR | "c" NAT

``a != b`` is sugar for ``!(a = b)``.  A bare NAT in term position is
accepted as sugar for the constant with that index (rendering always emits
the ``cNAT`` form).  Connectives parse to flat n-ary And/Or nodes, so
parse(render(f)) is structurally f for Macro-free, grammar-expressible
formulas.  Macro nodes render as ``name(args)`` plus a sidecar expansion
table; Big nodes render materialized.  The degenerate empty connectives
render as the always-true ``c0 = c0`` / always-false ``c0 != c0``.
"""

from __future__ import annotations

import re
from typing import Iterator, Optional

from .formula import (
    And, Atom, BigAnd, BigOr, Const, Equal, Exists, Forall, Formula, Macro,
    Not, Or, Term, Var, materialize,
)
from .structures import MUL, Vocabulary


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<nat>[0-9]+)
  | (?P<neq>!=)
  | (?P<sym>[()!,.&|=<×*+])
    """,
    re.VERBOSE,
)

_CONST_RE = re.compile(r"^c([0-9]+)$")
_KEYWORDS = {"exists", "forall"}


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(_Token(kind, m.group(), i))
        i = m.end()
    out.append(_Token("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, tokens: list[_Token], vocab: Vocabulary):
        self.toks = tokens
        self.i = 0
        self.vocab = vocab

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.pos)
        return t

    def formula(self) -> Formula:
        t = self.peek()
        if t.kind == "name" and t.text in _KEYWORDS:
            self.next()
            var = self.next()
            if var.kind != "name" or var.text in _KEYWORDS or _CONST_RE.match(var.text):
                raise ParseError("expected a variable after quantifier", var.pos)
            self.expect(".")
            body = self.formula()
            return Exists(var.text, body) if t.text == "exists" else Forall(var.text, body)
        return self.or_level()

    def or_level(self) -> Formula:
        parts = [self.and_level()]
        while self.peek().text == "|":
            self.next()
            parts.append(self.and_level())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def and_level(self) -> Formula:
        parts = [self.unary()]
        while self.peek().text == "&":
            self.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        t = self.peek()
        if t.text == "!":
            self.next()
            return Not(self.unary())
        if t.text == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self) -> Formula:
        t = self.peek()
        # prefix relation atom: REL(t1,...,tk) for named or +/x relations
        if (t.kind == "name" and t.text not in _KEYWORDS and not _CONST_RE.match(t.text)
                and self.toks[self.i + 1].text == "(") or t.text in ("+", MUL, "*"):
            rel_tok = self.next()
            rel = MUL if rel_tok.text in (MUL, "*") else rel_tok.text
            if not self.vocab.has(rel):
                raise ParseError(f"unknown relation {rel!r}", rel_tok.pos)
            self.expect("(")
            args = [self.term()]
            while self.peek().text == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            want = self.vocab.arity(rel)
            if len(args) != want:
                raise ParseError(
                    f"relation {rel!r} expects {want} arguments, got {len(args)}",
                    rel_tok.pos,
                )
            return Atom(rel, tuple(args))
        left = self.term()
        op = self.next()
        if op.text == "=":
            return Equal(left, self.term())
        if op.kind == "neq":
            return Not(Equal(left, self.term()))
        if op.text == "<":
            return Atom("<", (left, self.term()))
        raise ParseError(f"expected '=', '!=' or '<', found {op.text!r}", op.pos)

    def term(self) -> Term:
        t = self.next()
        if t.kind == "nat":
            return self._const(int(t.text), t.pos)
        if t.kind != "name" or t.text in _KEYWORDS:
            raise ParseError(f"expected a term, found {t.text!r}", t.pos)
        m = _CONST_RE.match(t.text)
        if m:
            return self._const(int(m.group(1)), t.pos)
        return Var(t.text)

    def _const(self, index: int, pos: int) -> Const:
        if index >= self.vocab.constant_budget:
            raise ParseError(
                f"constant index {index} outside budget C({self.vocab.constant_budget})",
                pos,
            )
        return Const(index)


def parse_formula(text: str, vocab: Vocabulary) -> Formula:
    """Parse concrete syntax, checking arities and constants against vocab."""
    p = _Parser(_tokenize(text), vocab)
    f = p.formula()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.pos)
    return f


# precedence levels for rendering: 0 formula, 1 or, 2 and, 3 unary
def _render(f: Formula, prec: int, budget: int) -> str:
    if isinstance(f, (BigOr, BigAnd)):
        f = materialize(f, budget)
    if isinstance(f, And):
        if not f.children:
            return "c0 = c0"
        s = " & ".join(_render(c, 3, budget) for c in f.children)
        return f"({s})" if prec > 2 else s
    if isinstance(f, Or):
        if not f.children:
            return "c0 != c0"
        s = " | ".join(_render(c, 2, budget) for c in f.children)
        return f"({s})" if prec > 1 else s
    if isinstance(f, Not):
        if isinstance(f.child, Equal):
            return f"{f.child.left} != {f.child.right}"
        return "!" + _render(f.child, 3, budget)
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        s = f"{q} {f.var}. {_render(f.body, 0, budget)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, Equal):
        return f"{f.left} = {f.right}"
    if isinstance(f, Atom):
        if f.rel == "<":
            return f"{f.args[0]} < {f.args[1]}"
        return f"{f.rel}({','.join(str(t) for t in f.args)})"
    if isinstance(f, Macro):
        return f"{f.name}({','.join(str(t) for t in f.args)})"
    raise TypeError(f"not a formula node: {f!r}")


def render_formula(f: Formula, budget: int = 100_000) -> str:
    """Render to concrete syntax.  Big nodes are materialized (budget-capped);
    Macro nodes render as name(args) -- see macro_sidecar for expansions."""
    return _render(f, 0, budget)


def macro_sidecar(f: Formula, budget: int = 100_000) -> dict[str, str]:
    """Rendered expansions for every Macro reachable without forcing Big
    families, keyed by macro name (one entry per name)."""
    out: dict[str, str] = {}

    def go(g: Formula):
        if isinstance(g, Macro):
            if g.name not in out:
                exp = g.expansion()
                out[g.name] = render_formula(exp, budget)
                go(exp)
            return
        if isinstance(g, Not):
            go(g.child)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                go(c)
        elif isinstance(g, (Exists, Forall)):
            go(g.body)
        elif isinstance(g, (BigOr, BigAnd)) and g.family.size > 0:
            go(g.family.first_child())

    go(f)
    return out
