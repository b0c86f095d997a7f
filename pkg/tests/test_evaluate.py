import itertools

import pytest
from hypothesis import given, settings, strategies as st

from foarith.evaluate import (
    EvalSession, EvalTimeout, MissingVariableError, UnregisteredMacroError,
    evaluate, MODES,
)
from foarith.formula import (
    And, Atom, BigAnd, BigOr, Const, Equal, Exists, Forall, IndexFamily,
    Macro, Not, Or, Var,
)
from foarith.structures import MUL, ArithStructure, Vocabulary
from foarith.syntax import parse_formula

VOCAB = Vocabulary((("E", 2), ("P", 1)), constant_budget=8)


def parse(text):
    return parse_formula(text, VOCAB)


def test_exists_edge():
    a = ArithStructure(4, {"E": {(0, 1)}})
    assert evaluate(a, parse("exists x. exists y. E(x,y)")) is True


def test_arithmetic_overflow_is_tuple_absence():
    a = ArithStructure(3, {})
    assert evaluate(a, parse("exists z. +(2,2,z)")) is False
    b = ArithStructure(5, {})
    assert evaluate(b, parse("exists z. +(2,2,z)")) is True


def test_constant_clamping():
    a = ArithStructure(3, {})
    assert evaluate(a, parse("c5 = c2")) is True
    assert evaluate(a, parse("c1 = c2")) is False


def test_n1_structure_conventions():
    a = ArithStructure(1, {})
    assert evaluate(a, parse("forall x. forall y. !(x < y)")) is True
    assert evaluate(a, parse("c3 = c0")) is True


def test_missing_free_variable():
    a = ArithStructure(2, {})
    with pytest.raises(MissingVariableError):
        evaluate(a, parse("P(x)"))


def test_unknown_relation_at_eval():
    a = ArithStructure(2, {})
    f = Atom("Q", (Const(0),))
    with pytest.raises(Exception):
        evaluate(a, f)


def test_unregistered_macro_in_macro_mode():
    m = Macro("m", (), expand=lambda: Equal(Const(0), Const(0)), semantics=None)
    a = ArithStructure(2, {})
    assert evaluate(a, m, mode="naive") is True
    assert evaluate(a, m, mode="memoized") is True
    with pytest.raises(UnregisteredMacroError):
        evaluate(a, m, mode="macro-semantic")


def test_macro_semantics_used_in_macro_mode():
    m = Macro("m", (Var("x"),), expand=lambda: Atom("P", (Var("x"),)),
              semantics=lambda session, values: values[0] == 1)
    a = ArithStructure(3, {"P": {(1,)}})
    for v in range(3):
        assert (
            evaluate(a, m, {"x": v}, mode="macro-semantic")
            == evaluate(a, m, {"x": v}, mode="naive")
        )


def test_big_family_conventions():
    empty_or = BigOr(IndexFamily(lambda: iter(()), lambda i: None, 0, frozenset()))
    empty_and = BigAnd(IndexFamily(lambda: iter(()), lambda i: None, 0, frozenset()))
    a = ArithStructure(2, {})
    assert evaluate(a, empty_or) is False
    assert evaluate(a, empty_and) is True


def test_timeout_fires():
    # exponential blowup: nested quantifier sweep over a largish universe
    f = parse("forall a. forall b. forall c. forall d. exists e. !(a = b) | a = b")
    a = ArithStructure(40, {})
    with pytest.raises(EvalTimeout):
        evaluate(a, f, mode="naive", timeout_s=0.005)


@st.composite
def random_structure(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    edges = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                         max_size=6))
    ps = draw(st.sets(st.integers(0, n - 1), max_size=n))
    return ArithStructure(n, {"E": edges, "P": {(p,) for p in ps}})


# local strategy for closed formulas of modest rank
def closed(max_rank=3):
    vars3 = ["x", "y", "z"]
    terms = st.one_of(
        st.sampled_from([Var(v) for v in vars3]),
        st.integers(0, 7).map(Const),
    )
    atoms = st.one_of(
        st.tuples(terms, terms).map(lambda t: Equal(*t)),
        st.tuples(terms, terms).map(lambda t: Atom("<", t)),
        st.tuples(terms, terms).map(lambda t: Atom("E", t)),
        terms.map(lambda t: Atom("P", (t,))),
        st.tuples(terms, terms, terms).map(lambda t: Atom("+", t)),
        st.tuples(terms, terms, terms).map(lambda t: Atom(MUL, t)),
    )

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.lists(children, min_size=2, max_size=3).map(lambda cs: And(tuple(cs))),
            st.lists(children, min_size=2, max_size=3).map(lambda cs: Or(tuple(cs))),
            st.tuples(st.sampled_from(vars3), children).map(lambda t: Exists(*t)),
            st.tuples(st.sampled_from(vars3), children).map(lambda t: Forall(*t)),
        )

    body = st.recursive(atoms, extend, max_leaves=10)
    return body.map(lambda f: Forall("x", Forall("y", Forall("z", f))))


@settings(max_examples=150, deadline=None)
@given(closed(), random_structure())
def test_modes_agree(f, a):
    results = {evaluate(a, f, mode=m) for m in MODES}
    assert len(results) == 1


def test_guided_exists_matches_full_scan():
    a = ArithStructure(6, {"E": {(0, 1), (2, 3), (3, 3)}, "P": {(3,)}})
    f = Exists("u", And((Atom("E", (Var("u"), Var("v"))), Atom("P", (Var("u"),)))))
    for v in range(6):
        assert (
            evaluate(a, f, {"v": v}, mode="memoized")
            == evaluate(a, f, {"v": v}, mode="naive")
        )


def test_dag_sharing_consistency():
    shared = Exists("w", Atom("E", (Var("x"), Var("w"))))
    f = Forall("x", Or((Not(shared), shared)))
    a = ArithStructure(4, {"E": {(1, 2)}})
    for m in MODES:
        assert evaluate(a, f, mode=m) is True
