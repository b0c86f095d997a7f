import itertools
import math
import random

import pytest

from foarith.colorcoding import (
    CccReport, HashParams, build_chi, build_exact, chain_hash, find_hash_params,
    hash_eq_macro, hash_value, mod_eq_macro, threshold_n, verify_ccc_lemma,
)
from foarith.evaluate import EvalSession, evaluate, MODES
from foarith.formula import (
    And, Atom, Exists, Forall, Not, Or, TRUE, Var, expand_macros,
    quantifier_rank, structurally_equal,
)
from foarith.structures import ArithStructure, Vocabulary
from foarith.syntax import parse_formula

PHI_P = Atom("P", (Var("y"),))


def p_structure(n, members):
    return ArithStructure(n, {"P": {(v,) for v in members}})


# -- hash_value fixtures (direct arithmetic from the stated formula)

def test_hash_value_examples():
    assert hash_value(HashParams(5, 2, 2), 7) == (14 % 5) % 4 == 0
    assert hash_value(HashParams(2, 1, 1), 9) == 0
    assert hash_value(HashParams(3, 1, 2), 11) == 2


def test_hash_params_validation():
    with pytest.raises(ValueError):
        HashParams(4, 1, 2)  # not prime
    with pytest.raises(ValueError):
        HashParams(5, 0, 2)  # q = 0 excluded
    with pytest.raises(ValueError):
        HashParams(5, 5, 2)  # q >= p


# -- find_hash_params: oracle = independent exhaustive (p, q) search

def oracle_pairs(n, k, X):
    ksq = k * k
    out = []
    bound = ksq * math.log2(n)
    for p in range(2, math.ceil(bound) + 1):
        if p >= bound or any(p % d == 0 for d in range(2, p)):
            continue
        for q in range(1, p):
            values = [((q * m) % p) % ksq for m in sorted(X)]
            if len(set(values)) == len(X):
                out.append((p, q))
    return out


def test_find_hash_params_lex_least_against_oracle():
    cases = [(16, 2, {3, 11}), (10, 2, {0, 5}), (32, 3, {1, 9, 30})]
    for n, k, X in cases:
        pairs = oracle_pairs(n, k, X)
        got = find_hash_params(n, k, X)
        if pairs:
            assert (got.p, got.q) == min(pairs)
        else:
            assert got is None


def test_find_hash_params_fixtures():
    got = find_hash_params(16, 2, {3, 11})
    assert (got.p, got.q) == (3, 1)
    assert hash_value(got, 3) != hash_value(got, 11)
    for n in (5, 9, 40):
        got = find_hash_params(n, 1, {n - 1})
        assert (got.p, got.q) == (2, 1)
    # regression fixture: n=4, k=2, X={0,2} is separated by (3,1)
    got = find_hash_params(4, 2, {0, 2})
    assert (got.p, got.q) == (3, 1)


def test_find_hash_params_wrong_size():
    with pytest.raises(ValueError):
        find_hash_params(8, 2, {1})


# -- verify_ccc_lemma

def test_verify_ccc_examples():
    r = verify_ccc_lemma(32, 2)
    assert (r.checked, r.failures) == (496, ())
    r = verify_ccc_lemma(5, 1)
    assert (r.checked, r.failures) == (5, ())
    r = verify_ccc_lemma(6, 6)
    assert r.checked == 1


def test_verify_ccc_sampling_is_seed_deterministic():
    a = verify_ccc_lemma(40, 2, sample=50, seed=3)
    b = verify_ccc_lemma(40, 2, sample=50, seed=3)
    assert a == b and a.checked == 50


def test_verify_ccc_reports_failures_below_window():
    r = verify_ccc_lemma(4, 1)  # no prime < log2(4) = 2
    assert r.failures == ((0,), (1,), (2,), (3,))


# -- thresholds (measured values are pinned as regressions)

def test_threshold_k1():
    assert threshold_n(1) == 5


def test_threshold_k2():
    t = threshold_n(2)
    assert t == 16
    assert t >= 16  # arithmetic floor: 16/log2(16) = 4 = k^2


def test_threshold_monotone():
    assert threshold_n(1) <= threshold_n(2) <= threshold_n(3)


# -- hash_eq_macro

def test_hash_eq_rank_is_nine():
    m = hash_eq_macro(Var("p"), Var("q"), Var("y"), 0, 2)
    assert quantifier_rank(m) == 9
    assert quantifier_rank(m.expansion()) == 9


def test_hash_eq_value_fixture():
    a = ArithStructure(32, {})
    m = hash_eq_macro(Var("p"), Var("q"), Var("y"), 0, 2)
    assert evaluate(a, m, {"p": 5, "q": 2, "y": 7}) is True  # hash_value example
    for i in (1, 2, 3):
        mi = hash_eq_macro(Var("p"), Var("q"), Var("y"), i, 2)
        assert evaluate(a, mi, {"p": 5, "q": 2, "y": 7}) is False


def test_hash_eq_overflow_partiality():
    # q*(y mod p) = 16 >= 6 makes the chain false, in both semantics
    a = ArithStructure(6, {})
    env = {"p": 5, "q": 4, "y": 4}
    for i in range(4):
        m = hash_eq_macro(Var("p"), Var("q"), Var("y"), i, 2)
        assert evaluate(a, m, env) is False
        assert evaluate(a, m.expansion(), env, mode="naive") is False


def test_hash_eq_bad_index():
    with pytest.raises(ValueError):
        hash_eq_macro(Var("p"), Var("q"), Var("y"), 4, 2)


def test_chain_matches_hash_value_when_defined():
    for n in (16, 40):
        for p in range(1, n):
            for q in range(0, n):
                for y in range(0, n, 3):
                    got = chain_hash(n, p, q, y, min(4, n - 1))
                    if got is not None and q * (y % p) < n:
                        if all(p % d for d in range(2, p)) and p > 1 and 1 <= q < p:
                            assert got == hash_value(HashParams(p, q, 2), y)


def test_hash_eq_macro_agrees_with_expansion_exhaustive():
    # all structures n <= 12, all (p, q, y, i), k = 2
    for n in range(1, 13):
        a = ArithStructure(n, {})
        for i in range(4):
            m = hash_eq_macro(Var("p"), Var("q"), Var("y"), i, 2)
            eq = Forall("p", Forall("q", Forall("y",
                  Or((And((m.expansion(), m)),
                      And((Not(m.expansion()), Not(m))))))))
            assert evaluate(a, eq, mode="macro-semantic") is True, (n, i)


def test_hash_eq_naive_agrees_small():
    for n in (1, 2, 3, 4, 5):
        a = ArithStructure(n, {})
        for i in range(4):
            m = hash_eq_macro(Var("p"), Var("q"), Var("y"), i, 2)
            exp = m.expansion()
            for p in range(n):
                for q in range(n):
                    for y in range(n):
                        env = {"p": p, "q": q, "y": y}
                        want = evaluate(a, exp, env, mode="naive")
                        assert evaluate(a, exp, env, mode="memoized") == want
                        assert evaluate(a, m, env) == want


# -- mod macro (the Thm 2.3 proof abbreviation pattern)

def test_mod_macro_expansion_shape():
    m = mod_eq_macro(Var("x"), Var("y"), Var("z"))
    vocab = Vocabulary(constant_budget=0)
    want = parse_formula("exists u. exists u'. (×(u,z,u') & +(u',x,y) & x < z)", vocab)
    assert structurally_equal(m.expansion(), want)
    assert quantifier_rank(m) == 2


def test_mod_macro_agrees_with_expansion():
    for n in (1, 2, 5, 9):
        a = ArithStructure(n, {})
        m = mod_eq_macro(Var("x"), Var("y"), Var("z"))
        for x, y, z in itertools.product(range(n), repeat=3):
            env = {"x": x, "y": y, "z": z}
            assert evaluate(a, m, env) == evaluate(a, m.expansion(), env, mode="naive")


# -- build_chi

def test_chi_zero_is_true():
    assert build_chi(0, PHI_P) is TRUE


def test_chi_rank_formula():
    # qr(chi^k_phi) = max(12, qr(phi)+3) for k in 1..5, phi ranks 0..10
    for r in range(11):
        phi = PHI_P
        for d in range(r):
            phi = Exists(f"u{d}", And((Atom("E", (Var("y"), Var(f"u{d}"))), phi)))
        assert quantifier_rank(phi) == r
        for k in range(1, 6):
            chi = build_chi(k, phi)
            assert quantifier_rank(chi) == max(12, r + 3), (k, r)


def test_chi_rank_fixture_via_expansion():
    chi = build_chi(2, PHI_P)
    assert quantifier_rank(chi) == 12
    assert quantifier_rank(expand_macros(chi)) == 12
    chi3 = build_chi(3, Atom("E", (Var("x"), Var("y"))))
    assert quantifier_rank(chi3) == 12


def test_chi_counts_witnesses_at_thresholds():
    rng = random.Random(5)
    for k in (1, 2):
        chi = build_chi(k, PHI_P)
        n = threshold_n(k)
        for _ in range(60):
            members = set(rng.sample(range(n), rng.randrange(0, k + 3)))
            a = p_structure(n, members)
            assert evaluate(a, chi) == (len(members) >= k), (k, n, members)


def test_chi_cardinality_fixture_n32():
    chi = build_chi(2, PHI_P)
    assert evaluate(p_structure(32, {3, 10, 20}), chi) is True
    assert evaluate(p_structure(32, {3}), chi) is False


def test_chi_modes_agree_small():
    rng = random.Random(11)
    chi = build_chi(2, PHI_P)
    for n in (2, 4, 5):
        for _ in range(3):
            members = set(rng.sample(range(n), rng.randrange(0, n + 1)))
            a = p_structure(n, members)
            want = evaluate(a, chi, mode="naive")
            assert evaluate(a, chi, mode="memoized") == want
            assert evaluate(a, chi, mode="macro-semantic") == want


def test_chi_free_variables_pass_through():
    phi = Atom("E", (Var("x"), Var("y")))
    chi = build_chi(2, phi)
    a = ArithStructure(32, {"E": {(0, v) for v in range(1, 5)} | {(1, 2)}})
    assert evaluate(a, chi, {"x": 0}) is True
    assert evaluate(a, chi, {"x": 1}) is False


def test_build_exact():
    assert evaluate(p_structure(32, set()), build_exact(0, PHI_P)) is True
    assert evaluate(p_structure(32, {4, 7}), build_exact(2, PHI_P)) is True
    assert evaluate(p_structure(32, {4, 7, 9}), build_exact(2, PHI_P)) is False
    assert quantifier_rank(build_exact(2, PHI_P)) == quantifier_rank(build_chi(3, PHI_P))
