"""Color-coding: the (p,q) hash family, its verification, and the chi^k builder.

The hash h_{p,q}(m) = (q*m mod p) mod k^2 drives every counting construction
here.  Inside formulas the hash is computed by a rank-9 abbreviation chain
whose intermediate values must stay inside the universe; a product exceeding
n-1 makes the enclosing existential false (relational overflow partiality).
chi^k_phi(xbar) says "at least k distinct witnesses satisfy phi": it guesses
(p,q), then a sorted tuple of k hash values, and demands a witness per value.
Its quantifier rank is exactly max(12, qr(phi)+3).

Validity thresholds are determined empirically per hash-family size k:
``threshold_n(k)`` is the smallest n whose doubling window [n, 2n] passes
both the injectivity lemma check (prime p < k^2 * log2 n', 1 <= q < p) and a
formula-level realizability check (some pair p, q < n' whose overflow-guarded
chain is defined and injective on the subset).  Measured values are cached;
do not extrapolate beyond verified windows.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .formula import (
    And, Atom, Const, Exists, Formula, IndexFamily, BigOr, Macro, Not, TRUE,
    Var, free_vars, quantifier_rank,
)
from .structures import MUL


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def primes_below(bound: float) -> list[int]:
    return [p for p in range(2, max(2, math.ceil(bound))) if p < bound and is_prime(p)]


@dataclass(frozen=True)
class HashParams:
    """A prime modulus p, a multiplier 1 <= q < p, and the family size k."""

    p: int
    q: int
    k: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if not (1 <= self.q < self.p):
            raise ValueError(f"q={self.q} outside 1..p-1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


def hash_value(h: HashParams, m: int) -> int:
    """(q*m mod p) mod k^2."""
    return ((h.q * m) % h.p) % (h.k * h.k)


def find_hash_params(n: int, k: int, X: Iterable[int]) -> Optional[HashParams]:
    """Lexicographically least (p, q) with p prime < k^2*log2(n), 1 <= q < p,
    injective on X; None when no such pair exists."""
    xs = sorted(set(X))
    if len(xs) != k:
        raise ValueError(f"X must have exactly k={k} elements, got {len(xs)}")
    ksq = k * k
    for p in primes_below(ksq * math.log2(n)) if n > 1 else []:
        for q in range(1, p):
            seen = set()
            ok = True
            for m in xs:
                v = ((q * m) % p) % ksq
                if v in seen:
                    ok = False
                    break
                seen.add(v)
            if ok:
                return HashParams(p, q, k)
    return None


def chain_hash(n: int, p: int, q: int, y: int, K: int) -> Optional[int]:
    """Value of the in-formula hash chain, or None when an intermediate
    overflows the universe.  K is the (clamped) modulus constant min(k^2, n-1).

    Mirrors the rank-9 expansion exactly: gamma = y mod p needs p >= 1;
    beta = q*gamma must be < n; alpha = beta mod p; the final existential
    realizes exactly alpha mod K.
    """
    if p == 0 or K <= 0:
        return None
    gamma = y % p
    beta = q * gamma
    if beta >= n:
        return None
    return (beta % p) % K


# internal bound-variable names of the hash chain; macro arguments must avoid them
_CHAIN_VARS = ("v", "v'", "al", "w", "w'", "be", "ga", "z", "z'")


def _hash_eq_expansion(p: Var, q: Var, y: Var, i: int, k: int) -> Formula:
    cK = Const(k * k)
    ci = Const(i)
    v, vp, al, w, wp, be, ga, z, zp = (Var(s) for s in _CHAIN_VARS)
    inner_gamma = Exists(z.name, Exists(zp.name, And((
        Atom(MUL, (z, p, zp)),      # z' = z*p
        Atom("+", (zp, ga, y)),     # y  = z' + ga
        Atom("<", (ga, p)),
    ))))
    inner_beta = Exists(ga.name, And((
        Atom(MUL, (q, ga, be)),     # be = q*ga
        inner_gamma,
    )))
    inner_alpha = Exists(w.name, Exists(wp.name, Exists(be.name, And((
        Atom(MUL, (w, p, wp)),      # w' = w*p
        Atom("+", (wp, al, be)),    # be = w' + al
        Atom("<", (al, p)),
        inner_beta,
    )))))
    return Exists(v.name, Exists(vp.name, Exists(al.name, And((
        Atom(MUL, (v, cK, vp)),     # v' = v * k^2
        Atom("+", (vp, ci, al)),    # al = v' + i
        Atom("<", (ci, cK)),
        inner_alpha,
    )))))


def hash_eq_macro(pvar: Var, qvar: Var, yvar: Var, i: int, k: int) -> Macro:
    """Macro for "h_{p,q}(y) = i" over k^2 colors; quantifier rank 9."""
    if not (0 <= i < k * k):
        raise ValueError(f"hash value {i} outside 0..{k * k - 1}")
    for t in (pvar, qvar, yvar):
        if t.name in _CHAIN_VARS:
            raise ValueError(f"argument {t.name!r} collides with chain internals")

    def sem(session, values):
        p, q, y, ci = values  # ci arrives clamped through constant evaluation
        n = session.n
        cK = min(k * k, n - 1)
        if not ci < cK:
            return False
        got = chain_hash(n, p, q, y, cK)
        return got is not None and got == ci

    return Macro(
        name=f"hashEq[k={k}]",
        args=(pvar, qvar, yvar, Const(i)),
        expand=lambda: _hash_eq_expansion(pvar, qvar, yvar, i, k),
        semantics=sem,
        rank=9,
    )


def mod_eq_macro(x: Var, y: Var, z: Var) -> Macro:
    """Macro for "x = (y mod z)": exists u,u'. u'=u*z & y=u'+x & x<z."""
    u, up = Var("u"), Var("u'")
    if {x.name, y.name, z.name} & {u.name, up.name}:
        raise ValueError("arguments collide with internal variables")

    def sem(session, values):
        xv, yv, zv = values
        return zv > 0 and xv == yv % zv

    return Macro(
        name="modEq",
        args=(x, y, z),
        expand=lambda: Exists(u.name, Exists(up.name, And((
            Atom(MUL, (u, z, up)),
            Atom("+", (up, x, y)),
            Atom("<", (x, z)),
        )))),
        semantics=sem,
        rank=2,
    )


def _fresh_names(avoid: set[str], wanted: Sequence[str]) -> list[str]:
    out = []
    for base in wanted:
        name = base
        while name in avoid or name in _CHAIN_VARS:
            name += "_"
        avoid = avoid | {name}
        out.append(name)
    return out


_VECTOR_CUTOFF = 64  # universe size from which the (p,q) scan is vectorized


def build_chi(k: int, phi: Formula, y: str = "y") -> Formula:
    """chi^k_phi(xbar): at least k pairwise distinct witnesses v with phi(xbar, v).

    Shape (the declared expansion): exists p exists q, a BigOr over sorted
    k-tuples of hash values < k^2, of conjunctions over the tuple of
    exists y (h_{p,q}(y)=i_j and phi).  The conjunct nodes are shared across
    tuples.  chi^0 is true.  qr = max(12, qr(phi)+3).

    The returned node is a Macro carrying that expansion plus a semantic fast
    path: scan (p,q) and count distinct defined chain-hash values among
    witnesses of phi (identical truth value; naive mode uses the expansion).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return TRUE
    fv = free_vars(phi)
    xbar = tuple(sorted(fv - {y}))
    pname, qname = _fresh_names(set(fv) | {y}, ["p", "q"])
    pv, qv, yv = Var(pname), Var(qname), Var(y)
    ksq = k * k

    witness = [
        Exists(y, And((hash_eq_macro(pv, qv, yv, i, k), phi)))
        for i in range(ksq)
    ]
    family = IndexFamily(
        indices=lambda: itertools.combinations(range(ksq), k),
        child=lambda t: And(tuple(witness[i] for i in t)),
        size=comb(ksq, k),
        free_vars=frozenset((pname, qname) + xbar),
        uniform_rank=True,
        label=f"sorted {k}-tuples < {ksq}",
    )
    rank = max(12, quantifier_rank(phi) + 3)
    cell: dict = {}

    def sem(session, values):
        n = session.n
        node = cell["node"]
        if n <= ksq:  # clamped-constant regime: defer to the declared expansion
            return session.eval(node.expansion(), dict(zip(xbar, values)))
        key = ("chiY", id(node), values)
        Y = session.scratch.get(key)
        if Y is None:
            env = dict(zip(xbar, values))
            Y = [v for v in range(n) if session.eval(phi, {**env, y: v})]
            session.scratch[key] = Y
            session._pins.append(node)
        if len(Y) < k:
            return False
        return _scan_pairs(n, ksq, k, Y)

    chi = Macro(
        name=f"chi[k={k}]",
        args=tuple(Var(x) for x in xbar),
        expand=lambda: Exists(pname, Exists(qname, BigOr(family))),
        semantics=sem,
        rank=rank,
    )
    cell["node"] = chi
    return chi


def _scan_pairs(n: int, K: int, k: int, Y: Sequence[int]) -> bool:
    """Is there a pair (p,q) in [n]^2 whose chain hash is defined on enough
    of Y to produce k distinct values?"""
    if n >= _VECTOR_CUTOFF and len(Y) >= k:
        return _scan_pairs_vec(n, K, k, Y)
    for p in range(1, n):
        gamma = [v % p for v in Y]
        for q in range(n):
            distinct = set()
            for g in gamma:
                beta = q * g
                if beta < n:
                    distinct.add((beta % p) % K)
            if len(distinct) >= k:
                return True
    return False


def _scan_pairs_vec(n: int, K: int, k: int, Y: Sequence[int]) -> bool:
    ys = np.asarray(Y, dtype=np.int64)
    qs = np.arange(n, dtype=np.int64)[:, None]
    for p in range(1, n):
        gamma = ys % p
        beta = qs * gamma[None, :]
        vals = np.where(beta < n, (beta % p) % K, -1)
        vals.sort(axis=1)
        fresh = (np.diff(vals, axis=1) != 0) & (vals[:, 1:] >= 0)
        counts = fresh.sum(axis=1) + (vals[:, 0] >= 0)
        if bool((counts >= k).any()):
            return True
    return False


def build_exact(count: int, phi: Formula, y: str = "y") -> Formula:
    """Exactly `count` witnesses: chi^count_phi and not chi^(count+1)_phi."""
    return And((build_chi(count, phi, y), Not(build_chi(count + 1, phi, y))))


# -- lemma verification and thresholds


@dataclass(frozen=True)
class CccReport:
    n: int
    k: int
    checked: int
    failures: Tuple[Tuple[int, ...], ...]
    sampling: str

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "checked": self.checked,
            "failures": [list(s) for s in self.failures],
            "sampling": self.sampling,
        }


_subset_cache: dict[tuple, np.ndarray] = {}


def _subset_array(n: int, k: int, sample: Optional[int], seed: int) -> np.ndarray:
    key = (n, k, sample, seed)
    got = _subset_cache.get(key)
    if got is not None:
        return got
    if sample is None:
        out = np.asarray(list(itertools.combinations(range(n), k)), dtype=np.int64)
    else:
        rng = random.Random(seed)
        total = comb(n, k)
        count = min(sample, total)
        seen = set()
        while len(seen) < count:
            seen.add(tuple(sorted(rng.sample(range(n), k))))
        out = np.asarray(sorted(seen), dtype=np.int64)
    if len(_subset_cache) > 64:
        _subset_cache.clear()
    _subset_cache[key] = out
    return out


def _surviving(subsets: np.ndarray, tables: Iterable[np.ndarray]) -> np.ndarray:
    """Indices of subsets on which no table is defined-and-injective.
    A table maps the universe to hash values, -1 meaning undefined."""
    active = np.arange(len(subsets))
    for table in tables:
        if len(active) == 0:
            break
        vals = table[subsets[active]]
        vals = np.sort(vals, axis=1)
        inj = (vals[:, 0] >= 0) & np.all(np.diff(vals, axis=1) != 0, axis=1)
        active = active[~inj]
    return active


def _lemma_tables(n: int, k: int) -> Iterable[np.ndarray]:
    ksq = k * k
    universe = np.arange(n, dtype=np.int64)
    for p in primes_below(ksq * math.log2(n)) if n > 1 else []:
        for q in range(1, p):
            yield ((q * universe) % p) % ksq


def _chain_tables(n: int, k: int) -> Iterable[np.ndarray]:
    # q=1 is always overflow-free and large p separates well, so those tables
    # come first; the rest of the grid only runs for stubborn subsets.
    K = min(k * k, n - 1)
    universe = np.arange(n, dtype=np.int64)
    for p in range(n - 1, 1, -1):
        yield (universe % p) % K
    for p in range(1, n):
        gamma = universe % p
        for q in range(n):
            if q == 1:
                continue
            beta = q * gamma
            yield np.where(beta < n, (beta % p) % K, -1)


def verify_ccc_lemma(n: int, k: int, sample: Optional[int] = None,
                     seed: int = 0) -> CccReport:
    """Check the hash-family injectivity guarantee on k-subsets of [n].

    ``sample=None`` enumerates every subset; otherwise `sample` seeded random
    subsets are drawn.  A subset fails when no prime p < k^2*log2 n with
    1 <= q < p hashes it injectively.
    """
    if k > n:
        raise ValueError("k must be <= n")
    if k == 0:
        return CccReport(n, k, 1, (), "all" if sample is None else f"random({sample})")
    subsets = _subset_array(n, k, sample, seed)
    bad = _surviving(subsets, _lemma_tables(n, k))
    failures = tuple(tuple(int(x) for x in subsets[i]) for i in bad)
    return CccReport(
        n, k, len(subsets), failures,
        "all" if sample is None else f"random({sample})",
    )


def chain_realizable_failures(n: int, k: int, sample: Optional[int] = None,
                              seed: int = 0) -> int:
    """Count k-subsets with no pair p,q < n whose chain hash is defined and
    injective on them (the condition chi-truth actually needs)."""
    subsets = _subset_array(n, k, sample, seed)
    return len(_surviving(subsets, _chain_tables(n, k)))


_EXHAUSTIVE_K = 3          # largest k verified on all subsets
_SAMPLE_SUBSETS = 300      # sampled subsets per probe point for k > _EXHAUSTIVE_K
_WINDOW_PROBES = 33        # sampled probe points per window for k > _EXHAUSTIVE_K

_point_cache: dict[tuple[int, int], bool] = {}
_threshold_cache: dict[int, int] = {}


def _point_ok(n: int, k: int) -> bool:
    got = _point_cache.get((n, k))
    if got is not None:
        return got
    ok = k * k * math.log2(n) <= n if n > 1 else False
    if ok:
        sample = None if k <= _EXHAUSTIVE_K else _SAMPLE_SUBSETS
        ok = not verify_ccc_lemma(n, k, sample=sample, seed=n).failures
    if ok:
        sample = None if k <= _EXHAUSTIVE_K else _SAMPLE_SUBSETS
        ok = chain_realizable_failures(n, k, sample=sample, seed=n) == 0
    _point_cache[(n, k)] = ok
    return ok


def _window_ok(n: int, k: int) -> bool:
    if k <= _EXHAUSTIVE_K:
        points = range(n, 2 * n + 1)
    else:
        step = max(1, (n + _WINDOW_PROBES - 1) // _WINDOW_PROBES)
        points = sorted(set(list(range(n, 2 * n + 1, step)) + [2 * n]))
    return all(_point_ok(m, k) for m in points)


def threshold_n(k: int) -> int:
    """Smallest n whose window [n, 2n] passes the arithmetic bound
    k^2 <= n'/log2 n' and the empirical hash checks; monotone in k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    got = _threshold_cache.get(k)
    if got is not None:
        return got
    n = 2
    while n * 1.0 < k * k * math.log2(n) or not _window_ok(n, k):
        n += 1
    if k > 1:
        n = max(n, threshold_n(k - 1))
    _threshold_cache[k] = n
    return n
