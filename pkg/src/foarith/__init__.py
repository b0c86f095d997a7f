"""foarith: bounded-quantifier-rank first-order sentences over finite
structures with built-in arithmetic, with brute-force oracles for every
construction and a compiler to bounded-depth circuits."""

__version__ = "0.1.0"
