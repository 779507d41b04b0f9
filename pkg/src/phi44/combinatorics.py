"""Partition sets and multiplicity weights for the tree (C), bubble (B) terms.

The (n+1)-point equation couples lower orders through two index sets:

* triples ``(i1, i2, i3)`` of odd parts summing to ``n`` (three sub-bubbles
  hanging off one four-point vertex), and
* pairs ``(j1, j2)`` with ``j1`` odd and ``j2`` even (one tree leg plus one
  loop bubble).

Weights are exact rationals.

>>> [p.parts for p in triple_partitions(9)]
[(1, 1, 7), (1, 3, 5), (3, 3, 3)]
>>> triple_partitions(5)[0].weight
Fraction(10, 1)
>>> sum(p.weight for p in pair_partitions(3))
Fraction(3, 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cache

__all__ = [
    "PairPartition",
    "TriplePartition",
    "pair_partitions",
    "symmetry_factor",
    "tree_term_counts",
    "triple_partitions",
]


@dataclass(frozen=True)
class TriplePartition:
    parts: tuple[int, int, int]
    weight: Fraction


@dataclass(frozen=True)
class PairPartition:
    parts: tuple[int, int]
    weight: Fraction


def _check_odd(n, minimum):
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"order must be an int, got {type(n).__name__}")
    if n < minimum or n % 2 == 0:
        raise ValueError(f"order must be odd and >= {minimum}, got {n}")


def symmetry_factor(parts) -> int:
    """Number of permutations of ``parts`` that leave the multiset unchanged."""
    out = 1
    for value in set(parts):
        out *= math.factorial(parts.count(value))
    return out


@cache
def _triples(n):
    out = []
    for i1 in range(1, n + 1, 2):
        for i2 in range(i1, n + 1, 2):
            i3 = n - i1 - i2
            if i3 < i2:
                break
            if i3 % 2 == 0:
                continue
            parts = (i1, i2, i3)
            weight = Fraction(
                math.factorial(n),
                math.factorial(i1) * math.factorial(i2) * math.factorial(i3)
                * symmetry_factor(parts),
            )
            out.append(TriplePartition(parts, weight))
    return tuple(out)


def triple_partitions(n: int) -> list[TriplePartition]:
    """Odd triples ``i1 <= i2 <= i3`` with ``i1 + i2 + i3 == n``.

    Each carries the multinomial weight ``n!/(i1! i2! i3! sigma)`` where
    ``sigma`` counts permutations fixing the multiset. Ascending order.
    """
    _check_odd(n, 3)
    return list(_triples(n))


@cache
def _pairs(n):
    # Binomial multiplicity: which of the n legs go to the tree factor.
    # For n = 3 this gives 3, the factor carried by the bubble term of D3.
    return tuple(
        PairPartition((j1, n - j1), Fraction(math.comb(n, j1)))
        for j1 in range(1, n, 2)
    )


def pair_partitions(n: int) -> list[PairPartition]:
    """Pairs ``(j1, j2)``, ``j1`` odd, ``j2`` even, ``j1 + j2 == n``.

    The weight is the binomial ``C(n, j1)``.
    """
    _check_odd(n, 3)
    return list(_pairs(n))


def tree_term_counts(n: int) -> tuple[Fraction, Fraction]:
    """Closed-form counts ``(T_n, T~_n)`` used by the bubble and A-term bounds.

    ``T_n = (n-3)^2/48 + (n-3)/3 + 1`` and ``T~_n = (n-3)^2/48``.

    >>> tree_term_counts(9)
    (Fraction(15, 4), Fraction(3, 4))
    """
    _check_odd(n, 5)
    tilde = Fraction((n - 3) ** 2, 48)
    return tilde + Fraction(n - 3, 3) + 1, tilde
