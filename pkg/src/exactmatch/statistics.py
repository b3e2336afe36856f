"""Closed-form quantities over clusters and matchings.

Frequencies, expectancies and variances are exact fractions.  The
matching count is an unbounded integer.  Only the chi-square test works
in floating point.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .clustering import Cluster
from .dataset_model import InvalidInputError
from .matching import MatchedClusterPair, MatchResult

SIZE_SCALED = "size_scaled"
FREQUENCY = "frequency"


class UndefinedTestError(ValueError):
    """The contingency table has an empty row or column."""


def _decimal_string(n: int) -> str:
    # the default int->str digit cap (3.11+, backported) rejects large counts
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        return str(n)
    old = getter()
    sys.set_int_max_str_digits(0)
    try:
        return str(n)
    finally:
        sys.set_int_max_str_digits(old)


@dataclass(frozen=True)
class BigCount:
    value: int

    @property
    def digits(self) -> int:
        return len(_decimal_string(self.value))

    def __str__(self) -> str:
        return _decimal_string(self.value)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    dof: int = 1


def relative_frequency(c: Cluster) -> Fraction:
    return Fraction(c.outcome_sum, c.size)


def categorical_frequency(c: Cluster, k: Hashable) -> Fraction:
    """Share of the cluster whose outcome equals ``k``."""
    if k not in c.domain:
        raise InvalidInputError(f"outcome {k!r} not in domain {list(c.domain)}")
    return Fraction(sum(1 for o in c.outcomes if o == k), c.size)


def relative_matching_frequency(pair: MatchedClusterPair, side: str,
                                selection: Iterable[int]) -> Fraction:
    """Matching frequency of one realization on ``side``.

    ``selection`` holds 0-based member positions of the chosen side and
    must contain exactly ``s_min`` distinct positions.
    """
    c = pair.side(side)
    chosen = list(selection)
    if len(chosen) != pair.s_min or len(set(chosen)) != len(chosen):
        raise InvalidInputError(
            f"selection must hold {pair.s_min} distinct members, got {chosen}"
        )
    if any(not 0 <= i < c.size for i in chosen):
        raise InvalidInputError(f"selection {chosen} out of range for cluster of size {c.size}")
    hits = sum(1 for i in chosen if c.outcomes[i] == c.positive)
    return Fraction(hits, c.size)


def count_pair_matchings(a_size: int, b_size: int) -> BigCount:
    if a_size < 1 or b_size < 1:
        raise InvalidInputError("cluster sizes must be positive")
    return BigCount(math.comb(max(a_size, b_size), min(a_size, b_size)))


def count_total_matchings(pairs: Sequence[MatchedClusterPair]) -> BigCount:
    """Number of distinct maximal exact matchings over all pairs."""
    total = 1
    for p in pairs:
        total *= count_pair_matchings(p.a_cluster.size, p.b_cluster.size).value
    return BigCount(total)


def cluster_expectancy(pair: MatchedClusterPair, side: str) -> Fraction:
    c = pair.side(side)
    return Fraction(pair.s_min * c.outcome_sum, c.size ** 2)


def group_expectancy(result: MatchResult, side: str) -> Fraction:
    return sum((cluster_expectancy(p, side) for p in result.pairs), Fraction(0))


def cluster_variance_paper(pair: MatchedClusterPair, side: str) -> Fraction:
    """Variance formula exactly as published, on the hypergeometric count scale.

    Equals ``size`` times :func:`cluster_variance_frequency`.  Singleton
    clusters are always fully matched and get variance 0.
    """
    c = pair.side(side)
    n, s = c.size, pair.s_min
    if n == 1:
        return Fraction(0)
    return (cluster_expectancy(pair, side)
            * (1 - Fraction(c.outcome_sum, n))
            * Fraction(n - s, n - 1))


def cluster_variance_frequency(pair: MatchedClusterPair, side: str) -> Fraction:
    """Variance of the matching frequency over all equiprobable selections."""
    c = pair.side(side)
    n, s, k = c.size, pair.s_min, c.outcome_sum
    if n == 1:
        return Fraction(0)
    p = Fraction(k, n)
    return s * p * (1 - p) * Fraction(n - s, n - 1) / n ** 2


def group_variance(result: MatchResult, side: str, which: str = FREQUENCY) -> Fraction:
    if which == SIZE_SCALED:
        fn = cluster_variance_paper
    elif which == FREQUENCY:
        fn = cluster_variance_frequency
    else:
        raise ValueError(f"which must be {SIZE_SCALED!r} or {FREQUENCY!r}, got {which!r}")
    return sum((fn(p, side) for p in result.pairs), Fraction(0))


def chi_square_2x2(deaths_a: float, n_a: float, deaths_b: float, n_b: float) -> ChiSquareResult:
    """Pearson chi-square (no continuity correction) on a 2x2 outcome table.

    Counts may be fractional, e.g. expected matched counts.  The p-value
    is the upper tail of chi-square with one degree of freedom.
    """
    if n_a <= 0 or n_b <= 0:
        raise InvalidInputError("group sizes must be positive")
    if not (0 <= deaths_a <= n_a and 0 <= deaths_b <= n_b):
        raise InvalidInputError("event counts must lie between 0 and the group size")
    table = ((deaths_a, n_a - deaths_a), (deaths_b, n_b - deaths_b))
    rows = [sum(r) for r in table]
    cols = [table[0][j] + table[1][j] for j in range(2)]
    total = rows[0] + rows[1]
    if min(rows) == 0 or min(cols) == 0:
        raise UndefinedTestError("chi-square undefined: a row or column total is zero")
    stat = 0.0
    for i in range(2):
        for j in range(2):
            expected = rows[i] * cols[j] / total
            stat += (table[i][j] - expected) ** 2 / expected
    # upper tail of chi2(1) at x is erfc(sqrt(x / 2))
    return ChiSquareResult(statistic=stat, p_value=math.erfc(math.sqrt(stat / 2.0)))
