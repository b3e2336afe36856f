"""Ground truth by enumeration and seeded sampling of maximal matchings.

A realization of a matched cluster pair is the subset of ``s_min``
members chosen from the larger cluster; the smaller cluster is always
used in full.  Matching frequencies depend only on that subset, so
within-selection pairings are not enumerated.

Sampling uses numpy's PCG64 bit generator seeded with the given integer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dataset_model import Dataset
from .matching import MatchedClusterPair, run_dem
from .statistics import (
    UndefinedTestError,
    chi_square_2x2,
    cluster_expectancy,
    cluster_variance_frequency,
    count_pair_matchings,
)

DEFAULT_BUDGET = 10 ** 6
RNG_ALGORITHM = "numpy.random.PCG64"
_CHUNK = 8192


class EnumerationBudgetError(RuntimeError):
    """Enumeration would exceed the allowed number of realizations."""


@dataclass(frozen=True)
class PairSelection:
    """Members chosen for one pair: ``side`` is the side they come from.

    ``side`` is ``None`` when both clusters have equal size and are fully
    used.
    """

    side: str | None
    indices: tuple[int, ...]


@dataclass(frozen=True)
class MatchingRealization:
    selections: tuple[PairSelection, ...]
    frequency_a: Fraction
    frequency_b: Fraction
    outcome_count_a: int
    outcome_count_b: int


def _larger_side(pair: MatchedClusterPair) -> str | None:
    a, b = pair.a_cluster.size, pair.b_cluster.size
    if a == b:
        return None
    return "A" if a > b else "B"


def _realize(pairs: Sequence[MatchedClusterPair],
             selections: Sequence[PairSelection]) -> MatchingRealization:
    freq = {"A": Fraction(0), "B": Fraction(0)}
    count = {"A": 0, "B": 0}
    for pair, sel in zip(pairs, selections):
        for side in ("A", "B"):
            c = pair.side(side)
            if side == sel.side:
                hits = sum(1 for i in sel.indices if c.outcomes[i] == c.positive)
            else:
                hits = c.outcome_sum
            freq[side] += Fraction(hits, c.size)
            count[side] += hits
    return MatchingRealization(
        selections=tuple(selections),
        frequency_a=freq["A"],
        frequency_b=freq["B"],
        outcome_count_a=count["A"],
        outcome_count_b=count["B"],
    )


def enumerate_realizations(pair: MatchedClusterPair,
                           budget: int = DEFAULT_BUDGET) -> list[MatchingRealization]:
    """Every maximal matching of one pair, in lexicographic subset order."""
    total = count_pair_matchings(pair.a_cluster.size, pair.b_cluster.size).value
    if total > budget:
        raise EnumerationBudgetError(
            f"pair {pair.pair_id} has {total} realizations, budget is {budget}"
        )
    side = _larger_side(pair)
    if side is None:
        subsets = [tuple(range(pair.s_min))]
    else:
        subsets = itertools.combinations(range(pair.side(side).size), pair.s_min)
    return [_realize([pair], [PairSelection(side, idx)]) for idx in subsets]


def sample_realizations(pairs: Sequence[MatchedClusterPair], count: int,
                        seed: int) -> list[MatchingRealization]:
    """Draw ``count`` independent uniform realizations over all pairs."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for _ in range(count):
        selections = []
        for pair in pairs:
            side = _larger_side(pair)
            if side is None:
                selections.append(PairSelection(None, tuple(range(pair.s_min))))
                continue
            n = pair.side(side).size
            chosen = rng.choice(n, size=pair.s_min, replace=False)
            selections.append(PairSelection(side, tuple(sorted(int(i) for i in chosen))))
        out.append(_realize(pairs, selections))
    return out


def sample_uniform_realization(pairs: Sequence[MatchedClusterPair],
                               seed: int) -> MatchingRealization:
    return sample_realizations(pairs, 1, seed)[0]


def _sampled_hits(pairs: Sequence[MatchedClusterPair], r: int, rng: np.random.Generator):
    """Per-sample positive-outcome counts and running frequency means per side.

    Subsets are drawn by ranking uniform keys.  Outcomes are sorted first
    so the stream depends on outcome multisets only, not member ids.
    Running means are formed per pair from exact integer cumulative
    counts, so rounding error does not grow with ``r``.
    """
    steps = np.arange(1, r + 1)
    hits = {"A": np.zeros(r, dtype=np.int64), "B": np.zeros(r, dtype=np.int64)}
    running = {"A": np.zeros(r), "B": np.zeros(r)}
    for pair in pairs:
        side = _larger_side(pair)
        for s in ("A", "B"):
            c = pair.side(s)
            if s != side:
                hits[s] += c.outcome_sum
                running[s] += c.outcome_sum / c.size
                continue
            flags = np.sort(np.array([o == c.positive for o in c.outcomes], dtype=np.int64))
            got = np.empty(r, dtype=np.int64)
            for start in range(0, r, _CHUNK):
                stop = min(start + _CHUNK, r)
                keys = rng.random((stop - start, c.size))
                chosen = np.argpartition(keys, pair.s_min - 1, axis=1)[:, :pair.s_min]
                got[start:stop] = flags[chosen].sum(axis=1)
            hits[s] += got
            running[s] += np.cumsum(got) / (c.size * steps)
    return hits, running


@dataclass(frozen=True)
class ConvergenceStudy:
    samples: int
    seed: int
    running_mean_a: np.ndarray
    running_mean_b: np.ndarray
    expected_a: Fraction
    expected_b: Fraction
    variance_a: Fraction
    variance_b: Fraction
    rng: str = RNG_ALGORITHM

    def tolerance(self, side: str, sigmas: float = 4.0) -> float:
        var = self.variance_a if side == "A" else self.variance_b
        return sigmas * float(var) ** 0.5 / self.samples ** 0.5

    def final(self, side: str) -> float:
        return float((self.running_mean_a if side == "A" else self.running_mean_b)[-1])


def convergence_study(pairs: Sequence[MatchedClusterPair], r: int, seed: int) -> ConvergenceStudy:
    """Running means of the summed matching frequencies over ``r`` draws.

    The closed-form expectancy and the per-draw variance are attached so
    callers can check the law-of-large-numbers bound.
    """
    if r < 1:
        raise ValueError("sample count must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    _, running = _sampled_hits(pairs, r, rng)

    def total(fn, side):
        return sum((fn(p, side) for p in pairs), Fraction(0))

    return ConvergenceStudy(
        samples=r,
        seed=seed,
        running_mean_a=running["A"],
        running_mean_b=running["B"],
        expected_a=total(cluster_expectancy, "A"),
        expected_b=total(cluster_expectancy, "B"),
        variance_a=total(cluster_variance_frequency, "A"),
        variance_b=total(cluster_variance_frequency, "B"),
    )


@dataclass(frozen=True)
class RealizationRow:
    count_a: int
    count_b: int
    p_value: float | None


@dataclass(frozen=True)
class ComparisonStudy:
    samples: int
    seed: int
    matched_pairs: int
    rows: tuple[RealizationRow, ...]
    expected_count_a: Fraction
    expected_count_b: Fraction
    rng: str = RNG_ALGORITHM

    def mean_count(self, side: str) -> float:
        vals = [row.count_a if side == "A" else row.count_b for row in self.rows]
        return sum(vals) / len(vals)

    def count_std(self, side: str) -> float:
        vals = np.array([row.count_a if side == "A" else row.count_b for row in self.rows], float)
        return float(vals.std())

    def p_values(self) -> list[float]:
        return [row.p_value for row in self.rows if row.p_value is not None]


def realization_comparison_study(dataset: Dataset, r: int, seed: int) -> ComparisonStudy:
    """Per-realization matched outcome counts and chi-square p-values.

    Mirrors repeatedly drawing one maximal exact matching and testing it,
    which shows how far single matchings scatter around the expectancy.
    """
    if r < 1:
        raise ValueError("sample count must be at least 1")
    result = run_dem(dataset)
    rng = np.random.Generator(np.random.PCG64(seed))
    hits, _ = _sampled_hits(result.pairs, r, rng)
    n = result.matched_pairs_per_realization
    rows = []
    for ca, cb in zip(hits["A"].tolist(), hits["B"].tolist()):
        p = None
        if n:
            try:
                p = chi_square_2x2(ca, n, cb, n).p_value
            except UndefinedTestError:
                p = None
        rows.append(RealizationRow(ca, cb, p))
    return ComparisonStudy(
        samples=r,
        seed=seed,
        matched_pairs=n,
        rows=tuple(rows),
        expected_count_a=result.expected_outcome_count_a,
        expected_count_b=result.expected_outcome_count_b,
    )
