"""Cluster matching across groups, min-weighting, and the full pipeline.

All weights and weighted results are exact :class:`fractions.Fraction`
values; floats only appear when a report is rendered.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .clustering import Cluster, build_clusters, cluster_distance
from .dataset_model import Dataset, require_valid


@dataclass(frozen=True)
class MatchedClusterPair:
    pair_id: int
    a_cluster: Cluster
    b_cluster: Cluster

    @property
    def s_min(self) -> int:
        return min(self.a_cluster.size, self.b_cluster.size)

    @property
    def w_a(self) -> Fraction:
        return Fraction(self.s_min, self.a_cluster.size ** 2)

    @property
    def w_b(self) -> Fraction:
        return Fraction(self.s_min, self.b_cluster.size ** 2)

    def side(self, side: str) -> Cluster:
        if side == "A":
            return self.a_cluster
        if side == "B":
            return self.b_cluster
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchedClusterPair, ...]
    unmatched_a: tuple[Cluster, ...]
    unmatched_b: tuple[Cluster, ...]
    r_a: Fraction
    r_b: Fraction
    expected_outcome_count_a: Fraction
    expected_outcome_count_b: Fraction

    @property
    def matched_pairs_per_realization(self) -> int:
        return sum(p.s_min for p in self.pairs)

    @property
    def matched_patient_total(self) -> int:
        return 2 * self.matched_pairs_per_realization

    @property
    def expected_outcome_rate_a(self) -> Fraction:
        n = self.matched_pairs_per_realization
        return self.expected_outcome_count_a / n if n else Fraction(0)

    @property
    def expected_outcome_rate_b(self) -> Fraction:
        n = self.matched_pairs_per_realization
        return self.expected_outcome_count_b / n if n else Fraction(0)


def exact_sum(terms: Iterable[tuple[int, int]]) -> Fraction:
    """Sum ``numerator / denominator`` terms exactly.

    Numerators are pooled per denominator first, which keeps the cost
    linear in the number of terms when few distinct denominators occur.
    """
    pooled: dict[int, int] = defaultdict(int)
    for num, den in terms:
        pooled[den] += num
    return sum((Fraction(n, d) for d, n in sorted(pooled.items())), Fraction(0))


def match_clusters(clusters_a: Sequence[Cluster], clusters_b: Sequence[Cluster]):
    """Pair clusters with equal keys.

    Returns ``(pairs, unmatched_a, unmatched_b)``; pairs follow the order
    of ``clusters_a``.  Keys are unique within a group, so each cluster
    takes part in at most one pair.
    """
    b_index = {c.key: c for c in clusters_b}
    pairs = []
    unmatched_a = []
    used_b = set()
    for ca in clusters_a:
        cb = b_index.get(ca.key)
        if cb is None:
            unmatched_a.append(ca)
            continue
        pairs.append(MatchedClusterPair(len(pairs), ca, cb))
        used_b.add(cb.key)
    unmatched_b = [c for c in clusters_b if c.key not in used_b]
    return pairs, unmatched_a, unmatched_b


def match_clusters_literal(clusters_a: Sequence[Cluster], clusters_b: Sequence[Cluster]):
    """Reference matching: linear search over B for every A cluster."""
    pairs = []
    unmatched_a = []
    matched_b = set()
    for ca in clusters_a:
        found = None
        for i, cb in enumerate(clusters_b):
            if cluster_distance(ca, cb) == 0:
                found = i
                break
        if found is None:
            unmatched_a.append(ca)
        else:
            pairs.append(MatchedClusterPair(len(pairs), ca, clusters_b[found]))
            matched_b.add(found)
    unmatched_b = [cb for i, cb in enumerate(clusters_b) if i not in matched_b]
    return pairs, unmatched_a, unmatched_b


def weight_and_score(pairs: Sequence[MatchedClusterPair], clusters_a: Sequence[Cluster],
                     clusters_b: Sequence[Cluster]) -> MatchResult:
    """Weight matched clusters by S/|C|^2 and sum the weighted outcomes.

    Clusters without a partner keep weight zero and contribute nothing.
    """
    # weights as (S, |C|^2); unmatched clusters keep (0, 1)
    weights_a = {c.cluster_id: (0, 1) for c in clusters_a}
    weights_b = {c.cluster_id: (0, 1) for c in clusters_b}
    for pair in pairs:
        weights_a[pair.a_cluster.cluster_id] = (pair.s_min, pair.a_cluster.size ** 2)
        weights_b[pair.b_cluster.cluster_id] = (pair.s_min, pair.b_cluster.size ** 2)

    def weighted(clusters, weights):
        for c in clusters:
            s, den = weights[c.cluster_id]
            yield s * c.outcome_sum, den

    r_a = exact_sum(weighted(clusters_a, weights_a))
    r_b = exact_sum(weighted(clusters_b, weights_b))
    count_a = exact_sum((p.s_min * p.a_cluster.outcome_sum, p.a_cluster.size) for p in pairs)
    count_b = exact_sum((p.s_min * p.b_cluster.outcome_sum, p.b_cluster.size) for p in pairs)

    paired_a = {p.a_cluster.cluster_id for p in pairs}
    paired_b = {p.b_cluster.cluster_id for p in pairs}
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_a=tuple(c for c in clusters_a if c.cluster_id not in paired_a),
        unmatched_b=tuple(c for c in clusters_b if c.cluster_id not in paired_b),
        r_a=r_a,
        r_b=r_b,
        expected_outcome_count_a=count_a,
        expected_outcome_count_b=count_b,
    )


def run_dem(d: Dataset) -> MatchResult:
    """Cluster both groups, match clusters and compute weighted results.

    Raises :class:`~exactmatch.dataset_model.InvalidInputError` when the
    dataset fails validation.
    """
    require_valid(d)
    kw = {"positive": d.positive_outcome, "domain": d.outcome_domain}
    clusters_a = build_clusters(d.group_a, **kw)
    clusters_b = build_clusters(d.group_b, **kw)
    pairs, _, _ = match_clusters(clusters_a, clusters_b)
    return weight_and_score(pairs, clusters_a, clusters_b)
