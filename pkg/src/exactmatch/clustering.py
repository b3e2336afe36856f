"""Partition a therapy group into clusters of identical covariate vectors."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal
from typing import Hashable, Sequence

from .dataset_model import (
    BINARY_DOMAIN,
    CovariateVector,
    InvalidInputError,
    Patient,
    l1_distance,
)


def _id_order(pid: Hashable):
    # ids are opaque; order ints before strs so mixed id types still sort
    return (type(pid).__name__, pid)


@dataclass(frozen=True)
class Cluster:
    """Maximal set of same-group patients sharing one covariate vector.

    ``members`` and ``outcomes`` are aligned and ordered by patient id.
    """

    cluster_id: str
    group: str
    key: CovariateVector
    members: tuple
    outcomes: tuple
    positive: Hashable = 1
    domain: tuple = BINARY_DOMAIN

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def outcome_sum(self) -> int:
        """Number of members whose outcome is the positive value."""
        return sum(1 for o in self.outcomes if o == self.positive)

    @property
    def outcome_histogram(self) -> dict:
        counts = Counter(self.outcomes)
        return {k: counts.get(k, 0) for k in self.domain}


def _make_cluster(index: int, group: str, key: CovariateVector, patients: Sequence[Patient],
                  positive, domain) -> Cluster:
    ordered = sorted(patients, key=lambda p: _id_order(p.id))
    return Cluster(
        cluster_id=f"{group}{index}",
        group=group,
        key=key,
        members=tuple(p.id for p in ordered),
        outcomes=tuple(p.outcome for p in ordered),
        positive=positive,
        domain=tuple(domain),
    )


def _group_label(group: Sequence[Patient]) -> str:
    labels = {p.group for p in group}
    if len(labels) != 1:
        raise InvalidInputError(f"patients from several groups passed together: {sorted(labels)}")
    return labels.pop()


def build_clusters(group: Sequence[Patient], *, positive: Hashable = 1,
                   domain: Sequence = BINARY_DOMAIN) -> list[Cluster]:
    """Cluster ``group`` by exact covariate equality.

    Grouping uses a hash index on the canonical vector, which is
    equivalent to the pairwise zero-distance scan because distance zero
    holds exactly for equal vectors.  Clusters come back sorted by key,
    so the result does not depend on input order.
    """
    if not group:
        return []
    label = _group_label(group)
    index: dict[CovariateVector, list[Patient]] = {}
    for p in group:
        index.setdefault(p.covariates, []).append(p)
    return [
        _make_cluster(i, label, key, index[key], positive, domain)
        for i, key in enumerate(sorted(index, key=lambda k: k.values))
    ]


def build_clusters_literal(group: Sequence[Patient], *, positive: Hashable = 1,
                           domain: Sequence = BINARY_DOMAIN) -> list[Cluster]:
    """Quadratic reference clustering: scan every unclustered later patient.

    Kept as a test oracle and benchmark baseline.  Clusters are returned
    in first-occurrence order, with ids numbered from 1 in that order.
    """
    if not group:
        return []
    label = _group_label(group)
    clustered = [False] * len(group)
    clusters = []
    for v, x in enumerate(group):
        if clustered[v]:
            continue
        current = [x]
        clustered[v] = True
        for u in range(v + 1, len(group)):
            if not clustered[u] and l1_distance(group[u], x) == 0:
                current.append(group[u])
                clustered[u] = True
        clusters.append(_make_cluster(len(clusters) + 1, label, x.covariates, current,
                                      positive, domain))
    return clusters


def cluster_distance(c1: Cluster, c2: Cluster) -> Decimal:
    """Distance between the covariate vectors assigned to two clusters."""
    return l1_distance(c1.key, c2.key)
