"""Shared generators and brute-force oracles for the test suite.

The oracles here deliberately avoid the library's own enumeration and
closed forms: they work on raw outcome lists with itertools.
"""

from __future__ import annotations

import csv
import itertools
import random
from fractions import Fraction
from pathlib import Path

from exactmatch.clustering import Cluster
from exactmatch.dataset_model import CovariateVector, Dataset, Patient
from exactmatch.matching import MatchedClusterPair


def random_dataset(seed: int, max_patients: int = 200, max_dim: int = 6,
                   levels: int = 3) -> Dataset:
    rng = random.Random(seed)
    total = rng.randint(2, max_patients)
    n_a = rng.randint(1, total - 1)
    n_b = total - n_a
    s = rng.randint(1, max_dim)
    rate_a, rate_b = rng.random(), rng.random()

    def make(label, n, rate):
        return [
            Patient(f"{label.lower()}{i}", label,
                    tuple(rng.randrange(levels) for _ in range(s)),
                    int(rng.random() < rate))
            for i in range(n)
        ]

    return Dataset(make("A", n_a, rate_a), make("B", n_b, rate_b),
                   tuple(f"x{i}" for i in range(s)))


def make_pair(outcomes_a, outcomes_b, key=(0,)) -> MatchedClusterPair:
    vec = CovariateVector.parse(key)
    ca = Cluster("A0", "A", vec, tuple(f"a{i}" for i in range(len(outcomes_a))),
                 tuple(outcomes_a))
    cb = Cluster("B0", "B", vec, tuple(f"b{i}" for i in range(len(outcomes_b))),
                 tuple(outcomes_b))
    return MatchedClusterPair(0, ca, cb)


def random_pair(rng: random.Random, max_size: int = 12) -> MatchedClusterPair:
    a = rng.randint(1, max_size)
    b = rng.randint(1, max_size)
    return make_pair([rng.randint(0, 1) for _ in range(a)], [rng.randint(0, 1) for _ in range(b)])


def selection_frequencies(outcomes, s_min):
    """Matching frequency of every equiprobable ``s_min``-subset of a cluster."""
    n = len(outcomes)
    return [Fraction(sum(outcomes[i] for i in subset), n)
            for subset in itertools.combinations(range(n), s_min)]


def moments(values):
    values = list(values)
    mean = sum(values, Fraction(0)) / len(values)
    var = sum(((v - mean) ** 2 for v in values), Fraction(0)) / len(values)
    return mean, var


def pairwise_matchable_ids(d: Dataset):
    """Ids of patients with at least one identical vector in the other group.

    Plain O(|A||B|s) scan comparing canonical entries one by one.
    """
    matched_a, matched_b = set(), set()
    for p in d.group_a:
        for q in d.group_b:
            if all(x == y for x, y in zip(p.covariates.values, q.covariates.values)):
                matched_a.add(p.id)
                matched_b.add(q.id)
    return matched_a, matched_b


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def synthetic_rows(n_per_group: int, dim: int, seed: int, mean_cluster: int = 4):
    """Rows for a two-group CSV where vectors repeat with a fixed cluster-size law.

    Each group draws its vectors from a shared pool of ``n/mean_cluster``
    distinct vectors, so the expected cluster size stays constant as
    ``n`` grows.
    """
    rng = random.Random(seed)
    pool_size = max(1, n_per_group // mean_cluster)
    pool = [tuple(str(rng.randrange(10)) for _ in range(dim)) for _ in range(pool_size)]
    rows = []
    for label in ("savr", "tfavi"):
        for _ in range(n_per_group):
            vec = pool[rng.randrange(pool_size)]
            rows.append([label, str(int(rng.random() < 0.03)), *vec])
    return rows
