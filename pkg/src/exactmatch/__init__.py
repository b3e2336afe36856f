"""Deterministic exact matching of two therapy groups by covariate clusters."""

__version__ = "0.1.0"

from .clustering import Cluster, build_clusters, cluster_distance
from .dataset_model import (
    CovariateVector,
    Dataset,
    InvalidInputError,
    Patient,
    l1_distance,
    validate_dataset,
)
from .matching import MatchedClusterPair, MatchResult, match_clusters, run_dem, weight_and_score

__all__ = [
    "Cluster",
    "CovariateVector",
    "Dataset",
    "InvalidInputError",
    "MatchResult",
    "MatchedClusterPair",
    "Patient",
    "build_clusters",
    "cluster_distance",
    "l1_distance",
    "match_clusters",
    "run_dem",
    "validate_dataset",
    "weight_and_score",
]
