"""Canonical report documents and their serialization.

Reports are plain dicts built in a fixed key order.  Floats are written
with Python's shortest round-trip repr; exact values are also given as
``"p/q"`` strings.  Nothing time- or path-dependent goes into the body,
so the bytes depend only on the data, the configuration and the version.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from . import __version__
from .clustering import Cluster
from .matching import MatchResult
from .statistics import (
    FREQUENCY,
    SIZE_SCALED,
    UndefinedTestError,
    chi_square_2x2,
    count_total_matchings,
    group_variance,
)

NO_MATCH_WARNING = (
    "no exact matches: the groups share no covariate vector; "
    "investigate the groups for systematic differences before comparing outcomes"
)
CHI_SQUARE_WARNING = "chi-square test undefined: degenerate margin in the expected matched counts"


def exact(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def number_pair(value: Fraction) -> dict:
    return {"value": float(value), "exact": exact(value)}


def _cluster_summary(c: Cluster) -> dict:
    return {"key": list(c.key.rendered()), "size": c.size, "outcome_sum": c.outcome_sum}


def build_match_report(result: MatchResult, *, dimension: int, n_a: int, n_b: int,
                       n_clusters_a: int, n_clusters_b: int, config: dict,
                       outcome_domain: tuple = (), include_pairs: bool = True) -> dict:
    warnings = []
    if not result.pairs:
        warnings.append(NO_MATCH_WARNING)
    n = result.matched_pairs_per_realization
    chi = None
    if n:
        try:
            res = chi_square_2x2(result.expected_outcome_count_a, n,
                                 result.expected_outcome_count_b, n)
            chi = {"statistic": res.statistic, "dof": res.dof, "p_value": res.p_value}
        except UndefinedTestError:
            warnings.append(CHI_SQUARE_WARNING)
    total = count_total_matchings(result.pairs)

    doc: dict[str, Any] = {
        "tool": {"name": "exactmatch", "version": __version__},
        "config": config,
        "dataset": {"n_a": n_a, "n_b": n_b, "dimension": dimension},
        "clusters": {"n_a": n_clusters_a, "n_b": n_clusters_b},
        "matching": {
            "pairs": len(result.pairs),
            "patients_in_matched_clusters_a": sum(p.a_cluster.size for p in result.pairs),
            "patients_in_matched_clusters_b": sum(p.b_cluster.size for p in result.pairs),
            "matched_pairs_per_realization": n,
            "matched_patient_total": result.matched_patient_total,
        },
        "weighted_results": {
            "r_a": number_pair(result.r_a),
            "r_b": number_pair(result.r_b),
        },
        "expected_matched_outcomes": {
            "count_a": number_pair(result.expected_outcome_count_a),
            "count_b": number_pair(result.expected_outcome_count_b),
            "rate_a": number_pair(result.expected_outcome_rate_a),
            "rate_b": number_pair(result.expected_outcome_rate_b),
        },
        "matching_count": {"exact": str(total), "digits": total.digits},
        "variance": {
            "size_scaled_a": number_pair(group_variance(result, "A", SIZE_SCALED)),
            "size_scaled_b": number_pair(group_variance(result, "B", SIZE_SCALED)),
            "frequency_a": number_pair(group_variance(result, "A", FREQUENCY)),
            "frequency_b": number_pair(group_variance(result, "B", FREQUENCY)),
        },
        "chi_square": chi,
    }
    if len(outcome_domain) > 2:
        doc["expected_matched_outcomes_by_category"] = _categorical_counts(result, outcome_domain)
    doc["unmatched"] = {
        "a": {
            "clusters": len(result.unmatched_a),
            "patients": sum(c.size for c in result.unmatched_a),
            "items": [_cluster_summary(c) for c in result.unmatched_a],
        },
        "b": {
            "clusters": len(result.unmatched_b),
            "patients": sum(c.size for c in result.unmatched_b),
            "items": [_cluster_summary(c) for c in result.unmatched_b],
        },
    }
    if include_pairs:
        doc["pairs"] = [
            {
                "key": list(p.a_cluster.key.rendered()),
                "size_a": p.a_cluster.size,
                "size_b": p.b_cluster.size,
                "s_min": p.s_min,
                "weight_a": exact(p.w_a),
                "weight_b": exact(p.w_b),
                "outcome_sum_a": p.a_cluster.outcome_sum,
                "outcome_sum_b": p.b_cluster.outcome_sum,
            }
            for p in result.pairs
        ]
    doc["warnings"] = warnings
    return doc


def _categorical_counts(result: MatchResult, domain: tuple) -> list:
    rows = []
    for k in domain:
        count_a = sum((Fraction(p.s_min * p.a_cluster.outcome_histogram[k], p.a_cluster.size)
                       for p in result.pairs), Fraction(0))
        count_b = sum((Fraction(p.s_min * p.b_cluster.outcome_histogram[k], p.b_cluster.size)
                       for p in result.pairs), Fraction(0))
        rows.append({"outcome": str(k), "count_a": number_pair(count_a),
                     "count_b": number_pair(count_b)})
    return rows


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _flatten(prefix: str, value: Any, out: list) -> None:
    if isinstance(value, dict):
        if set(value) == {"value", "exact"}:
            out.append((prefix, f"{value['value']!r} ({value['exact']})"))
            return
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, list):
        if value and all(not isinstance(v, (dict, list)) for v in value):
            out.append((prefix, ", ".join(str(v) for v in value)))
        elif not value:
            out.append((prefix, "-"))
        else:
            for i, v in enumerate(value):
                _flatten(f"{prefix}[{i}]", v, out)
    elif value is None:
        out.append((prefix, "n/a"))
    elif isinstance(value, float):
        out.append((prefix, repr(value)))
    else:
        out.append((prefix, str(value)))


def to_text(doc: dict) -> str:
    """Aligned ``key  value`` lines, one per leaf of the document."""
    rows: list = []
    _flatten("", doc, rows)
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "text":
        return to_text(doc)
    raise ValueError(f"unknown format {fmt!r}")
