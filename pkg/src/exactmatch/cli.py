"""Command-line front end: ``exactmatch match|enumerate|simulate``.

Exit codes: 0 success, 1 no exact matches found, 2 input error,
3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .clustering import build_clusters
from .dataset_model import (
    NUMERIC,
    TOKEN,
    CovariateVector,
    Dataset,
    InvalidInputError,
    Patient,
    canonical_numeric,
    canonical_token,
    require_valid,
)
from .matching import match_clusters, weight_and_score
from .oracle import (
    DEFAULT_BUDGET,
    RNG_ALGORITHM,
    EnumerationBudgetError,
    convergence_study,
    enumerate_realizations,
    realization_comparison_study,
)
from .report import build_match_report, exact, number_pair, render
from .statistics import cluster_expectancy, cluster_variance_frequency, count_pair_matchings

EXIT_OK = 0
EXIT_NO_MATCHES = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


class IngestError(InvalidInputError):
    """Input file or configuration problem, reported with its position."""


@dataclass
class RunConfig:
    input: Path
    group_col: str
    group_a: str
    group_b: str
    outcome_col: str
    covariates: list[str]
    numeric: list[str] = field(default_factory=list)
    outcome_positive: str = "1"
    outcome_domain: list[str] | None = None
    id_col: str | None = None
    format: str = "json"
    out: Path | None = None
    seed: int = 0
    samples: int = 1000
    budget: int = DEFAULT_BUDGET
    include_pairs: bool = True

    def __post_init__(self):
        if not self.covariates:
            raise IngestError("at least one covariate column is required")
        if self.group_a == self.group_b:
            raise IngestError("group labels for A and B must differ")
        unknown = sorted(set(self.numeric) - set(self.covariates))
        if unknown:
            raise IngestError(f"--numeric names columns that are not covariates: {unknown}")

    @property
    def domain(self) -> tuple[str, ...]:
        if self.outcome_domain:
            return tuple(self.outcome_domain)
        return ("0", "1")

    @property
    def kinds(self) -> tuple[str, ...]:
        numeric = set(self.numeric)
        return tuple(NUMERIC if c in numeric else TOKEN for c in self.covariates)

    def echo(self) -> dict:
        """Configuration fields that shape the result (no paths)."""
        return {
            "group_col": self.group_col,
            "group_a": self.group_a,
            "group_b": self.group_b,
            "outcome_col": self.outcome_col,
            "outcome_positive": self.outcome_positive,
            "outcome_domain": list(self.domain),
            "covariates": list(self.covariates),
            "numeric": [c for c in self.covariates if c in set(self.numeric)],
            "id_col": self.id_col,
        }


def ingest_csv(config: RunConfig) -> Dataset:
    """Read the configured CSV into a :class:`Dataset`.

    Row numbers in errors are physical line numbers (header is line 1).
    """
    try:
        handle = open(config.input, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open {config.input}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{config.input} is empty") from None
        header = [h.strip() for h in header]
        needed = [config.group_col, config.outcome_col, *config.covariates]
        if config.id_col:
            needed.append(config.id_col)
        missing = [c for c in needed if c not in header]
        if missing:
            raise IngestError(f"missing column(s) {missing} in header of {config.input}")
        col = {name: header.index(name) for name in needed}
        kinds = config.kinds
        domain = config.domain
        if config.outcome_positive not in domain:
            raise IngestError(
                f"positive outcome {config.outcome_positive!r} not in domain {list(domain)}"
            )
        cache: dict[tuple[str, str], object] = {}
        groups = {config.group_a: [], config.group_b: []}
        labels = {config.group_a: "A", config.group_b: "B"}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise IngestError(f"row {line_no}: expected {len(header)} fields, got {len(row)}")
            group_value = row[col[config.group_col]].strip()
            if group_value not in groups:
                raise IngestError(
                    f"row {line_no}, column {config.group_col!r}: group value "
                    f"{group_value!r} is not mapped to A or B"
                )
            outcome = row[col[config.outcome_col]].strip()
            if outcome not in domain:
                raise IngestError(
                    f"row {line_no}, column {config.outcome_col!r}: outcome {outcome!r} "
                    f"outside domain {list(domain)}"
                )
            values = []
            for name, kind in zip(config.covariates, kinds):
                raw = row[col[name]]
                hit = cache.get((kind, raw))
                if hit is None:
                    if not raw.strip():
                        raise IngestError(f"row {line_no}, column {name!r}: missing covariate")
                    try:
                        hit = canonical_numeric(raw) if kind == NUMERIC else canonical_token(raw)
                    except InvalidInputError as exc:
                        raise IngestError(f"row {line_no}, column {name!r}: {exc}") from None
                    cache[(kind, raw)] = hit
                values.append(hit)
            pid = row[col[config.id_col]].strip() if config.id_col else line_no
            label = labels[group_value]
            groups[group_value].append(
                Patient(pid, label, CovariateVector(tuple(values)), outcome, row=line_no)
            )
    d = Dataset(
        group_a=groups[config.group_a],
        group_b=groups[config.group_b],
        covariate_names=tuple(config.covariates),
        column_kinds=kinds,
        outcome_domain=domain,
        positive_outcome=config.outcome_positive,
    )
    try:
        require_valid(d)
    except InvalidInputError as exc:
        first = exc.violations[0] if exc.violations else None
        where = f"row {first.position}: " if first is not None and first.position is not None else ""
        raise IngestError(f"{where}{exc}", exc.violations) from None
    return d


def _cluster(d: Dataset):
    kw = {"positive": d.positive_outcome, "domain": d.outcome_domain}
    clusters_a = build_clusters(d.group_a, **kw)
    clusters_b = build_clusters(d.group_b, **kw)
    pairs, _, _ = match_clusters(clusters_a, clusters_b)
    return clusters_a, clusters_b, weight_and_score(pairs, clusters_a, clusters_b)


def run_pipeline(config: RunConfig) -> tuple[dict, int]:
    """Run the match pipeline and return ``(report, exit_code)``."""
    d = ingest_csv(config)
    clusters_a, clusters_b, result = _cluster(d)
    doc = build_match_report(
        result,
        dimension=d.dimension,
        n_a=len(d.group_a),
        n_b=len(d.group_b),
        n_clusters_a=len(clusters_a),
        n_clusters_b=len(clusters_b),
        config=config.echo(),
        outcome_domain=d.outcome_domain,
        include_pairs=config.include_pairs,
    )
    return doc, (EXIT_OK if result.pairs else EXIT_NO_MATCHES)


def run_enumerate(config: RunConfig) -> tuple[dict, int]:
    """List every realization of every matched pair.

    The budget caps the total number of realizations listed.
    """
    d = ingest_csv(config)
    _, _, result = _cluster(d)
    total = sum(count_pair_matchings(p.a_cluster.size, p.b_cluster.size).value
                for p in result.pairs)
    if total > config.budget:
        raise EnumerationBudgetError(
            f"{total} realizations across {len(result.pairs)} pairs exceed the budget {config.budget}"
        )
    pairs_doc = []
    for pair in result.pairs:
        reals = enumerate_realizations(pair, budget=config.budget)
        k = len(reals)
        mean = {s: sum((getattr(r, f"frequency_{s.lower()}") for r in reals), 0) / k
                for s in ("A", "B")}
        var = {s: sum((getattr(r, f"frequency_{s.lower()}") - mean[s]) ** 2 for r in reals) / k
               for s in ("A", "B")}
        items = []
        for r in reals:
            sel = r.selections[0]
            chosen = (list(pair.side(sel.side).members[i] for i in sel.indices)
                      if sel.side else [])
            items.append({
                "side": sel.side,
                "members": [str(m) for m in chosen],
                "frequency_a": exact(r.frequency_a),
                "frequency_b": exact(r.frequency_b),
            })
        pairs_doc.append({
            "key": list(pair.a_cluster.key.rendered()),
            "size_a": pair.a_cluster.size,
            "size_b": pair.b_cluster.size,
            "realizations": k,
            "enumerated_mean_a": exact(mean["A"]),
            "enumerated_mean_b": exact(mean["B"]),
            "closed_form_mean_a": exact(cluster_expectancy(pair, "A")),
            "closed_form_mean_b": exact(cluster_expectancy(pair, "B")),
            "enumerated_variance_a": exact(var["A"]),
            "enumerated_variance_b": exact(var["B"]),
            "closed_form_variance_a": exact(cluster_variance_frequency(pair, "A")),
            "closed_form_variance_b": exact(cluster_variance_frequency(pair, "B")),
            "items": items,
        })
    doc = {
        "tool": {"name": "exactmatch", "version": __version__},
        "config": config.echo(),
        "budget": config.budget,
        "total_realizations": total,
        "pairs": pairs_doc,
        "warnings": [] if result.pairs else ["no exact matches"],
    }
    return doc, (EXIT_OK if result.pairs else EXIT_NO_MATCHES)


def _checkpoints(r: int) -> list[int]:
    points = []
    k = 1
    while k < r:
        points.append(k)
        k *= 10
    points.append(r)
    return points


def run_simulate(config: RunConfig) -> tuple[dict, int]:
    """Seeded convergence study plus per-realization comparison summary."""
    d = ingest_csv(config)
    _, _, result = _cluster(d)
    r = config.samples
    if r < 1:
        raise IngestError("--samples must be at least 1")
    conv = convergence_study(result.pairs, r, config.seed)
    comp = realization_comparison_study(d, r, config.seed)
    pvals = comp.p_values()
    counts_a = [row.count_a for row in comp.rows]
    counts_b = [row.count_b for row in comp.rows]
    doc = {
        "tool": {"name": "exactmatch", "version": __version__},
        "config": config.echo(),
        "rng": {"algorithm": RNG_ALGORITHM, "seed": config.seed},
        "samples": r,
        "convergence": {
            "expected_a": number_pair(conv.expected_a),
            "expected_b": number_pair(conv.expected_b),
            "variance_a": number_pair(conv.variance_a),
            "variance_b": number_pair(conv.variance_b),
            "checkpoints": [
                {"samples": k,
                 "running_mean_a": float(conv.running_mean_a[k - 1]),
                 "running_mean_b": float(conv.running_mean_b[k - 1])}
                for k in _checkpoints(r)
            ],
            "tolerance_4sigma_a": conv.tolerance("A"),
            "tolerance_4sigma_b": conv.tolerance("B"),
        },
        "realizations": {
            "matched_pairs": comp.matched_pairs,
            "expected_count_a": number_pair(comp.expected_count_a),
            "expected_count_b": number_pair(comp.expected_count_b),
            "mean_count_a": comp.mean_count("A"),
            "mean_count_b": comp.mean_count("B"),
            "std_count_a": comp.count_std("A"),
            "std_count_b": comp.count_std("B"),
            "min_count_a": min(counts_a),
            "max_count_a": max(counts_a),
            "min_count_b": min(counts_b),
            "max_count_b": max(counts_b),
            "p_value_defined": len(pvals),
            "p_value_min": min(pvals) if pvals else None,
            "p_value_max": max(pvals) if pvals else None,
            "p_value_mean": sum(pvals) / len(pvals) if pvals else None,
            "share_p_below_0.05": sum(p < 0.05 for p in pvals) / len(pvals) if pvals else None,
        },
        "warnings": [] if result.pairs else ["no exact matches"],
    }
    return doc, (EXIT_OK if result.pairs else EXIT_NO_MATCHES)


def _split(text: str | None) -> list[str]:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exactmatch",
        description="Deterministic exact matching of two therapy groups by covariate clusters.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, type=Path, help="CSV file with a header row")
    common.add_argument("--group-col", required=True)
    common.add_argument("--group-a", required=True, help="group column value mapped to A")
    common.add_argument("--group-b", required=True, help="group column value mapped to B")
    common.add_argument("--outcome-col", required=True)
    common.add_argument("--outcome-positive", default="1")
    common.add_argument("--outcome-domain", default=None,
                        help="comma-separated outcome values (default: 0,1)")
    common.add_argument("--covariates", required=True, help="comma-separated covariate columns")
    common.add_argument("--numeric", default="",
                        help="comma-separated covariates compared as numbers; others are tokens")
    common.add_argument("--id-col", default=None, help="patient id column (default: row number)")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--format", choices=("json", "text"), default="json")

    sub = parser.add_subparsers(dest="command", required=True)
    m = sub.add_parser("match", parents=[common], help="cluster, match and report")
    m.add_argument("--no-pairs", action="store_true", help="omit the per-pair listing")
    e = sub.add_parser("enumerate", parents=[common], help="list all realizations per pair")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s = sub.add_parser("simulate", parents=[common], help="seeded uniform-matching study")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input=args.input,
        group_col=args.group_col,
        group_a=args.group_a,
        group_b=args.group_b,
        outcome_col=args.outcome_col,
        covariates=_split(args.covariates),
        numeric=_split(args.numeric),
        outcome_positive=args.outcome_positive,
        outcome_domain=_split(args.outcome_domain) or None,
        id_col=args.id_col,
        format=args.format,
        out=args.out,
        seed=getattr(args, "seed", 0),
        samples=getattr(args, "samples", 1000),
        budget=getattr(args, "budget", DEFAULT_BUDGET),
        include_pairs=not getattr(args, "no_pairs", False),
    )


COMMANDS = {"match": run_pipeline, "enumerate": run_enumerate, "simulate": run_simulate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        doc, code = COMMANDS[args.command](config)
    except EnumerationBudgetError as exc:
        print(f"exactmatch: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidInputError as exc:
        print(f"exactmatch: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(doc, config.format)
    if config.out is not None:
        config.out.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    for warning in doc.get("warnings", []):
        print(f"exactmatch: warning: {warning}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
