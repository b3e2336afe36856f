"""Patients, therapy groups and covariate vectors.

Covariate entries are canonicalized on construction so that equality of
vectors is exact and independent of how a number was written
(``"1.50"``, ``" 1.5"`` and ``1.5`` are the same value).  Numeric entries
become normalized :class:`~decimal.Decimal` values, token entries stay
strings.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Hashable, Iterable, Sequence

NUMERIC = "numeric"
TOKEN = "token"
COLUMN_KINDS = (NUMERIC, TOKEN)

GROUP_A = "A"
GROUP_B = "B"

BINARY_DOMAIN = (0, 1)


class InvalidInputError(ValueError):
    """Raised when data does not satisfy the model invariants."""

    def __init__(self, message: str, violations: Sequence["Violation"] = ()):
        super().__init__(message)
        self.violations = tuple(violations)


def canonical_numeric(raw: Any) -> Decimal:
    """Return the canonical decimal for a numeric covariate entry.

    Strings are trimmed; floats go through their shortest repr so that
    ``0.1`` maps to ``Decimal("0.1")``.  ``-0`` becomes ``0`` and trailing
    fractional zeros are dropped.
    """
    if isinstance(raw, bool):
        raise InvalidInputError(f"boolean {raw!r} is not a numeric covariate")
    if isinstance(raw, Decimal):
        value = raw
    elif isinstance(raw, int):
        value = Decimal(raw)
    elif isinstance(raw, float):
        value = Decimal(repr(raw))
    elif isinstance(raw, str):
        text = raw.strip()
        if not text:
            raise InvalidInputError("empty numeric covariate entry")
        try:
            value = Decimal(text)
        except InvalidOperation:
            raise InvalidInputError(f"not a decimal number: {raw!r}") from None
    else:
        raise InvalidInputError(f"unsupported numeric entry type {type(raw).__name__}")
    if not value.is_finite():
        raise InvalidInputError(f"non-finite numeric covariate {raw!r}")
    if value.is_zero():
        return Decimal(0)
    return value.normalize()


def canonical_token(raw: Any) -> str:
    if not isinstance(raw, str):
        raise InvalidInputError(f"token entries must be strings, got {raw!r}")
    text = raw.strip()
    if not text:
        raise InvalidInputError("empty token covariate entry")
    return text


def format_entry(value: Decimal | str | None) -> str:
    """Render a canonical entry as text (plain notation for numbers)."""
    if isinstance(value, Decimal):
        return format(value, "f")
    if value is None:
        return ""
    return value


def _kind_of(raw: Any) -> str:
    if isinstance(raw, str):
        return TOKEN
    return NUMERIC


@dataclass(frozen=True, order=True)
class CovariateVector:
    """An s-dimensional covariate vector with canonical entries.

    ``None`` marks a missing entry; such vectors can be built but never
    pass :func:`validate_dataset`.
    """

    values: tuple
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(self.values))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def parse(cls, raw: Iterable[Any], kinds: Sequence[str] | None = None) -> "CovariateVector":
        """Canonicalize ``raw`` entries.

        ``kinds`` declares each position as ``"numeric"`` or ``"token"``.
        Without it the Python type decides: ``str`` is a token, numbers
        are numeric.
        """
        raw = list(raw)
        if kinds is not None and len(kinds) != len(raw):
            raise InvalidInputError(
                f"vector has {len(raw)} entries but {len(kinds)} column kinds were declared"
            )
        out = []
        for i, entry in enumerate(raw):
            if entry is None:
                out.append(None)
                continue
            kind = kinds[i] if kinds is not None else _kind_of(entry)
            if kind == NUMERIC:
                out.append(canonical_numeric(entry))
            elif kind == TOKEN:
                out.append(canonical_token(entry))
            else:
                raise InvalidInputError(f"unknown column kind {kind!r}")
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self.values)

    def rendered(self) -> tuple[str, ...]:
        return tuple(format_entry(v) for v in self.values)


@dataclass(frozen=True)
class Patient:
    """One record: id, group label, covariates and observed outcome.

    ``covariates`` may be given as any sequence; it is canonicalized by
    Python type (see :meth:`CovariateVector.parse`).  ``row`` is an
    optional source position used only for diagnostics.
    """

    id: Hashable
    group: str
    covariates: CovariateVector
    outcome: Hashable
    row: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.covariates, CovariateVector):
            object.__setattr__(self, "covariates", CovariateVector.parse(self.covariates))


@dataclass(frozen=True)
class Dataset:
    """Two therapy groups plus the schema shared by all patients.

    ``positive_outcome`` selects the outcome value counted by the binary
    statistics; with a categorical domain any member of the domain can be
    chosen (the indicator reduction).
    """

    group_a: tuple[Patient, ...]
    group_b: tuple[Patient, ...]
    covariate_names: tuple[str, ...]
    column_kinds: tuple[str, ...] | None = None
    outcome_domain: tuple = BINARY_DOMAIN
    positive_outcome: Hashable = 1

    def __post_init__(self):
        object.__setattr__(self, "group_a", tuple(self.group_a))
        object.__setattr__(self, "group_b", tuple(self.group_b))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        object.__setattr__(self, "outcome_domain", tuple(self.outcome_domain))
        if self.column_kinds is not None:
            object.__setattr__(self, "column_kinds", tuple(self.column_kinds))

    @property
    def dimension(self) -> int:
        return len(self.covariate_names)

    def patients(self) -> tuple[Patient, ...]:
        return self.group_a + self.group_b


def l1_distance(p: Patient | CovariateVector, q: Patient | CovariateVector) -> Decimal:
    """Manhattan distance between two covariate vectors.

    Token positions contribute 0 on equality and 1 otherwise, so the
    distance is zero exactly when the vectors are equal.
    """
    u = p.covariates if isinstance(p, Patient) else p
    v = q.covariates if isinstance(q, Patient) else q
    if len(u) != len(v):
        raise InvalidInputError(f"dimension mismatch: {len(u)} vs {len(v)}")
    total = Decimal(0)
    for i, (x, y) in enumerate(zip(u.values, v.values)):
        if x is None or y is None:
            raise InvalidInputError(f"missing covariate at position {i}")
        x_num = isinstance(x, Decimal)
        if x_num != isinstance(y, Decimal):
            raise InvalidInputError(f"numeric and token entries mixed at position {i}")
        if x_num:
            total += abs(x - y)
        elif x != y:
            total += 1
    return total


@dataclass(frozen=True)
class Violation:
    code: str
    group: str | None
    position: int | None
    message: str


def validate_dataset(d: Dataset) -> list[Violation]:
    """Check every model invariant and return the violations found.

    ``position`` is the patient's source row when known, else its index
    within its group.  An empty list means the dataset is usable.
    """
    report: list[Violation] = []
    s = d.dimension
    if s < 1:
        report.append(Violation("no-covariates", None, None, "at least one covariate is required"))
    if d.column_kinds is not None:
        if len(d.column_kinds) != s:
            report.append(Violation(
                "schema", None, None,
                f"{len(d.column_kinds)} column kinds declared for {s} covariates",
            ))
        bad = [k for k in d.column_kinds if k not in COLUMN_KINDS]
        if bad:
            report.append(Violation("schema", None, None, f"unknown column kinds {bad}"))
    if d.positive_outcome not in d.outcome_domain:
        report.append(Violation(
            "outcome-domain", None, None,
            f"positive outcome {d.positive_outcome!r} not in domain {list(d.outcome_domain)}",
        ))

    ids = Counter(p.id for p in d.patients())
    seen_dup = set()
    for label, group in ((GROUP_A, d.group_a), (GROUP_B, d.group_b)):
        if not group:
            report.append(Violation("empty-group", label, None, f"group {label} is empty"))
        for idx, p in enumerate(group):
            pos = p.row if p.row is not None else idx
            if p.group != label:
                report.append(Violation(
                    "group-label", label, pos,
                    f"patient {p.id!r} labelled {p.group!r} but stored in group {label}",
                ))
            if ids[p.id] > 1 and p.id not in seen_dup:
                seen_dup.add(p.id)
                report.append(Violation(
                    "duplicate-id", label, pos, f"id {p.id!r} occurs {ids[p.id]} times",
                ))
            if len(p.covariates) != s:
                report.append(Violation(
                    "dimension-mismatch", label, pos,
                    f"patient {p.id!r} has {len(p.covariates)} covariates, expected {s}",
                ))
            for i, v in enumerate(p.covariates.values):
                if v is None:
                    name = d.covariate_names[i] if i < s else str(i)
                    report.append(Violation(
                        "missing-value", label, pos, f"patient {p.id!r} lacks covariate {name!r}",
                    ))
                elif d.column_kinds is not None and i < len(d.column_kinds):
                    is_num = isinstance(v, Decimal)
                    if is_num != (d.column_kinds[i] == NUMERIC):
                        report.append(Violation(
                            "column-kind", label, pos,
                            f"patient {p.id!r} covariate {i} does not match declared kind "
                            f"{d.column_kinds[i]!r}",
                        ))
            if p.outcome not in d.outcome_domain:
                report.append(Violation(
                    "outcome-domain", label, pos,
                    f"patient {p.id!r} outcome {p.outcome!r} not in domain {list(d.outcome_domain)}",
                ))

    # numeric/token agreement per column when no schema is declared
    if d.column_kinds is None and s >= 1:
        first_kind: dict[int, bool] = {}
        for label, group in ((GROUP_A, d.group_a), (GROUP_B, d.group_b)):
            for idx, p in enumerate(group):
                for i, v in enumerate(p.covariates.values[:s]):
                    if v is None:
                        continue
                    is_num = isinstance(v, Decimal)
                    if first_kind.setdefault(i, is_num) != is_num:
                        report.append(Violation(
                            "column-kind", label, p.row if p.row is not None else idx,
                            f"covariate {i} mixes numeric and token entries",
                        ))
    return report


def require_valid(d: Dataset) -> None:
    violations = validate_dataset(d)
    if violations:
        lines = "; ".join(v.message for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        raise InvalidInputError(f"invalid dataset: {lines}{more}", violations)
