from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactmatch.dataset_model import (
    CovariateVector,
    Dataset,
    InvalidInputError,
    Patient,
    canonical_numeric,
    l1_distance,
    require_valid,
    validate_dataset,
)


def P(pid, group, cov, outcome=0):
    return Patient(pid, group, cov, outcome)


class TestCanonicalization:
    @pytest.mark.parametrize("raw,expected", [
        ("1.50", "1.5"),
        (" 1.5 ", "1.5"),
        ("-0", "0"),
        ("-0.000", "0"),
        ("100", "100"),
        ("1e2", "100"),
        ("+7", "7"),
        (0.1, "0.1"),
        (3, "3"),
    ])
    def test_numeric(self, raw, expected):
        assert format(canonical_numeric(raw), "f") == expected

    @pytest.mark.parametrize("raw", ["", "  ", "abc", "nan", "inf", True])
    def test_numeric_rejects(self, raw):
        with pytest.raises(InvalidInputError):
            canonical_numeric(raw)

    def test_equal_spellings_are_equal_vectors(self):
        a = CovariateVector.parse(["1.50", "m"], ["numeric", "token"])
        b = CovariateVector.parse([" 1.5", " m "], ["numeric", "token"])
        assert a == b and hash(a) == hash(b)
        assert a.rendered() == ("1.5", "m")

    def test_type_decides_kind_without_schema(self):
        v = CovariateVector.parse([1, "1"])
        assert isinstance(v.values[0], Decimal)
        assert v.values[1] == "1"


class TestL1Distance:
    def test_identity(self):
        assert l1_distance(P(1, "A", (1, 2, 3)), P(2, "B", (1, 2, 3))) == 0

    def test_direct_evaluation(self):
        assert l1_distance(P(1, "A", (1, 2, 3)), P(2, "B", (1, 3, 5))) == 3

    def test_token_mode(self):
        p = P(1, "A", ("m", "65", "ii"))
        q = P(2, "B", ("m", "64", "ii"))
        assert l1_distance(p, q) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            l1_distance(P(1, "A", (1, 2)), P(2, "B", (1, 2, 3)))

    def test_decimals_are_exact(self):
        assert l1_distance(P(1, "A", (0.1, 0.2)), P(2, "B", (0.3, 0.0))) == Decimal("0.4")

    @settings(max_examples=200)
    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)),
                    min_size=1, max_size=4))
    def test_metric_properties(self, rows):
        vecs = [CovariateVector.parse(r) for r in rows]
        for u in vecs:
            for v in vecs:
                d = l1_distance(u, v)
                assert d >= 0
                assert d == l1_distance(v, u)
                assert (d == 0) == (u == v)
                for w in vecs:
                    assert l1_distance(u, w) <= d + l1_distance(v, w)

    @settings(max_examples=200)
    @given(st.lists(st.sampled_from(["a", "b", " a", "c "]), min_size=1, max_size=5),
           st.lists(st.sampled_from(["a", "b", " a", "c "]), min_size=1, max_size=5))
    def test_zero_iff_equal_tokens(self, xs, ys):
        if len(xs) != len(ys):
            return
        u, v = CovariateVector.parse(xs), CovariateVector.parse(ys)
        assert (l1_distance(u, v) == 0) == (u == v)


class TestValidate:
    def well_formed(self):
        return Dataset(
            [P("p1", "A", (1, 2), 1), P("p2", "A", (1, 3), 0)],
            [P("p3", "B", (1, 2), 0)],
            ("x", "y"),
        )

    def test_well_formed(self):
        assert validate_dataset(self.well_formed()) == []

    def test_duplicate_id(self):
        d = Dataset([P("p7", "A", (1,)), P("p7", "A", (2,))], [P("q", "B", (1,))], ("x",))
        report = validate_dataset(d)
        assert [v.code for v in report] == ["duplicate-id"]

    def test_dimension_mismatch(self):
        names = tuple(f"c{i}" for i in range(19))
        good = P("ok", "A", tuple(range(19)))
        bad = P("short", "B", tuple(range(18)))
        report = validate_dataset(Dataset([good], [bad], names))
        assert [v.code for v in report] == ["dimension-mismatch"]

    def test_missing_value(self):
        d = Dataset([P("a", "A", (1, None))], [P("b", "B", (1, 2))], ("x", "y"))
        assert [v.code for v in validate_dataset(d)] == ["missing-value"]
        with pytest.raises(InvalidInputError):
            require_valid(d)

    def test_outcome_domain(self):
        d = Dataset([P("a", "A", (1,), 2)], [P("b", "B", (1,), 0)], ("x",))
        assert [v.code for v in validate_dataset(d)] == ["outcome-domain"]

    def test_empty_group_and_label(self):
        d = Dataset([P("a", "B", (1,))], [], ("x",))
        codes = sorted(v.code for v in validate_dataset(d))
        assert codes == ["empty-group", "group-label"]

    def test_declared_kind_mismatch(self):
        d = Dataset([P("a", "A", ("m",))], [P("b", "B", (1,))], ("x",), column_kinds=("token",))
        assert [v.code for v in validate_dataset(d)] == ["column-kind"]

    def test_row_positions_reported(self):
        d = Dataset([Patient("a", "A", (1,), 5, row=17)], [P("b", "B", (1,))], ("x",))
        (v,) = validate_dataset(d)
        assert v.position == 17

    def test_pure(self):
        d = Dataset([P("p7", "A", (1,)), P("p7", "A", (2, 3), 9)], [], ("x",))
        assert validate_dataset(d) == validate_dataset(d)
