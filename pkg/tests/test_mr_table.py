from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import agk.mr_table as mr
from agk.mr_table import TABLE, integer_roots, mr_member, nearest_table_distance, trivial_lambda

DEGREES = [k for k in range(-6, 7) if k not in (-2, 0, 2)]


def brute_force_member(k, lam, window=300):
    """Independent oracle: enumerate row values over a window of j."""
    for row in TABLE:
        if row.applies(k) and any(row.value(k, j) == lam for j in range(-window, window + 1)):
            return True
    return False


class TestIntegerRoots:
    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 9))
    def test_recovers_planted_roots(self, r1, r2, lead):
        A, B, C = Fraction(lead), Fraction(-lead * (r1 + r2)), Fraction(lead * r1 * r2)
        assert set(integer_roots(A, B, C)) == {r1, r2}

    def test_linear_and_constant(self):
        assert integer_roots(Fraction(0), Fraction(2), Fraction(-6)) == [3]
        with pytest.raises(ValueError):
            integer_roots(Fraction(0), Fraction(0), Fraction(1))


class TestMembership:
    def test_sixteen_rows(self):
        assert len(TABLE) == 16

    @pytest.mark.parametrize("k", DEGREES)
    def test_trivial_eigenvalue_is_member(self, k):
        assert mr_member(k, trivial_lambda(k)) is not None

    @pytest.mark.parametrize("lam, expected", [(0, True), (4, True), (12, True), (8, False),
                                               (Fraction(4, 3), False), (Fraction(12, 5), False)])
    def test_quartic_values(self, lam, expected):
        assert (mr_member(4, lam) is not None) == expected

    def test_witness_points_at_a_row_value(self):
        w = mr_member(4, 4)
        row = next(r for r in TABLE if r.family == w.family)
        assert row.value(4, w.j) == 4

    @given(st.sampled_from(DEGREES), st.fractions(min_value=-200, max_value=200, max_denominator=24))
    def test_agrees_with_brute_force(self, k, lam):
        assert (mr_member(k, lam) is not None) == brute_force_member(k, lam)

    @given(st.sampled_from(DEGREES), st.integers(-40, 40), st.integers(0, 15))
    def test_every_row_value_is_member(self, k, j, idx):
        row = TABLE[idx]
        if row.applies(k):
            assert mr_member(k, row.value(k, j)) is not None

    @pytest.mark.parametrize("k", [-2, 0, 2])
    def test_excluded_degrees(self, k):
        with pytest.raises(ValueError):
            mr_member(k, 0)

    def test_table_override_for_fault_injection(self, monkeypatch):
        monkeypatch.setattr(mr, "TABLE", ())
        assert mr_member(4, 12) is None


class TestDistance:
    def test_zero_on_members(self):
        assert nearest_table_distance(4, 12.0) == 0.0

    @given(st.floats(-100, 100, allow_nan=False))
    def test_distance_bounds_membership(self, lam):
        d = nearest_table_distance(4, lam)
        assert d >= 0
        q = Fraction(lam)
        if mr_member(4, q) is not None:
            assert d == 0
