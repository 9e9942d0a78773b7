from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from genus_forge.series import (BivarSeries, SeriesError, TruncSeries, exp_series,
                                series_arith, series_compose, series_exp_log, sinh_over_z)

# (z/2)/sinh(z/2) through z^12, frozen from sympy.series
AHAT_SERIES = [Fraction(1), Fraction(-1, 24), Fraction(7, 5760), Fraction(-31, 967680),
               Fraction(127, 154828800), Fraction(-73, 3503554560),
               Fraction(1414477, 2678117105664000)]

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def series_st(order=7, const=None):
    def build(vals):
        d = dict(enumerate(vals))
        if const is not None:
            d[0] = Fraction(const)
        return TruncSeries(d, order)
    return st.lists(fractions, min_size=order, max_size=order).map(build)


def test_difference_of_squares():
    a = TruncSeries({0: 1, 1: 1}, 5)
    b = TruncSeries({0: 1, 1: -1}, 5)
    assert a * b == TruncSeries({0: 1, 2: -1}, 5)


def test_geometric_times_one_minus_q():
    geo = TruncSeries({k: 1 for k in range(6)}, 6)
    assert geo * TruncSeries({0: 1, 1: -1}, 6) == TruncSeries({0: 1}, 6)


def test_exp_coefficients():
    e = TruncSeries({1: 1}, 8).exp()
    assert all(e[k] == Fraction(1, factorial(k)) for k in range(8))
    assert TruncSeries({}, 5).exp() == TruncSeries({0: 1}, 5)


def test_log_one_plus_z():
    lg = TruncSeries({0: 1, 1: 1}, 6).log()
    assert [lg[k] for k in range(6)] == [0, 1, Fraction(-1, 2), Fraction(1, 3),
                                         Fraction(-1, 4), Fraction(1, 5)]


def test_compose_identity_and_inverse_elements():
    f = TruncSeries({0: 2, 1: 3, 4: Fraction(1, 7)}, 6)
    z = TruncSeries({1: 1}, 6)
    assert f.compose(z) == f
    zz = TruncSeries({1: 1}, 6, var="z")
    e = exp_series(6)
    assert e.compose(-zz) * e == TruncSeries({0: 1}, 6, var="z")


def test_ahat_series_by_composition():
    half = TruncSeries({1: Fraction(1, 2)}, 13)
    s = sinh_over_z(13).inverse().compose(half)
    assert [s[k] for k in range(0, 13, 2)] == AHAT_SERIES
    assert all(s[k] == 0 for k in range(1, 13, 2))


def test_mixed_orders_truncate():
    a = TruncSeries({0: 1, 3: 1}, 4)
    b = TruncSeries({0: 1, 1: 1}, 6)
    assert (a * b).order == 4


def test_unit_mismatch_rejected():
    with pytest.raises(SeriesError):
        TruncSeries({0: 1}, 4, unit=Fraction(1, 24)) + TruncSeries({0: 1}, 4)


def test_log_needs_unit_constant():
    with pytest.raises(SeriesError):
        TruncSeries({0: 2, 1: 1}, 4).log()


def test_exp_needs_zero_constant():
    with pytest.raises(SeriesError):
        TruncSeries({0: 1}, 4).exp()


def test_dispatchers():
    a = TruncSeries({1: 1}, 4)
    assert series_arith(a, a, "add") == a * 2
    assert series_exp_log(series_exp_log(a, "exp"), "log") == a
    assert series_compose(a, a) == a
    with pytest.raises(SeriesError):
        series_arith(a, a, "div")


def test_csv_roundtrip():
    s = TruncSeries({0: Fraction(1, 3), 2: Fraction(-5, 7)}, 4)
    rows = s.csv_rows()
    assert rows == ["0,1,1,3", "2,1,-5,7"]
    assert TruncSeries.from_csv_rows(rows, 4) == s
    assert s.csv_rows(exact=False)[0] == "0.0,0.33333333333333331"


def test_bivariate_slices():
    b = BivarSeries({0: 1, 2: TruncSeries({0: 1, 1: -24}, 3)}, 4, 3)
    assert b.q_slice(0)[2] == 1
    assert b.q_slice(1)[2] == -24


@settings(max_examples=40, deadline=None)
@given(series_st(const=0))
def test_exp_log_inverse(f):
    assert f.exp().log() == f


@settings(max_examples=40, deadline=None)
@given(series_st(), series_st(), series_st())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@settings(max_examples=40, deadline=None)
@given(series_st(const=1))
def test_inverse(f):
    assert f * f.inverse() == TruncSeries({0: 1}, f.order)


@settings(max_examples=30, deadline=None)
@given(series_st(const=0), series_st(const=0))
def test_exp_is_homomorphism(f, g):
    assert (f + g).exp() == f.exp() * g.exp()
