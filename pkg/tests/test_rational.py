from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from haarlab.rational import DyadicRational, format_exact, parse_exact

dyadics = st.builds(DyadicRational, st.integers(-10**6, 10**6), st.integers(0, 40))


def test_normalized_form():
    x = DyadicRational(12, 4)
    assert (x.num, x.exp) == (3, 2)
    assert str(x) == "3/2^2"
    assert DyadicRational(0, 9) == 0


def test_parse_and_format_round_trip():
    assert DyadicRational.parse("5/2^3") == Fraction(5, 8)
    assert DyadicRational.parse("7") == 7
    assert format_exact(Fraction(1, 3)) == "1/3"
    assert parse_exact("1/3") == Fraction(1, 3)
    assert parse_exact("5/2^3") == DyadicRational(5, 3)


def test_negative_exponent_folds_into_numerator():
    assert DyadicRational(3, -2) == 12
    assert DyadicRational(3, -2).exp == 0


def test_division_leaves_ring_only_when_needed():
    x = DyadicRational(3, 1)
    assert isinstance(x / 4, DyadicRational)
    assert x / 4 == Fraction(3, 8)
    q = x / 3
    assert isinstance(q, Fraction) and q == Fraction(1, 2)


def test_immutable():
    x = DyadicRational(1, 1)
    with pytest.raises(AttributeError):
        x.num = 2


@given(dyadics, dyadics)
def test_ring_operations_match_fractions(a, b):
    fa, fb = a.as_fraction(), b.as_fraction()
    assert (a + b).as_fraction() == fa + fb
    assert (a - b).as_fraction() == fa - fb
    assert (a * b).as_fraction() == fa * fb
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)


@given(dyadics)
def test_hash_consistent_with_fraction(a):
    assert hash(a) == hash(a.as_fraction())
    assert DyadicRational.parse(str(a)) == a


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_from_float_is_exact(x):
    assert DyadicRational.from_float(x).as_fraction() == Fraction(x)
