from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conedensity.rat import INF, NEG_INF, add, fmt, is_finite, q, sub, vmax, vmin

rationals = st.fractions(max_denominator=64)


@given(rationals)
def test_q_fmt_roundtrip(x):
    assert q(fmt(x)) == x


def test_q_parses_plain_ints_and_decimals():
    assert q("3") == 3
    assert q("-2") == -2
    assert q("0.25") == Fraction(1, 4)
    assert q("7/3") == Fraction(7, 3)
    assert q("inf") == INF
    assert q("-inf") == NEG_INF


def test_q_refuses_floats_and_garbage():
    with pytest.raises(ValueError):
        q("nan")
    with pytest.raises(ValueError):
        q(0.1)  # inexact binary float objects are banned as data
    with pytest.raises((ValueError, ZeroDivisionError)):
        q("1/0")
    assert q("1e-3") == Fraction(1, 1000)  # exact decimal notation is fine


def test_inf_arithmetic():
    assert add(INF, Fraction(3)) == INF
    assert add(NEG_INF, Fraction(3)) == NEG_INF
    assert sub(Fraction(1), INF) == NEG_INF
    assert not is_finite(INF)
    assert vmin(INF, Fraction(2)) == 2
    assert vmax(NEG_INF, Fraction(2)) == 2


def test_fmt_inf():
    assert fmt(INF) == "inf"
    assert fmt(NEG_INF) == "-inf"
    assert fmt(Fraction(-3, 2)) == "-3/2"
    assert fmt(Fraction(4, 2)) == "2"
