from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilprob.errors import NonIntegerResult, ParseError
from nilprob.polynomial import IntPolynomial, parse_polynomial

NAMES = ["x", "y", "z"]


def test_parse_and_evaluate():
    p = parse_polynomial("x*y - 3 z^2 + n*(n-1)/2".replace("n", "x"), NAMES)
    assert p.evaluate((4, 5, 1)) == 4 * 5 - 3 + Fraction(4 * 3, 2)


def test_implicit_multiplication_and_case():
    names = ["X2", "W3"]
    assert parse_polynomial("x2W3", names) == parse_polynomial("X2*W3", names)
    assert parse_polynomial("2(x+1)", ["x"]) == parse_polynomial("2*x + 2", ["x"])
    assert parse_polynomial("x**3", ["x"]) == parse_polynomial("x^3", ["x"])


@pytest.mark.parametrize("text", ["x +", "x / y", "x ^ y", "(x", "x $ y", "w", "x / 0"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_polynomial(text, NAMES, line=4)


def test_integrality():
    p = parse_polynomial("x*(x-1)/2", ["x"])
    assert p.evaluate_int((7,)) == 21
    q = parse_polynomial("x/2", ["x"])
    with pytest.raises(NonIntegerResult):
        q.evaluate_int((3,))


def test_evaluate_mod_and_array():
    p = parse_polynomial("x*y*(y-1)/2 + z", NAMES)
    cols = [np.arange(-5, 5), np.arange(10), np.full(10, 3)]
    exact = [p.evaluate_int(v) for v in zip(*[c.tolist() for c in cols])]
    assert p.evaluate_array(cols).tolist() == exact
    assert p.evaluate_mod(cols, 7).tolist() == [v % 7 for v in exact]


def test_big_values_switch_to_objects():
    p = parse_polynomial("x^3", ["x"])
    big = np.array([10 ** 7, -(10 ** 7)], dtype=np.int64)
    out = p.evaluate_array([big])
    assert out.dtype == object
    assert out.tolist() == [10 ** 21, -(10 ** 21)]


def test_substitute():
    p = parse_polynomial("x*y", ["x", "y"])
    x = IntPolynomial.var(1, 0)
    assert p.substitute([x + 1, x - 1]) == x * x - 1


ints = st.integers(-50, 50)


@given(ints, ints, ints, ints, ints, ints)
def test_ring_laws(a, b, c, x, y, z):
    P = [IntPolynomial.var(3, i) for i in range(3)]
    p = P[0] * a + P[1] * P[2] * b + c
    q = P[0] * P[0] - P[1] * c
    v = (x, y, z)
    assert (p + q).evaluate(v) == p.evaluate(v) + q.evaluate(v)
    assert (p * q).evaluate(v) == p.evaluate(v) * q.evaluate(v)
    assert (p - p).is_zero()


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(2, 50))
def test_mod_matches_exact(x, n):
    p = parse_polynomial("3x^2 - x/1 + 5", ["x"])
    assert p.evaluate_mod([np.array([x])], n)[0] == p.evaluate_int((x,)) % n
