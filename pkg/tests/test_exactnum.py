from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weilform.errors import ValidationError
from weilform.exactnum import (
    CyclotomicNumber, cyclotomic_poly, e_of, fraction_to_str, mobius, phi, snap_root_of_unity, sqrt_exact,
)

fracs = st.fractions(min_value=0, max_value=1, max_denominator=24)


def test_cyclotomic_poly_and_totient():
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)
    assert phi(12) == 4
    assert [mobius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]


def test_roots_of_unity_basics():
    assert e_of(Fraction(1, 2)) == -1
    assert e_of(Fraction(1, 4)) == CyclotomicNumber.root(4, 1)
    assert e_of(Fraction(1, 3)).embed(12) == e_of(Fraction(4, 12))
    assert e_of(Fraction(1, 6)).minimal_conductor().conductor == 3


def test_snap_exact():
    # 1 + e(1/3) = e(1/6)
    assert snap_root_of_unity(1 + e_of(Fraction(1, 3)), 24) == Fraction(1, 6)
    assert snap_root_of_unity(1 + e_of(Fraction(1, 4)), 24) is None
    assert snap_root_of_unity(CyclotomicNumber.zero(), 24) is None


def test_sqrt_exact():
    for n in (2, 3, 5, 8, 12):
        r = sqrt_exact(n)
        assert r * r == n
    with pytest.raises(ValidationError):
        sqrt_exact(-3)


def test_fraction_to_str():
    assert fraction_to_str(Fraction(2)) == "2"
    assert fraction_to_str(Fraction(-3, 4)) == "-3/4"


def test_json_roundtrip():
    x = e_of(Fraction(1, 5)) + 2
    assert CyclotomicNumber.from_json(x.to_json()) == x


@given(fracs, fracs)
def test_e_is_a_character(a, b):
    assert e_of(a) * e_of(b) == e_of(a + b)


@given(fracs, fracs, st.integers(-5, 5))
@settings(max_examples=50)
def test_field_axioms(a, b, c):
    x = e_of(a) + c
    y = e_of(b) * 2 - 1
    assert x * y == y * x
    assert (x + y) * x == x * x + y * x
    if not x.is_zero():
        assert x * x.inverse() == 1
        assert (y / x) * x == y


@given(fracs)
def test_conjugate_is_inverse_on_roots(a):
    z = e_of(a)
    assert z * z.conj() == 1
    assert snap_root_of_unity(z, 24) == a % 1
