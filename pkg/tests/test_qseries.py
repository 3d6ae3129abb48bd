from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weilform.errors import ValidationError
from weilform.qseries import (
    JacobiQExp, eta_power, eta_qexp, normalized_rhos, reconstruct, series_linalg, theta_block, theta_decompose,
    phi_from_invariant, theta_lattice, theta_odd, theta_odd_sum, theta_rho, unary_theta,
)
from weilform.verify import E8_2G


def pentagonal(order):
    """prod (1 - q^n) from Euler's pentagonal number theorem."""
    c = [0] * order
    for k in range(-order, order + 1):
        g = k * (3 * k - 1) // 2
        if 0 <= g < order:
            c[g] += (-1) ** (k % 2)
    return c


def test_eta_is_pentagonal():
    e = eta_qexp(20)
    got = [e.coefficient(Fraction(1, 24) + n, ()) for n in range(19)]
    assert got == pentagonal(19)
    assert e.meta["weight"] == Fraction(1, 2)


@pytest.mark.parametrize("e", [-3, -1, 2, 5])
def test_eta_powers_multiply(e):
    assert eta_power(e, 6) * eta_power(1, 6) == eta_power(e + 1, 6)


@pytest.mark.parametrize("a", [1, 2, 3])
def test_theta_product_equals_sum(a):
    assert theta_odd(a, 20) == theta_odd_sum(a, 20)


@given(st.integers(1, 4))
@settings(max_examples=4, deadline=None)
def test_theta_is_odd_in_zeta(a):
    t = theta_odd(a, 6)
    assert t.subs_zeta(-1) == -t
    assert t.at_z_zero().is_zero()


def test_theta_block_meta_and_valuation():
    b = theta_block(-1, [1, 2, 3], 4)
    assert b.meta["weight"] == 1
    assert b.meta["index"] == [[Fraction(7)]]
    assert b.valuation() == Fraction(1, 3)


@given(st.integers(-2, 2), st.integers(-2, 2))
@settings(max_examples=15, deadline=None)
def test_meta_is_additive(a, b):
    x, y = eta_power(a, 3), theta_odd(1, 3)
    prod = x * y
    assert prod.meta["weight"] == x.meta["weight"] + y.meta["weight"]
    assert (x * x).meta["weight"] == 2 * x.meta["weight"]


def test_inverse_and_division():
    e = eta_power(1, 8)
    one = e * e.inverse()
    assert one.coefficient(Fraction(0), ()) == 1
    assert all(q == 0 for q, _, _ in one.terms())
    t = theta_odd(1, 6)
    assert (t * e) / e == t.truncate((t * e / e).trunc)


@pytest.mark.parametrize("N", [3, 4, 7, 12, 13, 19])
def test_theta_rho_factorization(N):
    for p, q in normalized_rhos(N):
        if q == abs(p):
            continue
        lhs = theta_rho(N, (p, q), 8)
        rhs = -theta_block(-1, [(q + p) // 2, (q - p) // 2, q], 8)
        assert lhs.truncate(8) == rhs.truncate(8)


def test_theta_rho_rejects_wrong_norm():
    with pytest.raises(ValidationError):
        theta_rho(5, (1, 1), 4)


@pytest.mark.parametrize("twoF", [[[2]], [[4]], [[2, 1], [1, 2]], [[4, 1], [1, 2]]])
def test_theta_decomposition_roundtrip(twoF):
    th = theta_lattice(twoF, [0] * len(twoF), 4)
    hs = theta_decompose(th, twoF)
    assert reconstruct(hs, twoF, 4) == th


def test_unary_theta_decomposition():
    th = theta_lattice([[2]], [0], 5)
    hs = theta_decompose(th, [[2]])
    # theta_Z is the x = 0 component: h_0 = 1, h_1 = 0
    assert hs[(0,)].coefficient(Fraction(0), ()) == 1
    assert hs[(1,)].is_zero()
    assert th.at_z_zero() == unary_theta(1, 0, 5)


def test_phi_from_invariant_components():
    # lambda(0, 0) = 1, lambda(1, 1) = 2 on Z/2 x D_F with F = (1)
    ph = phi_from_invariant({0: 1, 3: 2}, 1, [[2]], 5)
    hs = theta_decompose(ph, [[2]])
    assert hs[(0,)] == unary_theta(1, 0, 5).truncate(hs[(0,)].trunc)
    assert hs[(1,)] == unary_theta(1, 1, 5).scale(2).truncate(hs[(1,)].trunc)
    assert ph.meta["weight"] == 1


def test_decompose_rejects_non_jacobi_series():
    bad = JacobiQExp(1, 1, 1, {(0, (3,)): 1}, 4)
    with pytest.raises(ValidationError):
        theta_decompose(bad, [[2]])


def test_e8_theta_starts_with_240():
    th = theta_lattice(E8_2G, [0] * 8, 2, at_z_zero=True)
    assert th.coefficient(Fraction(0), ()) == 1
    assert th.coefficient(Fraction(1), ()) == 240


def test_series_linalg():
    t, e = theta_odd(1, 4), eta_power(3, 4)
    assert series_linalg([t, t * 2, t + t], "rank") == 1
    assert series_linalg([e, e * e], "rank") == 2
    assert series_linalg([t, t * 2], "equal") is False
    ker = series_linalg([t, t * 2], "kernel")
    assert len(ker) == 1
    with pytest.raises(ValidationError):
        series_linalg([t, e], "rank")
