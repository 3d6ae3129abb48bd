import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weilform.errors import ValidationError
from weilform.verify import E8_2G
from weilform.fqm import (
    D, L, XY3, Hyp, dm_units, fqm_from_matrix, is_isometry, isotropic_subgroups, neg, orth_sum,
    orthogonal_group, p_part, sigma_p_scalar_formula, trivial, witt_equivalent,
)

E8_2F7 = [row[:7] for row in E8_2G[:7]]


def float_sigma(m):
    """Independent floating oracle for sum e(-Q(x)) / sqrt|M|."""
    z = sum(cmath.exp(-2j * math.pi * float(m.Q(x))) for x in m.elements()) / math.sqrt(m.order)
    return (cmath.phase(z) / (2 * math.pi)) % 1.0


def test_standard_modules():
    assert D(3).info() == {"order": 6, "level": 12, "nondegenerate": True,
                           "sigma": {"2": "1/8", "3": "6/8"}, "elementary_divisors": [6]}
    assert Hyp(2).sigma() == 0
    assert L(3).sigma() == Fraction(3, 4)
    assert XY3(1).order == 4 and XY3(1).is_nondegenerate()
    assert trivial().sigma() == 0


def test_bad_parameters():
    with pytest.raises(ValidationError):
        D(3, 2)
    with pytest.raises(ValidationError):
        L(6)
    with pytest.raises(ValidationError):
        Hyp(0)


def test_determinant_group_of_e8_sublattice():
    g = fqm_from_matrix(E8_2F7)
    assert g.divisors == [4]
    assert g.module.level == 8
    assert g.module.sigma() == Fraction(1, 8)
    assert g.lift((1,)) == [-1, 0, 0, 0, 0, 0, 4]


@pytest.mark.parametrize("twoF", [[[2]], [[4]], [[2, 1], [1, 2]], [[2, 1], [1, 4]], E8_2F7, [[6, 1], [1, 2]]])
def test_milgram(twoF):
    # positive definite of rank n: sigma(D_F) = e(-n/8)
    m = fqm_from_matrix(twoF).module
    assert m.sigma() == Fraction(-len(twoF), 8) % 1


@pytest.mark.parametrize("m", [D(1), D(5), D(6, 5), L(9, 2), XY3(2), orth_sum(D(2), L(3))])
def test_sigma_against_float_oracle(m):
    assert abs(float(m.sigma()) - float_sigma(m)) < 1e-9 or abs(abs(float(m.sigma()) - float_sigma(m)) - 1) < 1e-9


@given(st.integers(1, 60), st.sampled_from([2, 3, 5, 7]))
@settings(max_examples=60, deadline=None)
def test_sigma_p_closed_formula(n, p):
    if n % p:
        return
    assert p_part(D(n), p).sigma() == sigma_p_scalar_formula(n, p)


@given(st.integers(1, 30))
@settings(max_examples=30, deadline=None)
def test_sigma_is_product_of_local_sigmas(n):
    m = D(n)
    assert sum(m.sigma_table().values(), Fraction(0)) % 1 == m.sigma()


@given(st.integers(1, 12), st.integers(1, 12))
@settings(max_examples=30, deadline=None)
def test_sigma_multiplicative_and_neg(a, b):
    m, n = D(a), D(b)
    assert orth_sum(m, n).sigma() == (m.sigma() + n.sigma()) % 1
    assert neg(m).sigma() == (-m.sigma()) % 1
    assert witt_equivalent(orth_sum(m, neg(m)), trivial())


@given(st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_dm_units_are_isometries(m):
    units = dm_units(m)
    assert len(units) == 2 ** len([p for p in range(2, m + 1) if m % p == 0 and all(p % q for q in range(2, p))])
    for a in units:
        assert is_isometry(D(m), [(a,)])


def test_orthogonal_group_brute_force():
    assert len(orthogonal_group(D(6))) == 4
    assert len(orthogonal_group(Hyp(2))) == 2


def test_isotropic_subgroups():
    assert len(isotropic_subgroups(Hyp(2))) == 3
    sd = isotropic_subgroups(Hyp(2), "self_dual")
    assert len(sd) == 2 and all(u.is_self_dual() for u in sd)
    # |D_m| = 2m and isotropic subgroups of D_m have order d with d^2 | m
    for m in range(1, 17):
        assert not isotropic_subgroups(D(m), "self_dual")
        assert sorted(u.order for u in isotropic_subgroups(D(m))) == [d for d in range(1, m + 1) if m % (d * d) == 0]


def brute_isotropic(m):
    """Isotropic subgroups of a small module, as member sets, from all generating pairs."""
    els = [tuple(x) for x in m.elements()]
    found = set()
    for a in els:
        for b in els:
            span = {m.reduce([i * x + j * y for x, y in zip(a, b)]) for i in range(m.level) for j in range(m.level)}
            if all(m.Q(x) % 1 == 0 for x in span):
                found.add(frozenset(span))
    return found


@pytest.mark.parametrize("m", [Hyp(2), Hyp(4), XY3(1), orth_sum(D(4), D(1)), D(16), orth_sum(L(3), L(3, 2))])
def test_isotropic_subgroups_brute_force(m):
    ours = {frozenset(tuple(x) for x in u.elements()) for u in isotropic_subgroups(m)}
    assert ours == brute_isotropic(m)


def test_witt_methods_agree():
    pairs = [(D(1), neg(D(1))), (D(4), trivial()), (L(3), L(3, 2)), (Hyp(3), trivial()), (D(2), D(2, 5))]
    for m, n in pairs:
        assert witt_equivalent(m, n) == witt_equivalent(m, n, "reduction")
