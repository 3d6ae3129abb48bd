from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weilform.exactnum import CyclotomicNumber, e_of
from weilform.fqm import D, L, XY3, Hyp, neg, orth_sum
from weilform.verify import criterion_relations
from weilform.weilrep import (
    char_twist, decompose_rank1, eps_char, ind_gamma0, invariants_from_selfdual, restrict, tensor, weil_rep,
)

small = st.one_of(
    st.integers(1, 12).map(D),
    st.sampled_from([3, 5, 7, 9]).flatmap(lambda q: st.sampled_from([1, 2]).map(lambda a: L(q, a))),
    st.integers(1, 3).map(Hyp),
    st.integers(1, 2).map(XY3),
)


@given(small, st.one_of(st.none(), small))
@settings(max_examples=25, deadline=None)
def test_weil_relations_hold(m, n):
    mod = m if n is None else orth_sum(m, neg(n))
    assert all(weil_rep(mod).check_relations().values())


@given(st.integers(-30, 30))
@settings(max_examples=20, deadline=None)
def test_eps_characters(a):
    r = eps_char(a)
    t, s = r.to_dense()
    assert t[0][0] == e_of(Fraction(a, 24))
    assert s[0][0] == e_of(Fraction(-a, 8))
    assert all(r.check_relations().values())


@pytest.mark.parametrize("a", [1, 2])
def test_eps_from_antisymmetric_part_of_L3(a):
    # the span of e_1 - e_2 in W(L_3(a)) affords eps^(8a)
    r = weil_rep(L(3, a))
    z, o = CyclotomicNumber.zero(r.conductor), CyclotomicNumber.one(r.conductor)
    d = restrict(r, [[z, o, -o]])
    et, es = eps_char(8 * a).to_dense()
    assert d.matT[0][0] == et[0][0]
    assert d.matS[0][0] == es[0][0]


def test_twist_and_tensor_relations():
    assert all(char_twist(weil_rep(D(2)), 2).check_relations().values())
    t = tensor(weil_rep(D(1)), weil_rep(L(3)))
    assert t.dim == 6
    assert all(t.check_relations().values())


def test_corrupted_generators_are_caught():
    checks = criterion_relations(corrupt=True)
    assert checks and all(c.status == "fail" for c in checks)


@pytest.mark.parametrize("l,dim", [(2, 3), (3, 4), (5, 6), (6, 12)])
def test_induced_from_gamma0(l, dim):
    r = ind_gamma0(l)
    assert r.dim == dim
    assert all(r.check_relations().values())
    # only the constant function is invariant
    assert r.invariants().dimension == 1


@pytest.mark.parametrize("m", [Hyp(2), orth_sum(D(2), neg(D(2))), orth_sum(D(1), neg(D(1))), Hyp(3), orth_sum(L(3), L(3))])
def test_invariants_spanned_by_selfdual_indicators(m):
    basis, _ = invariants_from_selfdual(m)
    assert weil_rep(m).invariants().dimension == len(basis)


@pytest.mark.parametrize("m", [D(1), D(3), D(5)])
def test_no_invariants_without_selfdual_subgroups(m):
    assert weil_rep(m).invariants().dimension == 0


@pytest.mark.parametrize("m", [1, 2, 4, 6, 9, 12])
def test_rank1_decomposition_is_complete(m):
    pieces = decompose_rank1(m)
    assert sum(p["dim"] for p in pieces) == 2 * m
