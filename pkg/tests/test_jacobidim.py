from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weilform.errors import ValidationError
from weilform.jacobidim import (
    admissible_m, dim_critical, dim_formula, dim_halfweight_theta, dim_modular_forms_level1, gamma0_reduce,
    vanishing_check,
)
from weilform.qseries import all_rhos, series_linalg, theta_rho
from weilform.verify import E8_2F
from weilform.weilrep import ind_gamma0

# dim J_{1,N}(eps^8) for N = 1..14, frozen from the invariant solver and
# confirmed against the rank of the theta_rho series below
EPS8_DIMS = [0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0]


@pytest.mark.parametrize("N", range(1, 11))
def test_no_weight_one_forms_of_scalar_index(N):
    assert dim_critical([[2 * N]]).total == 0


@pytest.mark.parametrize("N", range(1, 15))
def test_eps8_dims(N):
    assert dim_critical([[2 * N]], char=8).total == EPS8_DIMS[N - 1]


@pytest.mark.parametrize("N", [1, 3, 7, 12, 13, 14])
def test_eps8_dims_match_theta_rho_rank(N):
    series = [theta_rho(N, rho, 6) for rho in all_rhos(N)]
    assert (series_linalg(series, "rank") if series else 0) == EPS8_DIMS[N - 1]


@pytest.mark.parametrize("N", [1, 2, 5, 7])
def test_eps16_vanishes(N):
    assert dim_critical([[2 * N]], char=16).total == 0


def test_e8_sublattice():
    r = dim_critical(E8_2F)
    assert r.total == 1
    assert [l for l, d, _ in r.per_l if d] == [2]


def test_eisenstein_part_and_level_independence():
    r = dim_critical([[14]], char=8, eisenstein=True)
    assert r.m == 21
    assert 0 <= r.eisenstein_total <= r.total
    assert dim_critical([[14]], char=8, m=2 * r.m).total == r.total


def test_inadmissible_m_and_bad_input():
    with pytest.raises(ValidationError):
        dim_critical([[14]], char=8, m=7)
    with pytest.raises(ValidationError):
        dim_critical([[2, 3], [3, 2]])
    with pytest.raises(ValidationError):
        dim_critical([[2]], V=ind_gamma0(2), char=8)


def test_even_rank_gives_zero():
    r = dim_critical([[2, 1], [1, 2]])
    assert r.total == 0 and r.per_l == [] and r.reason


@given(st.integers(1, 8), st.sampled_from([None, 2, 4]))
@settings(max_examples=15, deadline=None)
def test_admissible_m_divides(N, l):
    V = ind_gamma0(l) if l else None
    m = admissible_m([[2 * N]], V)
    assert (4 * m) % (4 * N) == 0
    if l:
        assert (4 * m) % l == 0


def test_halfweight_theta():
    assert [dim_halfweight_theta(m) for m in (1, 2, 3, 4)] == [2, 5, 6, 8]
    assert dim_halfweight_theta(4, eisenstein=True) == 8
    with pytest.raises(ValidationError):
        dim_halfweight_theta(0)


def test_vanishing_check():
    assert vanishing_check([[2, 1], [1, 2]])["dim"] == 0
    out = vanishing_check([[4]])
    assert out["hypotheses_met"] and out["dim"] == 0


def test_gamma0_reduce():
    assert gamma0_reduce([[6]], 12) == (12, 1)
    assert gamma0_reduce([[2]], 10) == (2, 5)
    assert gamma0_reduce([[6]], 20) == (4, 5)


@pytest.mark.parametrize("k", range(3, 21))
def test_formula_index_one(k):
    # J_{k,1} = E_4 M_{k-4} + E_6 M_{k-6} for even k, and 0 for odd k
    expect = dim_modular_forms_level1(k - 4) + dim_modular_forms_level1(k - 6) if k % 2 == 0 else 0
    assert dim_formula([[2]], k).value == expect


def test_formula_terms_are_rational():
    v = dim_formula([[2]], 10)
    assert set(v.terms) == {"volume", "elliptic_S", "elliptic_ST", "parabolic"}
    assert sum(v.terms.values(), Fraction(0)) == v.value
    assert "cusp_correction" in dim_formula([[2]], 10, cusp=True).terms
    with pytest.raises(ValidationError):
        dim_formula([[2]], Fraction(1, 3))
