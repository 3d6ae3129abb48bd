"""Dimensions of Jacobi forms: critical weight via Weil invariants, and the
general dimension formula evaluated exactly from traces on an eigenspace."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import divisors, factorint

from .errors import ConsistencyError, ValidationError
from .exactnum import CyclotomicNumber, e_of, fraction_to_str, lcm, sqrt_exact
from .fqm import D, dm_units, fqm_from_matrix, is_positive_definite, neg
from .intlin import det, elementary_divisors
from .weilrep import GenRep, eigenspace_Z, eps_char, neg_symmetry, tensor, trivial_rep, weil_rep


def level_of_rep(rep: GenRep) -> int:
    """Order of (T, 1) on the representation."""
    n = rep.conductor
    seen = np.zeros(rep.dim, dtype=bool)
    out = 1
    for start in range(rep.dim):
        if seen[start]:
            continue
        j, length, phase = start, 0, 0
        while not seen[j]:
            seen[j] = True
            phase += int(rep.t_expo[j])
            j = int(rep.t_perm[j])
            length += 1
        out = lcm(out, length * (n // math.gcd(phase % n, n)))
    return out


def _resolve_rep(V: GenRep | None, char: int | None) -> GenRep:
    if V is not None and char is not None:
        raise ValidationError("give either a representation or a character, not both")
    if char is not None:
        return eps_char(char)
    return V if V is not None else trivial_rep()


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(n).values())


def admissible_m(twoF, V: GenRep | None = None) -> int:
    """Smallest m with level(D_F) | 4m and the T-order of V dividing 4m."""
    f = fqm_from_matrix(twoF).module.level
    big = lcm(f, level_of_rep(V) if V is not None else 1)
    return big // math.gcd(big, 4)


@dataclass
class CriticalDimReport:
    F: list
    char_a: int | None
    m: int
    per_l: list = field(default_factory=list)  # (l, dim, vectors)
    total: int = 0
    eisenstein_total: int | None = None
    per_l_eisenstein: list = field(default_factory=list)
    reason: str = ""

    def to_json(self, with_vectors: bool = False) -> dict:
        out = {
            "F": self.F,
            "char": self.char_a,
            "m": self.m,
            "four_m": 4 * self.m,
            "per_l": [{"l": l, "dim": d} for l, d, _ in self.per_l],
            "total": self.total,
            "eisenstein_total": self.eisenstein_total,
        }
        if self.reason:
            out["reason"] = self.reason
        if with_vectors:
            for row, (_, _, basis) in zip(out["per_l"], self.per_l):
                row["basis"] = basis.to_json()["basis"]
        return out


def critical_rep(twoF, l: int, V: GenRep) -> tuple[GenRep, tuple[int, int, int]]:
    """W(-l) (x) W(-F) (x) V together with the factor dimensions."""
    dF = fqm_from_matrix(twoF).module
    a = weil_rep(neg(D(l)))
    b = weil_rep(neg(dF))
    return tensor(tensor(a, b), V), (a.dim, b.dim, V.dim)


def _sign_op(rep: GenRep, perm: np.ndarray, sign: int):
    expo = np.zeros(rep.dim, dtype=np.int64) if sign == 1 else np.full(rep.dim, rep.conductor // 2, dtype=np.int64)
    return perm, expo


def _multiplier_op(rep: GenRep, dims, l: int, u: int):
    dl = dims[0]
    perm = np.arange(rep.dim)
    first, rest = np.divmod(perm, rep.dim // dl)
    return (first * u) % (2 * l) * (rep.dim // dl) + rest, np.zeros(rep.dim, dtype=np.int64)


def dim_critical(twoF, V: GenRep | None = None, char: int | None = None, eisenstein: bool = False,
                 m: int | None = None) -> CriticalDimReport:
    """dim J_{(n+1)/2,F}(Gamma, V) as a sum over l | m, m/l squarefree, of
    dim Inv(W(-l)^eps (x) W(-F) (x) V)."""
    if not is_positive_definite(twoF):
        raise ValidationError("F must be positive definite")
    twoF = [[int(x) for x in row] for row in twoF]
    rep_v = _resolve_rep(V, char)
    n = len(twoF)
    m_min = admissible_m(twoF, rep_v)
    if m is None:
        m = m_min
    elif m % m_min:
        raise ValidationError(f"m = {m} is not admissible (needs a multiple of {m_min})")
    report = CriticalDimReport(twoF, char, m)
    if n % 2 == 0:
        report.reason = "n even: (-1, 1) acts by -1 on both sides"
        if eisenstein:
            report.eisenstein_total = 0
        return report
    for l in divisors(m):
        if not _squarefree(m // l):
            continue
        rep, dims = critical_rep(twoF, l, rep_v)
        dl = neg(D(l))
        perm, sign = neg_symmetry(dims, 0, dl.neg_index())
        basis = rep.invariants([_sign_op(rep, perm, sign)])
        report.per_l.append((l, basis.dimension, basis))
        report.total += basis.dimension
        if eisenstein:
            ops = [_multiplier_op(rep, dims, l, u) for u in dm_units(l)]
            eb = rep.invariants(ops)
            report.per_l_eisenstein.append((l, eb.dimension, eb))
    if eisenstein:
        report.eisenstein_total = sum(d for _, d, _ in report.per_l_eisenstein)
    return report


def dim_critical_eisenstein(twoF, V: GenRep | None = None, char: int | None = None, m: int | None = None) -> int:
    return dim_critical(twoF, V, char, eisenstein=True, m=m).eisenstein_total


def dim_halfweight_theta(m: int, eisenstein: bool = False) -> int:
    """dim M_{1/2}(Gamma(4m)) (or its Eisenstein part) from the l-decomposition."""
    if m < 1:
        raise ValidationError("m must be positive")
    total = 0
    for l in divisors(m):
        if not _squarefree(m // l):
            continue
        if not eisenstein:
            total += l + 1
            continue
        units = dm_units(l)
        seen = set()
        for x in range(2 * l):
            if x not in seen:
                total += 1
                seen.update((u * x) % (2 * l) for u in units)
    return total


def vanishing_check(twoF) -> dict:
    """Hypotheses of the small-rank vanishing theorem and, when met, the computed dimension."""
    n = len(twoF)
    nontrivial = [d for d in elementary_divisors(twoF) if d != 1]
    met = n % 8 != 7 and len(nontrivial) <= 1
    out = {"n": n, "elementary_divisors": nontrivial, "hypotheses_met": met}
    if met or n % 2 == 1:
        dim = dim_critical(twoF).total
        out["dim"] = dim
        if met and dim != 0:
            raise ConsistencyError(f"vanishing theorem violated: dim = {dim}")
    return out


def gamma0_reduce(twoF, l: int) -> tuple[int, int]:
    """l = l1 * l2 with l1 | det(2F)^infinity and gcd(l2, det 2F) = 1."""
    if l < 1:
        raise ValidationError("l must be positive")
    dt = abs(int(det(twoF)))
    l1 = 1
    for p, e in factorint(l).items():
        if dt % p == 0:
            l1 *= p ** e
    return l1, l // l1


# ---------------------------------------------------------------------------
# dimension formula


@dataclass
class DimFormulaValue:
    k: Fraction
    F: list
    rep: str
    value: Fraction
    cusp_variant: bool
    terms: dict
    dim_X: int = 0

    def to_json(self) -> dict:
        return {
            "k": fraction_to_str(self.k),
            "F": self.F,
            "rep": self.rep,
            "value": fraction_to_str(self.value),
            "cusp": self.cusp_variant,
            "dim_X": self.dim_X,
            "terms": {name: fraction_to_str(v) for name, v in self.terms.items()},
        }


def _re(z: CyclotomicNumber) -> CyclotomicNumber:
    return (z + z.conj()) * Fraction(1, 2)


def _rational(z: CyclotomicNumber, what: str) -> Fraction:
    if not z.is_rational():
        raise ConsistencyError(f"{what} is not rational: {z!r}")
    return z.to_fraction()


def traces_on_X(rep: GenRep, target: Fraction):
    """(dim X, tr S|X, tr ST|X, lambdas) for X the S^2-eigenspace e(target)."""
    if not np.array_equal(rep.t_perm, np.arange(rep.dim)):
        raise ValidationError("the dimension formula needs a diagonal T")
    rep = rep.rescale(lcm(rep.conductor, Fraction(target).denominator))
    n = rep.conductor
    _, orbits = eigenspace_Z(rep, target)
    tr_s = np.zeros(n, dtype=object)
    tr_st = np.zeros(n, dtype=object)
    lams = []
    for o in orbits:
        root = int(o.indices[0])
        t = int(rep.t_expo[root])
        if (rep.t_expo[o.indices] != t).any():
            raise ConsistencyError("T is not constant on a Z-orbit")
        mult, expo = rep.s_block(np.array([root]), o.indices)
        e = (expo[0] + o.phases - o.phases[0]) % n
        for ex, mu in zip(e, mult[0]):
            tr_s[ex] += int(mu)
            tr_st[(ex + t) % n] += int(mu)
        lams.append(Fraction(t, n))
    sc = rep.s_scalar
    return (len(orbits), sc * CyclotomicNumber.from_group_ring(n, list(tr_s)),
            sc * CyclotomicNumber.from_group_ring(n, list(tr_st)), lams)


def dim_formula(twoF, k, V: GenRep | None = None, char: int | None = None, cusp: bool = False) -> DimFormulaValue:
    """Right-hand side of the dimension formula, evaluated in a cyclotomic field.

    X is the eigenspace of Z = (-1, i) in W(F)^* (x) V, with W(F)^* realised as
    W(-F).  The first coefficient is (k - n/2 - 1)/12.  The value equals
    dim J_{k,F}(V) when k >= n/2 + 2.
    """
    if not is_positive_definite(twoF):
        raise ValidationError("F must be positive definite")
    k = Fraction(k)
    if (2 * k).denominator != 1:
        raise ValidationError("k must be a half-integer")
    rep_v = _resolve_rep(V, char)
    n = len(twoF)
    rep = tensor(weil_rep(neg(fqm_from_matrix(twoF).module)), rep_v)
    target = Fraction(int(n - 2 * k), 4)
    dim_x, tr_s, tr_st, lams = traces_on_X(rep, target)
    half_n = Fraction(n, 2)
    t1 = (k - half_n - 1) / 12 * dim_x
    t2 = _rational(_re(e_of((k - half_n) / 4) * tr_s), "S-trace term") / 4
    z = _re(e_of((2 * k - n + 1) / 12) * tr_st) * sqrt_exact(3)
    t3 = _rational(z, "ST-trace term") * Fraction(2, 9)
    t4 = -sum((lam - Fraction(1, 2) for lam in lams), Fraction(0))
    terms = {"volume": t1, "elliptic_S": t2, "elliptic_ST": t3, "parabolic": t4}
    if cusp:
        terms["cusp_correction"] = -Fraction(sum(1 for lam in lams if lam == 0))
    value = sum(terms.values(), Fraction(0))
    return DimFormulaValue(k, [list(r) for r in twoF], rep_v.meta.get("source", "?"), value, cusp, terms, dim_x)


def dim_modular_forms_level1(k: int) -> int:
    """dim M_k(SL2(Z)) by the closed form."""
    if k < 0 or k % 2:
        return 0
    if k % 12 == 2:
        return k // 12
    return k // 12 + 1
