"""Exact truncated Fourier expansions sum c(l, r) q^l zeta^r.

Keys are integer pairs (l * q_den, r * zeta_den); coefficients are Fractions,
or CyclotomicNumbers when irrational.  A series is known for q-exponents
strictly below its truncation order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from . import intlin
from .errors import ValidationError
from .exactnum import CyclotomicNumber, fraction_to_str
from .fqm import fqm_from_matrix, is_positive_definite, kronecker


def _clean(c):
    if isinstance(c, CyclotomicNumber):
        c = c.minimal_conductor()
        return c.to_fraction() if c.is_rational() else c
    return Fraction(c)


def _coeff_json(c):
    if isinstance(c, CyclotomicNumber):
        return c.to_json()
    return fraction_to_str(c)


class JacobiQExp:
    def __init__(self, n_vars: int, q_den: int, zeta_den: int, coeffs: dict, trunc, meta: dict | None = None):
        if zeta_den not in (1, 2):
            raise ValidationError("zeta_den must be 1 or 2")
        self.n_vars = int(n_vars)
        self.trunc = Fraction(trunc)
        meta = dict(meta or {})
        bound = self.trunc * q_den
        out = {}
        for (qn, r), c in coeffs.items():
            r = tuple(int(x) for x in r)
            if len(r) != self.n_vars:
                raise ValidationError("exponent vector has the wrong length")
            if qn >= bound:
                continue
            c = _clean(c)
            if c:
                out[(int(qn), r)] = c
        # canonical denominators
        g = q_den
        for qn, _ in out:
            g = math.gcd(g, qn)
            if g == 1:
                break
        if zeta_den == 2 and all(x % 2 == 0 for _, r in out for x in r):
            out = {(qn, tuple(x // 2 for x in r)): c for (qn, r), c in out.items()}
            zeta_den = 1
        if g > 1 and out:
            out = {(qn // g, r): c for (qn, r), c in out.items()}
            q_den //= g
        elif not out:
            q_den = 1
        self.q_den = int(q_den)
        self.zeta_den = zeta_den
        self.coeffs = out
        self.meta = meta

    # -- construction helpers -----------------------------------------
    @classmethod
    def from_terms(cls, n_vars: int, terms: dict, trunc, zeta_den: int = 1, meta=None) -> "JacobiQExp":
        """terms: {(Fraction q-exponent, r): c}; r already scaled by zeta_den."""
        den = 1
        for q, _ in terms:
            den = math.lcm(den, Fraction(q).denominator)
        coeffs = {}
        for (q, r), c in terms.items():
            key = (int(Fraction(q) * den), tuple(r))
            coeffs[key] = coeffs.get(key, 0) + c
        return cls(n_vars, den, zeta_den, coeffs, trunc, meta)

    @classmethod
    def constant(cls, c, n_vars: int = 0, trunc=Fraction(10 ** 6)) -> "JacobiQExp":
        return cls(n_vars, 1, 1, {(0, (0,) * n_vars): c}, trunc)

    def _scaled(self, q_den: int, zeta_den: int) -> dict:
        fq, fz = q_den // self.q_den, zeta_den // self.zeta_den
        return {(qn * fq, tuple(x * fz for x in r)): c for (qn, r), c in self.coeffs.items()}

    def lift_vars(self, n_vars: int) -> "JacobiQExp":
        """A q-series viewed as a series in n_vars elliptic variables."""
        if self.n_vars == n_vars:
            return self
        if self.n_vars:
            raise ValidationError("series have different numbers of elliptic variables")
        return JacobiQExp(n_vars, self.q_den, 1, {(qn, (0,) * n_vars): c for (qn, _), c in self.coeffs.items()},
                          self.trunc, self.meta)

    def _common(self, other: "JacobiQExp"):
        if self.n_vars != other.n_vars:
            n = max(self.n_vars, other.n_vars)
            return self.lift_vars(n)._common(other.lift_vars(n))
        qd = math.lcm(self.q_den, other.q_den)
        zd = max(self.zeta_den, other.zeta_den)
        return qd, zd, self._scaled(qd, zd), other._scaled(qd, zd)

    # -- queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def valuation(self) -> Fraction:
        if not self.coeffs:
            return self.trunc
        return Fraction(min(qn for qn, _ in self.coeffs), self.q_den)

    def coefficient(self, q, r=()) -> object:
        q = Fraction(q)
        r = tuple(Fraction(x) for x in r)
        if q >= self.trunc:
            raise ValidationError("coefficient beyond the truncation order")
        qn = q * self.q_den
        rs = tuple(x * self.zeta_den for x in r)
        if qn.denominator != 1 or any(x.denominator != 1 for x in rs):
            return Fraction(0)
        return self.coeffs.get((int(qn), tuple(int(x) for x in rs)), Fraction(0))

    def terms(self):
        """(q-exponent, r-vector, coefficient), q ascending then r lexicographic."""
        for qn, r in sorted(self.coeffs):
            yield Fraction(qn, self.q_den), tuple(Fraction(x, self.zeta_den) for x in r), self.coeffs[(qn, r)]

    def truncate(self, order) -> "JacobiQExp":
        order = min(Fraction(order), self.trunc)
        return JacobiQExp(self.n_vars, self.q_den, self.zeta_den, self.coeffs, order, self.meta)

    def with_meta(self, **kw) -> "JacobiQExp":
        return JacobiQExp(self.n_vars, self.q_den, self.zeta_den, self.coeffs, self.trunc, dict(self.meta, **kw))

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, JacobiQExp):
            other = JacobiQExp.constant(other, self.n_vars)
        qd, zd, a, b = self._common(other)
        out = dict(a)
        for k, c in b.items():
            out[k] = out[k] + c if k in out else c
        return JacobiQExp(max(self.n_vars, other.n_vars), qd, zd, out, min(self.trunc, other.trunc), self.meta)

    __radd__ = __add__

    def __neg__(self):
        return JacobiQExp(self.n_vars, self.q_den, self.zeta_den, {k: -c for k, c in self.coeffs.items()},
                          self.trunc, self.meta)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "JacobiQExp":
        return JacobiQExp(self.n_vars, self.q_den, self.zeta_den, {k: v * c for k, v in self.coeffs.items()},
                          self.trunc, self.meta)

    def __mul__(self, other):
        if not isinstance(other, JacobiQExp):
            return self.scale(other)
        trunc = min(self.trunc + other.valuation(), other.trunc + self.valuation())
        qd, zd, a, b = self._common(other)
        bound = trunc * qd
        by_q: dict[int, list] = {}
        for (qn, r), c in b.items():
            by_q.setdefault(qn, []).append((r, c))
        out: dict = {}
        bq = sorted(by_q)
        for (qa, ra), ca in a.items():
            for qb in bq:
                if qa + qb >= bound:
                    break
                for rb, cb in by_q[qb]:
                    key = (qa + qb, tuple(x + y for x, y in zip(ra, rb)))
                    v = ca * cb
                    out[key] = out[key] + v if key in out else v
        ww = _combine_meta(self.meta, other.meta)
        return JacobiQExp(max(self.n_vars, other.n_vars), qd, zd, out, trunc, ww)

    __rmul__ = scale

    def inverse(self) -> "JacobiQExp":
        """1/f for f whose lowest q-power is a single monomial."""
        if not self.coeffs:
            raise ZeroDivisionError("zero series")
        v = min(qn for qn, _ in self.coeffs)
        lead = [(r, c) for (qn, r), c in self.coeffs.items() if qn == v]
        if len(lead) != 1:
            raise ValidationError("leading coefficient is not a monomial")
        r0, c0 = lead[0]
        vq = Fraction(v, self.q_den)
        rel_order = self.trunc - vq
        inv_c0 = 1 / c0
        # f = c0 q^v zeta^r0 (1 + u)
        u = {(qn - v, tuple(x - y for x, y in zip(r, r0))): c * inv_c0
             for (qn, r), c in self.coeffs.items() if qn != v}
        unit = JacobiQExp(self.n_vars, self.q_den, self.zeta_den, u, rel_order)
        one = JacobiQExp(self.n_vars, 1, 1, {(0, (0,) * self.n_vars): 1}, rel_order)
        acc, powk = one, one
        while True:
            powk = -(powk * unit).truncate(rel_order)
            if powk.is_zero():
                break
            acc = acc + powk
        qd = math.lcm(acc.q_den, self.q_den)
        fq = qd // self.q_den
        fz = max(acc.zeta_den, self.zeta_den) // self.zeta_den
        shift = {}
        for (qn, r), c in acc._scaled(qd, max(acc.zeta_den, self.zeta_den)).items():
            shift[(qn - v * fq, tuple(x - y * fz for x, y in zip(r, r0)))] = c * inv_c0
        meta = {}
        if "weight" in self.meta:
            meta["weight"] = -self.meta["weight"]
        if "char" in self.meta:
            meta["char"] = (-self.meta["char"]) % 24
        if "index" in self.meta:
            meta["index"] = [[-x for x in row] for row in self.meta["index"]]
        return JacobiQExp(self.n_vars, qd, max(acc.zeta_den, self.zeta_den), shift, rel_order - vq, meta)

    def __truediv__(self, other):
        if isinstance(other, JacobiQExp):
            return self * other.inverse()
        return self.scale(1 / Fraction(other) if not isinstance(other, CyclotomicNumber) else 1 / other)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = JacobiQExp(self.n_vars, 1, 1, {(0, (0,) * self.n_vars): 1}, Fraction(10 ** 6))
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, JacobiQExp):
            return NotImplemented
        return series_linalg([self, other], "equal")

    __hash__ = None

    # -- substitutions --------------------------------------------------
    def subs_zeta(self, a: int) -> "JacobiQExp":
        """zeta -> zeta^a (one elliptic variable)."""
        if self.n_vars != 1:
            raise ValidationError("subs_zeta needs one elliptic variable")
        out = {(qn, (r[0] * a,)): c for (qn, r), c in self.coeffs.items()}
        meta = dict(self.meta)
        if "index" in meta:
            meta["index"] = [[meta["index"][0][0] * a * a]]
        return JacobiQExp(1, self.q_den, self.zeta_den, out, self.trunc, meta)

    def at_z_zero(self) -> "JacobiQExp":
        out: dict = {}
        for (qn, _), c in self.coeffs.items():
            k = (qn, ())
            out[k] = out[k] + c if k in out else c
        meta = {k: v for k, v in self.meta.items() if k != "index"}
        return JacobiQExp(0, self.q_den, 1, out, self.trunc, meta)

    def to_json(self) -> dict:
        meta = {}
        if "weight" in self.meta:
            meta["weight"] = fraction_to_str(Fraction(self.meta["weight"]))
        if "index" in self.meta:
            meta["index"] = [[fraction_to_str(Fraction(x)) for x in row] for row in self.meta["index"]]
        if "char" in self.meta:
            meta["char"] = int(self.meta["char"]) % 24
        return {
            "q_den": self.q_den,
            "zeta_den": self.zeta_den,
            "trunc": fraction_to_str(self.trunc),
            "terms": [{"q": qn, "r": list(r), "c": _coeff_json(self.coeffs[(qn, r)])}
                      for qn, r in sorted(self.coeffs)],
            "meta": meta,
        }

    def __repr__(self):
        return f"JacobiQExp(n_vars={self.n_vars}, terms={len(self.coeffs)}, trunc={self.trunc})"


def _combine_meta(a: dict, b: dict) -> dict:
    out = {}
    if "weight" in a and "weight" in b:
        out["weight"] = Fraction(a["weight"]) + Fraction(b["weight"])
    if "char" in a and "char" in b:
        out["char"] = (a["char"] + b["char"]) % 24
    if "index" in a and "index" in b and len(a["index"]) == len(b["index"]):
        out["index"] = [[Fraction(x) + Fraction(y) for x, y in zip(ra, rb)] for ra, rb in zip(a["index"], b["index"])]
    elif ("index" in a) != ("index" in b):
        # a factor without elliptic variables has index 0
        out["index"] = [list(row) for row in (a.get("index") or b.get("index"))]
    return out


# ---------------------------------------------------------------------------
# integer power series helpers (lists indexed by integer q-powers)


def _euler_product(order: int) -> list[int]:
    """prod_{n>=1} (1 - q^n) up to q^(order-1)."""
    p = [0] * order
    if order:
        p[0] = 1
    for n in range(1, order):
        for i in range(order - 1, n - 1, -1):
            p[i] -= p[i - n]
    return p


def _ps_mul(a: list, b: list, order: int) -> list:
    out = [0] * order
    for i, x in enumerate(a[:order]):
        if x:
            for j, y in enumerate(b[:order - i]):
                if y:
                    out[i + j] += x * y
    return out


def _ps_inv(a: list, order: int) -> list:
    out = [Fraction(0)] * order
    out[0] = Fraction(1, a[0])
    for n in range(1, order):
        s = sum(a[k] * out[n - k] for k in range(1, min(n, len(a) - 1) + 1))
        out[n] = -s * out[0]
    return [int(x) if x.denominator == 1 else x for x in out]


def _ps_pow(a: list, e: int, order: int) -> list:
    if e < 0:
        a = _ps_inv(a, order)
        e = -e
    out = [1] + [0] * (order - 1)
    while e:
        if e & 1:
            out = _ps_mul(out, a, order)
        e >>= 1
        if e:
            a = _ps_mul(a, a, order)
    return out


def eta_power(e: int, trunc) -> JacobiQExp:
    """eta^e = q^(e/24) prod (1 - q^n)^e, valid for q-exponents < trunc."""
    trunc = Fraction(trunc)
    order = max(0, math.ceil(trunc - Fraction(e, 24)))
    p = _ps_pow(_euler_product(order), e, order) if order else []
    coeffs = {(e + 24 * n, ()): c for n, c in enumerate(p)}
    return JacobiQExp(0, 24, 1, coeffs, trunc, {"weight": Fraction(e, 2), "char": e % 24})


def eta_qexp(trunc) -> JacobiQExp:
    return eta_power(1, trunc)


def theta_odd(a: int, trunc) -> JacobiQExp:
    """theta(tau, a z) from q^(1/8)(zeta^(1/2) - zeta^(-1/2)) prod (1-q^n)(1-q^n zeta)(1-q^n zeta^-1)."""
    if a < 1:
        raise ValidationError("a must be positive")
    trunc = Fraction(trunc)
    order = max(0, math.ceil(trunc - Fraction(1, 8)))
    # polynomial in q (integer powers) and w = zeta^(1/2), as {(n, s): c}
    series = {(0, 1): 1, (0, -1): -1}
    for n in range(1, order):
        new: dict = {}
        for (qn, s), c in series.items():
            for dq, ds, f in ((0, 0, 1), (n, 0, -1), (n, 2, -1), (n, -2, -1), (2 * n, 0, 1), (2 * n, 2, 1), (2 * n, -2, 1), (3 * n, 0, -1)):
                if qn + dq >= order:
                    continue
                key = (qn + dq, s + ds)
                new[key] = new.get(key, 0) + f * c
        series = {k: v for k, v in new.items() if v}
    coeffs = {(1 + 8 * qn, (s * a,)): c for (qn, s), c in series.items()}
    meta = {"weight": Fraction(1, 2), "index": [[Fraction(a * a, 2)]], "char": 3}
    return JacobiQExp(1, 8, 2, coeffs, trunc, meta)


def theta_odd_sum(a: int, trunc) -> JacobiQExp:
    """The same series from sum_{r in Z+1/2} (-1)^(r-1/2) q^(r^2/2) zeta^(a r)."""
    trunc = Fraction(trunc)
    coeffs = {}
    s = 1
    while Fraction(s * s, 8) < trunc:
        for t in (s, -s):
            # r = t/2, sign (-1)^(r - 1/2)
            sign = -1 if ((t - 1) // 2) % 2 else 1
            coeffs[(t * t, (t * a,))] = sign
        s += 2
    meta = {"weight": Fraction(1, 2), "index": [[Fraction(a * a, 2)]], "char": 3}
    return JacobiQExp(1, 8, 2, coeffs, trunc, meta)


def theta_block(eta_exp: int, factors: Sequence[int], trunc) -> JacobiQExp:
    """eta^eta_exp * prod theta(tau, a_i z), exact below trunc."""
    trunc = Fraction(trunc)
    vals = [Fraction(eta_exp, 24)] + [Fraction(1, 8)] * len(factors)
    total_v = sum(vals)
    pieces = [eta_power(eta_exp, trunc - (total_v - vals[0]))]
    for a, v in zip(factors, vals[1:]):
        pieces.append(theta_odd(a, trunc - (total_v - v)))
    if not factors:
        out = pieces[0]
    else:
        out = pieces[1]
        for p in pieces[2:]:
            out = out * p
        out = pieces[0] * out
    out.meta.update(weight=Fraction(eta_exp + len(factors), 2), char=(eta_exp + 3 * len(factors)) % 24,
                    index=[[Fraction(sum(a * a for a in factors), 2)]])
    return out.truncate(trunc)


# ---------------------------------------------------------------------------
# lattice thetas


def _fraction_matrix(twoF):
    return [[Fraction(x, 2) for x in row] for row in twoF]


def enumerate_ellipsoid(F: list[list[Fraction]], center: Sequence[Fraction], bound: Fraction):
    """Integer vectors y with F[y - center] < bound (F positive definite)."""
    n = len(F)
    q = [[Fraction(x) for x in row] for row in F]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    out = []
    y = [0] * n

    def rec(i, rem):
        if i < 0:
            out.append(tuple(y))
            return
        shift = sum(q[i][j] * (y[j] - center[j]) for j in range(i + 1, n))
        c = center[i] - shift
        width = math.sqrt(max(float(rem / q[i][i]), 0.0)) + 1
        lo, hi = math.floor(float(c) - width), math.ceil(float(c) + width)
        for t in range(lo, hi + 1):
            use = q[i][i] * (t - c) ** 2
            if use < rem:
                y[i] = t
                rec(i - 1, rem - use)
        y[i] = 0

    rec(n - 1, Fraction(bound))
    return out


def quad_form(F, x) -> Fraction:
    n = len(F)
    return sum(x[i] * F[i][j] * x[j] for i in range(n) for j in range(n))


def theta_lattice(twoF, x: Sequence[int], trunc, at_z_zero: bool = False) -> JacobiQExp:
    """theta_{F,x} = sum over r = x mod 2F Z^n of q^(F^-1[r]/4) zeta^r."""
    if not is_positive_definite(twoF):
        raise ValidationError("F must be positive definite")
    n = len(twoF)
    if len(x) != n:
        raise ValidationError("coset representative has the wrong length")
    F = _fraction_matrix(twoF)
    inv2F = intlin.inverse(twoF)
    center = [-sum(inv2F[i][j] * x[j] for j in range(n)) for i in range(n)]
    terms = {}
    for lam in enumerate_ellipsoid(F, center, Fraction(trunc)):
        r = tuple(x[i] + sum(twoF[i][j] * lam[j] for j in range(n)) for i in range(n))
        qe = quad_form(F, [lam[i] - center[i] for i in range(n)])
        key = (qe, () if at_z_zero else r)
        terms[key] = terms.get(key, 0) + 1
    meta = {"weight": Fraction(n, 2)}
    if not at_z_zero:
        meta["index"] = F
    return JacobiQExp.from_terms(0 if at_z_zero else n, terms, trunc, meta=meta)


def theta_rho(N: int, rho: tuple[int, int], trunc) -> JacobiQExp:
    """sum over alpha in Z[omega] of (x(alpha)/3) q^(|alpha|^2/3) zeta^(y(alpha rho)).

    Eisenstein integers are pairs (u, v) with alpha = (u + v sqrt(-3))/2, u = v mod 2.
    """
    p, q = rho
    if (p - q) % 2 or p * p + 3 * q * q != 4 * N:
        raise ValidationError(f"rho = ({p} + {q} sqrt(-3))/2 does not have norm {N}")
    trunc = Fraction(trunc)
    coeffs = {}
    vmax = math.isqrt(int(4 * trunc)) + 1
    for v in range(-vmax, vmax + 1):
        umax = math.isqrt(max(0, int(12 * trunc) - 3 * v * v)) + 1
        for u in range(-umax, umax + 1):
            if (u - v) % 2:
                continue
            e = u * u + 3 * v * v  # 12 * |alpha|^2 / 3
            if Fraction(e, 12) >= trunc:
                continue
            chi = kronecker(u, 3)
            if chi == 0:
                continue
            y = (u * q + v * p) // 2
            key = (e, (y,))
            coeffs[key] = coeffs.get(key, 0) + chi
    meta = {"weight": Fraction(1), "index": [[Fraction(N)]], "char": 8}
    return JacobiQExp(1, 12, 1, coeffs, trunc, meta)


def normalized_rhos(N: int) -> list[tuple[int, int]]:
    """All (p, q) with p = q mod 2, p^2 + 3 q^2 = 4N and q >= |p| > 0."""
    out = []
    for q in range(1, math.isqrt(4 * N // 3) + 1):
        rest = 4 * N - 3 * q * q
        p = math.isqrt(rest)
        if p * p == rest and p > 0 and q >= p and (p - q) % 2 == 0:
            out += [(p, q), (-p, q)]
    return sorted(set(out))


def all_rhos(N: int) -> list[tuple[int, int]]:
    out = []
    for q in range(-math.isqrt(4 * N // 3) - 1, math.isqrt(4 * N // 3) + 2):
        rest = 4 * N - 3 * q * q
        if rest < 0:
            continue
        p = math.isqrt(rest)
        if p * p == rest:
            for s in {p, -p}:
                if (s - q) % 2 == 0:
                    out.append((s, q))
    return sorted(set(out))


# ---------------------------------------------------------------------------
# pullbacks, theta decomposition, invariants to series


def pullback_index(theta: JacobiQExp, M: Sequence[Sequence[int]]) -> JacobiQExp:
    """theta(tau, M w): zeta^r -> zeta'^(M^t r)."""
    n = theta.n_vars
    if len(M) != n:
        raise ValidationError("M must have one row per elliptic variable")
    k = len(M[0]) if n else 0
    out: dict = {}
    for (qn, r), c in theta.coeffs.items():
        key = (qn, tuple(sum(M[i][j] * r[i] for i in range(n)) for j in range(k)))
        out[key] = out[key] + c if key in out else c
    meta = dict(theta.meta)
    if "index" in meta:
        F = meta["index"]
        meta["index"] = [[sum(M[a][i] * F[a][b] * M[b][j] for a in range(n) for b in range(n)) for j in range(k)]
                         for i in range(k)]
    return JacobiQExp(k, theta.q_den, theta.zeta_den, out, theta.trunc, meta)


def theta_decompose(phi: JacobiQExp, twoF) -> dict:
    """{coset coordinates: h_x} with phi = sum_x h_x theta_{F,x}."""
    dg = fqm_from_matrix(twoF)
    n = len(twoF)
    if phi.n_vars != n or phi.zeta_den != 1:
        raise ValidationError("phi must have integral zeta-exponents in n variables")
    F = _fraction_matrix(twoF)
    Finv = intlin.inverse(F)
    mod = dg.module
    # minimal norm per coset fixes the truncation of h_x
    hs: dict = {}
    for (qn, r), c in phi.coeffs.items():
        l = Fraction(qn, phi.q_den)
        disc = 4 * l - quad_form(Finv, r)
        if disc < 0:
            raise ValidationError(f"coefficient at q^{l} zeta^{r} violates 4l - F^-1[r] >= 0")
        x = dg.quotient(r)
        e = disc / 4
        bucket = hs.setdefault(x, {})
        if e in bucket and bucket[e] != c:
            raise ValidationError(f"coefficients within the coset {x} disagree")
        bucket[e] = c
    out = {}
    for idx in range(mod.order):
        x = tuple(int(v) for v in mod.coords[idx])
        vmin = theta_lattice(twoF, dg.lift(x), phi.trunc + 1, at_z_zero=True).valuation()
        terms = {(e, ()): c for e, c in hs.get(x, {}).items()}
        out[x] = JacobiQExp.from_terms(0, terms, phi.trunc - vmin)
    return out


def reconstruct(hs: dict, twoF, trunc) -> JacobiQExp:
    dg = fqm_from_matrix(twoF)
    n = len(twoF)
    total = None
    for x, h in hs.items():
        th = theta_lattice(twoF, dg.lift(x), trunc)
        hx = JacobiQExp(n, h.q_den, 1, {(qn, (0,) * n): c for (qn, _), c in h.coeffs.items()}, h.trunc)
        term = hx * th
        total = term if total is None else total + term
    return total.truncate(trunc)


def unary_theta(l: int, x: int, trunc) -> JacobiQExp:
    """theta_{l,x}(tau, 0) = sum over r = x mod 2l of q^(r^2/4l)."""
    return theta_lattice([[2 * l]], [x], trunc, at_z_zero=True)


def phi_from_invariant(v: dict, l: int, twoF, trunc) -> JacobiQExp:
    """sum lambda(x, y) theta_{l,x}(tau, 0) theta_{F,y}(tau, z) for v on Z/2l x D_F."""
    dg = fqm_from_matrix(twoF)
    mod = dg.module
    n = len(twoF)
    size = 2 * l * mod.order
    total = JacobiQExp(n, 1, 1, {}, Fraction(trunc))
    th_l: dict = {}
    th_f: dict = {}
    for idx, c in sorted(v.items()):
        if not 0 <= idx < size:
            raise ValidationError("vector index outside Z/2l x D_F")
        if not c:
            continue
        x, y = divmod(idx, mod.order)
        if x not in th_l:
            th_l[x] = unary_theta(l, x, trunc)
        if y not in th_f:
            th_f[y] = theta_lattice(twoF, dg.lift([int(t) for t in mod.coords[y]]), trunc)
        hx = th_l[x]
        hx = JacobiQExp(n, hx.q_den, 1, {(qn, (0,) * n): cc for (qn, _), cc in hx.coeffs.items()}, hx.trunc)
        total = total + (hx * th_f[y]).scale(c)
    return total.with_meta(weight=Fraction(n + 1, 2), index=_fraction_matrix(twoF))


# ---------------------------------------------------------------------------
# linear algebra on coefficient tables


def _table(series: Sequence[JacobiQExp]):
    if not series:
        return [], []
    nv = {s.n_vars for s in series}
    if len(nv) != 1:
        raise ValidationError("series have different numbers of elliptic variables")
    trunc = min(s.trunc for s in series)
    qd = math.lcm(*[s.q_den for s in series])
    zd = max(s.zeta_den for s in series)
    scaled = [s._scaled(qd, zd) for s in series]
    keys = sorted({k for d in scaled for k in d if Fraction(k[0], qd) < trunc})
    rows = [[d.get(k, Fraction(0)) for k in keys] for d in scaled]
    return rows, keys


def series_linalg(series: Sequence[JacobiQExp], op: str):
    """rank, kernel (relations sum c_i s_i = 0) or equality up to the common truncation."""
    rows, keys = _table(series)
    if op == "equal":
        return all(r == rows[0] for r in rows[1:])
    exact = all(isinstance(c, Fraction) for r in rows for c in r)
    if op == "rank":
        if not keys:
            return 0
        if exact:
            return intlin.rank(rows)
        return len(intlin.rref_field(rows)[1])
    if op == "kernel":
        cols = intlin.transpose(rows) if keys else []
        if exact:
            return intlin.kernel(cols, len(series))
        return intlin.kernel_field(cols, len(series), Fraction(0), Fraction(1))
    raise ValidationError(f"unknown operation {op!r}")
