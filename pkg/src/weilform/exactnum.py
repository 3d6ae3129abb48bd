"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored as integer numerators over a common positive
denominator, in the power basis 1, z, ..., z^(phi(N)-1) modulo the N-th
cyclotomic polynomial.  Vectorised helpers at the bottom of the module work
on integer arrays in the group ring Z[x]/(x^N - 1) and are used by the
representation code for large exact checks.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import divisors, factorint

from .errors import ConsistencyError, ValidationError

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def frac_mod1(r) -> Fraction:
    r = as_fraction(r)
    return r - (r.numerator // r.denominator)


def fraction_to_str(r: Fraction) -> str:
    return str(as_fraction(r))


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


# ---------------------------------------------------------------------------
# cyclotomic polynomials and reduction tables


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divexact(a: Sequence[int], b: Sequence[int]) -> list[int]:
    # b monic (leading coefficient +-1)
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] // b[-1]
        q[k - db] = c
        if c:
            for j, y in enumerate(b):
                a[k - db + j] -= c * y
    if any(a[:db]):
        raise ConsistencyError("non-exact polynomial division")
    return q


def mobius(n: int) -> int:
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial.

    Computed from x^n - 1 = prod_{d|n} Phi_d via the Moebius product
    Phi_n = prod_{d|n} (x^d - 1)^{mu(n/d)}.
    """
    num = [1]
    den = [1]
    for d in divisors(n):
        mu = mobius(n // d)
        if mu == 0:
            continue
        f = [-1] + [0] * (d - 1) + [1]
        if mu == 1:
            num = _poly_mul(num, f)
        else:
            den = _poly_mul(den, f)
    return tuple(_poly_divexact(num, den))


@lru_cache(maxsize=None)
def phi(n: int) -> int:
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


@lru_cache(maxsize=None)
def _reduction_rows(n: int) -> tuple[tuple[int, ...], ...]:
    """Row e is the power-basis vector of x^e mod Phi_n, 0 <= e < n."""
    f = cyclotomic_poly(n)
    d = len(f) - 1
    rows = []
    cur = [0] * d
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        # multiply by x
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(d):
                cur[j] -= top * f[j]
    return tuple(rows)


@lru_cache(maxsize=None)
def reduction_matrix(n: int) -> np.ndarray:
    """Integer matrix (n x phi(n)) mapping group-ring coords to power basis."""
    return np.array(_reduction_rows(n), dtype=np.int64).reshape(n, phi(n))


# ---------------------------------------------------------------------------


class CyclotomicNumber:
    """An element of Q(zeta_N) in the power basis, with exact coefficients."""

    __slots__ = ("conductor", "num", "den")

    def __init__(self, conductor: int, num: Sequence[int], den: int = 1):
        if conductor < 1:
            raise ValidationError("conductor must be positive")
        if len(num) != phi(conductor):
            raise ValidationError("coefficient vector length must equal phi(conductor)")
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        num = [int(x) for x in num]
        den = int(den)
        if den < 0:
            num = [-x for x in num]
            den = -den
        g = den
        for x in num:
            g = math.gcd(g, x)
            if g == 1:
                break
        if g > 1:
            num = [x // g for x in num]
            den //= g
        self.conductor = conductor
        self.num = tuple(num)
        self.den = den

    # constructors -----------------------------------------------------
    @classmethod
    def from_rational(cls, r, conductor: int = 1) -> "CyclotomicNumber":
        r = as_fraction(r)
        num = [0] * phi(conductor)
        num[0] = r.numerator
        return cls(conductor, num, r.denominator)

    @classmethod
    def from_group_ring(cls, conductor: int, coeffs: Sequence[int], den: int = 1) -> "CyclotomicNumber":
        """Element sum_e coeffs[e] * zeta^e / den with e taken mod conductor."""
        rows = _reduction_rows(conductor)
        out = [0] * phi(conductor)
        for e, c in enumerate(coeffs):
            if c:
                row = rows[e % conductor]
                for j, y in enumerate(row):
                    if y:
                        out[j] += c * y
        return cls(conductor, out, den)

    @classmethod
    def root(cls, conductor: int, exponent: int) -> "CyclotomicNumber":
        return cls(conductor, _reduction_rows(conductor)[exponent % conductor])

    @classmethod
    def zero(cls, conductor: int = 1) -> "CyclotomicNumber":
        return cls(conductor, [0] * phi(conductor))

    @classmethod
    def one(cls, conductor: int = 1) -> "CyclotomicNumber":
        return cls.from_rational(1, conductor)

    # basic queries ----------------------------------------------------
    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.den) for x in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return Fraction(self.num[0], self.den)

    def __bool__(self):
        return not self.is_zero()

    # embeddings -------------------------------------------------------
    def embed(self, conductor: int) -> "CyclotomicNumber":
        if conductor == self.conductor:
            return self
        if conductor % self.conductor:
            raise ValidationError(f"cannot embed Q(zeta_{self.conductor}) into Q(zeta_{conductor})")
        step = conductor // self.conductor
        g = [0] * conductor
        for j, c in enumerate(self.num):
            g[j * step] = c
        return CyclotomicNumber.from_group_ring(conductor, g, self.den)

    def minimal_conductor(self) -> "CyclotomicNumber":
        """The same number expressed in the smallest field Q(zeta_d), d | N."""
        n = self.conductor
        for d in divisors(n):
            if d == n:
                break
            if phi(d) > len(self.num):
                continue
            try:
                cand = self._descend(d)
            except ValueError:
                continue
            if cand is not None:
                return cand
        return self

    def _descend(self, d: int):
        # Solve for an element of Q(zeta_d) whose embedding equals self.
        step = self.conductor // d
        rows = _reduction_rows(self.conductor)
        basis = [rows[(j * step) % self.conductor] for j in range(phi(d))]
        sol = _solve_rational_columns(basis, [Fraction(x, self.den) for x in self.num])
        if sol is None:
            return None
        den = lcm(*[s.denominator for s in sol])
        return CyclotomicNumber(d, [int(s * den) for s in sol], den)

    @staticmethod
    def _common(a: "CyclotomicNumber", b: "CyclotomicNumber"):
        if a.conductor == b.conductor:
            return a, b
        n = lcm(a.conductor, b.conductor)
        return a.embed(n), b.embed(n)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.from_rational(other, self.conductor)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._common(self, other)
        den = a.den * b.den // math.gcd(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        return CyclotomicNumber(a.conductor, [x * fa + y * fb for x, y in zip(a.num, b.num)], den)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.conductor, [-x for x in self.num], self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_fraction(other)
            return CyclotomicNumber(self.conductor, [x * other.numerator for x in self.num],
                                    self.den * other.denominator)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        a, b = self._common(self, other)
        if b.is_rational():
            return a * Fraction(b.num[0], b.den)
        if a.is_rational():
            return b * Fraction(a.num[0], a.den)
        n = a.conductor
        acc = [0] * n
        for i, x in enumerate(a.num):
            if x:
                for j, y in enumerate(b.num):
                    if y:
                        acc[(i + j) % n] += x * y
        return CyclotomicNumber.from_group_ring(n, acc, a.den * b.den)

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(zeta_N) (degenerate pivot)")
        if self.is_rational():
            return CyclotomicNumber.from_rational(Fraction(self.den, self.num[0]), self.conductor)
        n = self.conductor
        f = [Fraction(c) for c in cyclotomic_poly(n)]
        a = [Fraction(x, self.den) for x in self.num]
        s = _poly_inverse_mod(a, f)
        den = lcm(*[c.denominator for c in s])
        return CyclotomicNumber(n, [int(c * den) for c in s], den)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = as_fraction(other)
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / other)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CyclotomicNumber.one(self.conductor)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "CyclotomicNumber":
        n = self.conductor
        g = [0] * n
        for j, c in enumerate(self.num):
            g[(-j) % n] += c
        return CyclotomicNumber.from_group_ring(n, g, self.den)

    def real_part(self) -> "CyclotomicNumber":
        return (self + self.conj()) * Fraction(1, 2)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        a, b = self._common(self, other)
        return a.den == b.den and a.num == b.num

    __hash__ = None

    # numerics / display -----------------------------------------------
    def to_complex(self) -> tuple[complex, float]:
        """Floating approximation and an upper bound on its error."""
        n = self.conductor
        if self.is_rational():
            val = Fraction(self.num[0], self.den)
            approx = float(val)
            err = 0.0 if Fraction(approx) == val else abs(approx) * 2.3e-16
            return complex(approx, 0.0), err
        z = 0j
        mag = 0.0
        for j, c in enumerate(self.num):
            if c:
                z += c * cmath.exp(2j * math.pi * j / n)
                mag += abs(c)
        z /= self.den
        bound = 4 * (len(self.num) + 1) * 2.3e-16 * max(1.0, mag / self.den)
        return z, bound

    def to_json(self) -> dict:
        return {"conductor": self.conductor, "coeffs": [fraction_to_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> "CyclotomicNumber":
        cs = [Fraction(c) for c in data["coeffs"]]
        den = lcm(*[c.denominator for c in cs]) if cs else 1
        return cls(int(data["conductor"]), [int(c * den) for c in cs], den)

    def __repr__(self):
        if self.is_rational():
            return f"Cyclo({Fraction(self.num[0], self.den)})"
        terms = []
        for j, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}*z{self.conductor}^{j}" if j else f"{c}")
        return "Cyclo(" + " + ".join(terms) + ")"


def _solve_rational_columns(columns: list[Sequence[int]], target: Sequence[Fraction]):
    """Solve sum_j x_j columns[j] = target over Q; None when inconsistent."""
    rows = len(target)
    k = len(columns)
    mat = [[Fraction(columns[j][i]) for j in range(k)] + [target[i]] for i in range(rows)]
    piv_cols = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, rows) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(rows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
    if any(mat[i][k] != 0 for i in range(r, rows)):
        return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = mat[i][k]
    return sol


def _poly_trim(a):
    while len(a) > 1 and a[-1] == 0:
        a = a[:-1]
    return a


def _poly_divmod(a, b):
    a = list(a)
    b = _poly_trim(list(b))
    if len(a) < len(b):
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1] / lead
        q[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] -= c * y
    return q, _poly_trim(a[: len(b) - 1] or [Fraction(0)])


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return _poly_trim([x - y for x, y in zip(a, b)])


def _poly_inverse_mod(a, f):
    """Inverse of a modulo the irreducible f over Q (extended Euclid)."""
    r0, r1 = _poly_trim(list(f)), _poly_trim(list(a))
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while not (len(r1) == 1 and r1[0] == 0):
        q, r = _poly_divmod(r0, r1)
        prod = [Fraction(0)] * (len(q) + len(s1) - 1)
        for i, x in enumerate(q):
            if x:
                for j, y in enumerate(s1):
                    prod[i + j] += x * y
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, prod)
    if len(r0) != 1:
        raise ConsistencyError("element not invertible modulo cyclotomic polynomial")
    c = r0[0]
    d = len(f) - 1
    _, s = _poly_divmod(s0, f)
    s = [x / c for x in s] + [Fraction(0)] * (d - len(s))
    return s[:d]


# ---------------------------------------------------------------------------
# public operations


def e_of(r) -> CyclotomicNumber:
    """e(r) = exp(2 pi i r) for rational r, as an element of Q(zeta_d)."""
    r = frac_mod1(r)
    d = r.denominator
    if d <= 2:
        return CyclotomicNumber.from_rational(1 if r == 0 else -1)
    return CyclotomicNumber.root(d, r.numerator)


def cyclo_arith(a: CyclotomicNumber, b: CyclotomicNumber | None, op: str):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "conj":
        return a.conj()
    if op == "eq":
        return a == b
    raise ValidationError(f"unknown operation {op!r}")


def snap_root_of_unity(x: CyclotomicNumber, max_order: int):
    """Return r in [0,1) with e(r) == x exactly, or None if there is none.

    Only exponents with denominator <= max_order are tried.
    """
    if x.is_zero():
        return None
    if not (x * x.conj()) == 1:
        return None
    z, _ = x.to_complex()
    guess = (cmath.phase(z) / (2 * math.pi)) % 1.0
    cands = []
    for d in range(1, max_order + 1):
        for a in range(d):
            if math.gcd(a, d) == 1:
                cands.append(Fraction(a, d))
    # the floating guess only orders candidates; acceptance is exact
    cands.sort(key=lambda r: min(abs(float(r) - guess), 1 - abs(float(r) - guess)))
    for r in cands:
        if e_of(r) == x:
            return r
    return None


def to_complex(x: CyclotomicNumber) -> tuple[complex, float]:
    return x.to_complex()


def sqrt_exact(n: int) -> CyclotomicNumber:
    """sqrt(n) for a positive integer n, as an element of a cyclotomic field.

    Odd primes are handled through quadratic Gauss sums, sqrt(2) through
    zeta_8 + zeta_8^-1.
    """
    if n <= 0:
        raise ValidationError("sqrt_exact needs a positive integer")
    out = CyclotomicNumber.one()
    for p, e in factorint(n).items():
        out = out * (p ** (e // 2))
        if e % 2:
            out = out * _sqrt_prime(p)
    return out


@lru_cache(maxsize=None)
def _sqrt_prime(p: int) -> CyclotomicNumber:
    if p == 2:
        return e_of(Fraction(1, 8)) + e_of(Fraction(-1, 8))
    g = [0] * p
    for x in range(p):
        g[(x * x) % p] += 1
    gauss = CyclotomicNumber.from_group_ring(p, g)
    if p % 4 == 1:
        return gauss
    return gauss * e_of(Fraction(-1, 4))


# ---------------------------------------------------------------------------
# vectorised group-ring helpers (integer numpy arrays, exact)


def group_ring_reduce(arr: np.ndarray, conductor: int) -> np.ndarray:
    """Map group-ring coordinates (last axis length N) to power-basis coords."""
    red = reduction_matrix(conductor)
    if arr.dtype == object:
        return arr.dot(red.astype(object))
    _guard(arr, red)
    return arr @ red


def _guard(arr: np.ndarray, red: np.ndarray):
    if arr.size == 0:
        return
    bound = float(np.abs(arr).max()) * float(np.abs(red).sum(axis=0).max())
    if bound >= 2.0 ** 62:
        raise ConsistencyError("integer overflow risk in group-ring reduction")


def cyclo_to_group_ring(x: CyclotomicNumber, conductor: int) -> tuple[np.ndarray, int]:
    """Integer group-ring vector g (length conductor) and den with x = g/den."""
    x = x.embed(conductor)
    g = np.zeros(conductor, dtype=np.int64)
    g[: len(x.num)] = x.num
    return g, x.den


def cyclo_from_power_basis(conductor: int, num: Iterable[int], den: int = 1) -> CyclotomicNumber:
    return CyclotomicNumber(conductor, [int(v) for v in num], den)


def gr_scale(g: np.ndarray, x: CyclotomicNumber, conductor: int) -> tuple[np.ndarray, int]:
    """Multiply group-ring arrays (last axis length N) by x; returns (array, den)."""
    x = x.embed(conductor)
    out = np.zeros_like(g)
    for j, c in enumerate(x.num):
        if c:
            out = out + c * np.roll(g, j, axis=-1)
    return out, x.den


def gr_equal(a: np.ndarray, da: int, b: np.ndarray, db: int, conductor: int) -> bool:
    """Exact test a/da == b/db entrywise in Q(zeta_N) for group-ring arrays."""
    ra = group_ring_reduce(a, conductor)
    rb = group_ring_reduce(b, conductor)
    if max(abs(da), abs(db)) > 2 ** 20 or (ra.size and max(np.abs(ra).max(), np.abs(rb).max()) > 2 ** 40):
        ra = ra.astype(object)
        rb = rb.astype(object)
    return bool(np.array_equal(ra * db, rb * da))


def gr_to_cyclo(g: Sequence[int], conductor: int, den: int = 1) -> CyclotomicNumber:
    return CyclotomicNumber.from_group_ring(conductor, [int(v) for v in g], den)
