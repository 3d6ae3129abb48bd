"""Finite quadratic modules (M, Q): construction, invariants, subgroups, Witt theory.

A module is given by generators g_i of orders u_i together with the values
Q(g_i) and B(g_i, g_j) in Q/Z.  Elements are integer coordinate vectors and
are indexed in mixed radix with the first coordinate most significant, so the
element order of an orthogonal sum is the Kronecker order of the summands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint, isprime

from . import intlin
from .config import get_config
from .errors import BudgetExceeded, ValidationError
from .exactnum import CyclotomicNumber, e_of, frac_mod1, lcm, snap_root_of_unity, sqrt_exact


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    a %= n
    out = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                out = -out
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            out = -out
        a %= n
    return out if n == 1 else 0


def kronecker(a: int, b: int) -> int:
    """Jacobi symbol (a/b) for b > 0, extended to even b by (a/2) = (2/a).

    For odd a, (a/2^beta) = -1 exactly when a = +-3 mod 8 and beta is odd.
    """
    if b <= 0:
        raise ValidationError("kronecker symbol needs a positive lower argument")
    beta = 0
    while b % 2 == 0:
        b //= 2
        beta += 1
    out = 1
    if beta:
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5) and beta % 2 == 1:
            out = -1
    if b > 1:
        out *= jacobi_symbol(a % b, b)
    return out


@dataclass(frozen=True)
class FqmElement:
    coords: tuple[int, ...]

    def __iter__(self):
        return iter(self.coords)


class Fqm:
    """A finite quadratic module with distinguished generators."""

    def __init__(self, orders: Sequence[int], q_diag: Sequence, b_gram: Sequence[Sequence], name: str = ""):
        orders = tuple(int(u) for u in orders)
        r = len(orders)
        if len(q_diag) != r or len(b_gram) != r or any(len(row) != r for row in b_gram):
            raise ValidationError("inconsistent shapes in quadratic module data")
        if any(u < 1 for u in orders):
            raise ValidationError("generator orders must be positive")
        q = tuple(frac_mod1(Fraction(x)) for x in q_diag)
        b = tuple(tuple(frac_mod1(Fraction(x)) for x in row) for row in b_gram)
        for i in range(r):
            u = orders[i]
            if b[i][i] != frac_mod1(2 * q[i]):
                raise ValidationError(f"B(g{i},g{i}) must equal 2Q(g{i}) mod 1")
            if frac_mod1(u * u * q[i]) != 0:
                raise ValidationError(f"Q is not well defined on Z/{u} (u^2 Q(g{i}) != 0)")
            for j in range(r):
                if b[i][j] != b[j][i]:
                    raise ValidationError("B must be symmetric")
                if frac_mod1(u * b[i][j]) != 0:
                    raise ValidationError(f"B is not well defined (u_{i} B(g{i},g{j}) != 0)")
        self.orders = orders
        self.q_diag = q
        self.b_gram = b
        self.name = name
        dens = [x.denominator for x in q] + [x.denominator for row in b for x in row]
        self.level = lcm(*orders, *dens) if r else 1
        self.order = math.prod(orders)

    # ------------------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.orders)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"Fqm({self.name or self.orders}, |M|={self.order}, level={self.level})"

    def __eq__(self, other):
        if not isinstance(other, Fqm):
            return NotImplemented
        return (self.orders, self.q_diag, self.b_gram) == (other.orders, other.q_diag, other.b_gram)

    def __hash__(self):
        return hash((self.orders, self.q_diag, self.b_gram))

    @cached_property
    def qn(self) -> np.ndarray:
        return np.array([int(x * self.level) for x in self.q_diag], dtype=np.int64)

    @cached_property
    def bn(self) -> np.ndarray:
        n = self.level
        return np.array([[int(x * n) for x in row] for row in self.b_gram], dtype=np.int64).reshape(self.rank, self.rank)

    @cached_property
    def radix(self) -> np.ndarray:
        w = [1] * self.rank
        for i in range(self.rank - 2, -1, -1):
            w[i] = w[i + 1] * self.orders[i + 1]
        return np.array(w, dtype=np.int64)

    def _check_budget(self):
        if self.order > get_config().max_rep_dim:
            raise BudgetExceeded(f"module of order {self.order} exceeds the element budget")

    @cached_property
    def coords(self) -> np.ndarray:
        """All elements as an (|M|, rank) integer array, in index order."""
        self._check_budget()
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.orders, dtype=np.int64).reshape(self.rank, -1)
        return grids.T.copy()

    def index(self, x) -> int:
        c = self.reduce(x)
        return int(sum(ci * wi for ci, wi in zip(c, self.radix.tolist())))

    def indices(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64) % np.array(self.orders, dtype=np.int64)
        return coords @ self.radix if self.rank else np.zeros(len(coords), dtype=np.int64)

    def reduce(self, x) -> tuple[int, ...]:
        if isinstance(x, FqmElement):
            x = x.coords
        if len(x) != self.rank:
            raise ValidationError("element has wrong number of coordinates")
        return tuple(int(c) % u for c, u in zip(x, self.orders))

    def element(self, i: int) -> FqmElement:
        return FqmElement(tuple(int(c) for c in self.coords[i]))

    def elements(self) -> list[FqmElement]:
        return [FqmElement(tuple(int(c) for c in row)) for row in self.coords]

    # forms -------------------------------------------------------------
    def q_int(self, coords: np.ndarray) -> np.ndarray:
        """level * Q(x) mod level, for rows x of an integer array."""
        c = np.asarray(coords, dtype=np.int64)
        n = self.level
        out = (c * c % n) @ self.qn % n if self.rank else np.zeros(len(c), dtype=np.int64)
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                if self.bn[i, j]:
                    out = (out + (c[:, i] * c[:, j] % n) * self.bn[i, j]) % n
        return out % n

    @cached_property
    def qnum(self) -> np.ndarray:
        """level * Q(x) mod level for all elements."""
        return self.q_int(self.coords)

    def b_int(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """level * B(x, y) mod level for x in rows, y in cols (coordinate arrays)."""
        n = self.level
        a = (np.asarray(rows, dtype=np.int64) @ self.bn) % n
        return (a @ np.asarray(cols, dtype=np.int64).T) % n

    def b_block(self, ri: np.ndarray, ci: np.ndarray) -> np.ndarray:
        return self.b_int(self.coords[ri], self.coords[ci])

    def Q(self, x) -> Fraction:
        c = np.array([self.reduce(x)], dtype=np.int64).reshape(1, self.rank)
        return Fraction(int(self.q_int(c)[0]), self.level)

    def B(self, x, y) -> Fraction:
        cx = np.array([self.reduce(x)], dtype=np.int64).reshape(1, self.rank)
        cy = np.array([self.reduce(y)], dtype=np.int64).reshape(1, self.rank)
        return Fraction(int(self.b_int(cx, cy)[0, 0]), self.level)

    def neg_index(self) -> np.ndarray:
        """Index permutation x -> -x."""
        return self.indices(-self.coords)

    def add_index(self, i: int) -> np.ndarray:
        """Index permutation y -> y + x_i."""
        return self.indices(self.coords + self.coords[i])

    def element_order(self, x) -> int:
        c = self.reduce(x)
        return lcm(*[u // math.gcd(u, ci) for ci, u in zip(c, self.orders)]) if c else 1

    # invariants ---------------------------------------------------------
    def radical(self) -> np.ndarray:
        """Indices of the radical {x : B(x, y) = 0 for all y}."""
        gens = np.eye(self.rank, dtype=np.int64)
        vals = self.b_int(self.coords, gens) if self.rank else np.zeros((1, 0), dtype=np.int64)
        return np.nonzero(~vals.any(axis=1))[0]

    def is_nondegenerate(self) -> bool:
        return len(self.radical()) == 1

    def gauss_sum(self) -> CyclotomicNumber:
        """g = sum_x e(-Q(x)) in Q(zeta_level)."""
        n = self.level
        hist = np.bincount((-self.qnum) % n, minlength=n)
        return CyclotomicNumber.from_group_ring(n, hist.tolist())

    @cached_property
    def _sigma(self) -> Fraction:
        if self.order == 1:
            return Fraction(0)
        g = self.gauss_sum()
        if not (g * g.conj()) == self.order:
            raise ValidationError("|sum e(-Q)|^2 != |M|: the module is degenerate")
        s2 = snap_root_of_unity(g * g / self.order, 8)
        if s2 is None:
            raise ValidationError("sigma^2 is not an eighth root of unity")
        root = sqrt_exact(self.order)
        for r in (s2 / 2, s2 / 2 + Fraction(1, 2)):
            if e_of(r) * root == g:
                return frac_mod1(r)
        raise ValidationError("neither sign of sigma matches the Gauss sum")

    def sigma(self, p: int | None = None) -> Fraction:
        """Exponent r in [0,1) with sigma(M) = e(r); sigma_p(M) when p is given."""
        if p is not None:
            return p_part(self, p).sigma()
        return self._sigma

    def sigma_scalar(self) -> CyclotomicNumber:
        """sigma |M|^(-1/2) = |M|^(-1) sum_x e(-Q(x)), an element of Q(zeta_level)."""
        return self.gauss_sum() / self.order

    def primes(self) -> list[int]:
        return sorted(factorint(self.order)) if self.order > 1 else []

    def sigma_table(self) -> dict[int, Fraction]:
        return {p: self.sigma(p) for p in self.primes()}

    def group_invariants(self) -> list[int]:
        """Elementary divisors of the underlying abelian group (divisor chain)."""
        ds = intlin.elementary_divisors([[u if i == j else 0 for j in range(self.rank)] for i, u in enumerate(self.orders)]) if self.rank else []
        return [d for d in ds if d != 1]

    def info(self) -> dict:
        return {
            "order": self.order,
            "level": self.level,
            "nondegenerate": self.is_nondegenerate(),
            "sigma": {str(p): _exp_str(r) for p, r in self.sigma_table().items()} if self.is_nondegenerate() else {},
            "elementary_divisors": self.group_invariants(),
        }


def _exp_str(r: Fraction) -> str:
    r = frac_mod1(r) * 8
    return f"{r.numerator}/{8 * r.denominator}" if r.denominator != 1 else f"{r.numerator}/8"


# ---------------------------------------------------------------------------
# constructors


def fqm_from_gram(orders, q_diag, b_gram, name: str = "") -> Fqm:
    return Fqm(orders, q_diag, b_gram, name=name)


def trivial() -> Fqm:
    return Fqm((), (), (), name="trivial")


def D(m: int, a: int = 1) -> Fqm:
    """D_m(a) = (Z/2m, a x^2 / 4m)."""
    if m < 1:
        raise ValidationError("D(m, a) needs m >= 1")
    if math.gcd(a, 2 * m) != 1:
        raise ValidationError("D(m, a) needs gcd(a, 2m) = 1")
    return Fqm((2 * m,), (Fraction(a, 4 * m),), ((Fraction(a, 2 * m),),), name=f"D({m},{a})")


def _is_odd_prime_power(q: int) -> bool:
    f = factorint(q)
    return len(f) == 1 and 2 not in f


def L(q: int, a: int = 1) -> Fqm:
    """L_q(a) = (Z/q, a x^2 / q) for an odd prime power q."""
    if q == 1:
        return trivial()
    if not _is_odd_prime_power(q):
        raise ValidationError("L(q, a) needs q an odd prime power")
    if math.gcd(a, q) != 1:
        raise ValidationError("L(q, a) needs gcd(a, q) = 1")
    return Fqm((q,), (Fraction(a, q),), ((Fraction(2 * a, q),),), name=f"L({q},{a})")


def Hyp(n: int) -> Fqm:
    """((Z/n)^2, xy/n)."""
    if n < 1:
        raise ValidationError("Hyp(n) needs n >= 1")
    return Fqm((n, n), (0, 0), ((0, Fraction(1, n)), (Fraction(1, n), 0)), name=f"Hyp({n})")


def XY3(alpha: int) -> Fqm:
    """((Z/2^alpha)^2, (x^2 + xy + y^2) / 2^alpha)."""
    if alpha < 1:
        raise ValidationError("XY3(alpha) needs alpha >= 1")
    n = 2 ** alpha
    return Fqm((n, n), (Fraction(1, n), Fraction(1, n)),
               ((Fraction(2, n), Fraction(1, n)), (Fraction(1, n), Fraction(2, n))), name=f"XY3({alpha})")


def fqm_standard(kind: str, *params: int) -> Fqm:
    table = {"D": D, "L": L, "Hyp": Hyp, "H": Hyp, "XY3": XY3}
    if kind not in table:
        raise ValidationError(f"unknown standard module {kind!r}")
    return table[kind](*params)


@dataclass
class DeterminantGroup:
    """D_F = Z^n / 2F Z^n with the quotient map x -> (P x mod d_i)."""

    module: Fqm
    twoF: list[list[int]]
    proj: list[list[int]]  # rows of P for the kept (nontrivial) invariant factors
    divisors: list[int]
    gens: list[list[int]] = field(default_factory=list)  # lifts in Z^n of the module generators

    def quotient(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, x)) % d for row, d in zip(self.proj, self.divisors))

    def lift(self, coords: Sequence[int]) -> list[int]:
        n = len(self.twoF)
        return [sum(c * g[r] for c, g in zip(coords, self.gens)) for r in range(n)]


def check_half_integral(twoF) -> list[list[int]]:
    a = [[int(x) for x in row] for row in twoF]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValidationError("twoF must be square")
    for i in range(n):
        if a[i][i] % 2:
            raise ValidationError("twoF must have even diagonal")
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise ValidationError("twoF must be symmetric")
    if intlin.det(a) == 0:
        raise ValidationError("twoF is singular")
    return a


def is_positive_definite(twoF) -> bool:
    a = [[Fraction(x) for x in row] for row in twoF]
    return all(intlin.det([row[:k] for row in a[:k]]) > 0 for k in range(1, len(a) + 1))


def fqm_from_matrix(twoF) -> DeterminantGroup:
    """Determinant group of F with Q(x) = x^T (2F)^{-1} x / 2 (= F^{-1}[x] / 4)."""
    a = check_half_integral(twoF)
    n = len(a)
    d, p, _ = intlin.smith_normal_form(a)
    pinv = intlin.inverse(p)
    ainv = intlin.inverse(a)
    keep = [i for i in range(n) if d[i][i] != 1]
    divs = [d[i][i] for i in keep]
    gens = [[int(pinv[r][i]) for r in range(n)] for i in keep]

    def qf(x, y):
        return sum(x[i] * ainv[i][j] * y[j] for i in range(n) for j in range(n))

    qd = [qf(g, g) / 2 for g in gens]
    bg = [[qf(g, h) for h in gens] for g in gens]
    mod = Fqm(divs, qd, bg, name="D_F")
    return DeterminantGroup(mod, a, [p[i] for i in keep], divs, gens)


# ---------------------------------------------------------------------------
# combinations


def orth_sum(*mods: Fqm) -> Fqm:
    orders, q, names = [], [], []
    for m in mods:
        orders += m.orders
        q += m.q_diag
        names.append(m.name or "?")
    r = len(orders)
    b = [[Fraction(0)] * r for _ in range(r)]
    off = 0
    for m in mods:
        for i in range(m.rank):
            for j in range(m.rank):
                b[off + i][off + j] = m.b_gram[i][j]
        off += m.rank
    return Fqm(orders, q, b, name="+".join(names))


def neg(m: Fqm) -> Fqm:
    return Fqm(m.orders, [-x for x in m.q_diag], [[-x for x in row] for row in m.b_gram], name=f"-{m.name}")


def scale(m: Fqm, c: int) -> Fqm:
    """Same group with the form multiplied by c."""
    return Fqm(m.orders, [c * x for x in m.q_diag], [[c * x for x in row] for row in m.b_gram], name=f"{c}*{m.name}")


def p_part(m: Fqm, p: int) -> Fqm:
    """The p-primary component M(p) with the inherited form."""
    if not isprime(p):
        raise ValidationError("p_part needs a prime")
    orders, cs = [], []
    for u in m.orders:
        pk = 1
        while u % (pk * p) == 0:
            pk *= p
        orders.append(pk)
        cs.append(u // pk)
    keep = [i for i, o in enumerate(orders) if o > 1]
    q = [cs[i] ** 2 * m.q_diag[i] for i in keep]
    b = [[cs[i] * cs[j] * m.b_gram[i][j] for j in keep] for i in keep]
    return Fqm([orders[i] for i in keep], q, b, name=f"{m.name}({p})")


def combine(m: Fqm, n: Fqm | None, op: str, p: int | None = None) -> Fqm:
    if op == "orth_sum":
        return orth_sum(m, n)
    if op == "neg":
        return neg(m)
    if op == "p_part":
        return p_part(m, p)
    raise ValidationError(f"unknown combine operation {op!r}")


def level_and_nondegeneracy(m: Fqm) -> tuple[int, bool]:
    return m.level, m.is_nondegenerate()


def eval_form(m: Fqm, x, y=None) -> Fraction:
    return m.Q(x) if y is None else m.B(x, y)


def sigma(m: Fqm, p: int | None = None) -> Fraction:
    return m.sigma(p)


def sigma_p_scalar_formula(n: int, p: int) -> Fraction:
    """sigma_p(D_n) from the closed formulas, as an exponent in [0, 1).

    With q the exact power of p dividing n and a = n/q:
    odd p:  sqrt((-4/q)) * (-a/q), taking sqrt(-1) = i;
    p = 2:  e_8(-a) * (-a/2q).
    """
    if not isprime(p):
        raise ValidationError("p must be prime")
    q = 1
    while n % (q * p) == 0:
        q *= p
    a = n // q
    if p == 2:
        r = Fraction(-a, 8)
        if kronecker(-a, 2 * q) == -1:
            r += Fraction(1, 2)
        return frac_mod1(r)
    r = Fraction(0)
    if kronecker(-4, q) == -1:
        r += Fraction(1, 4)
    if kronecker(-a, q) == -1:
        r += Fraction(1, 2)
    return frac_mod1(r)


# ---------------------------------------------------------------------------
# subgroups


class FqmSubgroup:
    """A subgroup given by generators; the element index set is cached."""

    def __init__(self, module: Fqm, generators: Iterable, members: np.ndarray | None = None):
        self.module = module
        self.generators = [FqmElement(module.reduce(g)) for g in generators]
        if members is None:
            members = span_indices(module, [g.coords for g in self.generators])
        self.members = np.sort(np.asarray(members, dtype=np.int64))

    @property
    def order(self) -> int:
        return len(self.members)

    def key(self) -> bytes:
        return self.members.tobytes()

    def __contains__(self, x) -> bool:
        i = self.module.index(x)
        k = np.searchsorted(self.members, i)
        return bool(k < len(self.members) and self.members[k] == i)

    def elements(self) -> list[FqmElement]:
        return [self.module.element(int(i)) for i in self.members]

    def is_isotropic(self) -> bool:
        return not self.module.qnum[self.members].any()

    def dual(self) -> "FqmSubgroup":
        m = self.module
        if not self.generators:
            return FqmSubgroup(m, [], np.arange(m.order))
        gens = np.array([g.coords for g in self.generators], dtype=np.int64)
        vals = m.b_int(m.coords, gens)
        members = np.nonzero(~vals.any(axis=1))[0]
        return FqmSubgroup(m, generating_set(m, members), members)

    def is_self_dual(self) -> bool:
        return self.order ** 2 == self.module.order and self.is_isotropic()

    def __repr__(self):
        return f"FqmSubgroup(order={self.order}, gens={[g.coords for g in self.generators]})"


def span_indices(m: Fqm, gens: Sequence[Sequence[int]]) -> np.ndarray:
    cur = np.zeros((1, m.rank), dtype=np.int64)
    orders = np.array(m.orders, dtype=np.int64)
    for g in gens:
        g = np.asarray(g, dtype=np.int64)
        k = m.element_order(tuple(int(x) for x in g))
        layers = [(cur + j * g) % orders for j in range(k)]
        cur = np.unique(np.concatenate(layers), axis=0)
    return np.unique(m.indices(cur))


def generating_set(m: Fqm, members: np.ndarray) -> list[tuple[int, ...]]:
    """A small generating set of the subgroup with the given element indices."""
    inside = np.zeros(m.order, dtype=bool)
    inside[0] = True
    gens = []
    members = np.asarray(members)
    # prefer elements of large order so few generators are needed
    ords = np.array([m.element_order(tuple(int(c) for c in m.coords[i])) for i in members])
    for i in members[np.argsort(-ords, kind="stable")]:
        if inside[i]:
            continue
        g = tuple(int(c) for c in m.coords[i])
        gens.append(g)
        inside[span_indices(m, gens)] = True
    return gens


def _same_extension(m: Fqm, u: FqmSubgroup, g, members: np.ndarray) -> np.ndarray:
    """Elements j of <u, g> with <u, j> = <u, g>: those of the form k g + u with gcd(k, ord g mod u) = 1."""
    o = 1
    ui = set(u.members.tolist())
    while m.index(tuple(c * o for c in g)) not in ui:
        o += 1
    out = []
    for k in range(1, o + 1):
        if math.gcd(k, o) == 1:
            base = np.array([c * k for c in g], dtype=np.int64)
            out.append(m.indices(m.coords[u.members] + base))
    return np.concatenate(out) if out else np.array([], dtype=np.int64)


def isotropic_subgroups(m: Fqm, mode: str = "all") -> list[FqmSubgroup]:
    """All isotropic subgroups (mode 'all') or the self-dual ones ('self_dual')."""
    if mode not in ("all", "self_dual"):
        raise ValidationError("mode must be 'all' or 'self_dual'")
    if m.order > get_config().max_module_order:
        raise BudgetExceeded(f"|M| = {m.order} exceeds the subgroup enumeration budget")
    iso = np.nonzero(m.qnum == 0)[0]
    start = FqmSubgroup(m, [], np.array([0]))
    seen = {start.key(): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            if u.generators:
                gens = np.array([g.coords for g in u.generators], dtype=np.int64)
                ok = ~m.b_int(m.coords[iso], gens).any(axis=1)
                cand = iso[ok]
            else:
                cand = iso
            mask = np.ones(len(cand), dtype=bool)
            mask[np.isin(cand, u.members)] = False
            # i and j give the same extension of u when <u, i> = <u, j>
            done = np.zeros(m.order, dtype=bool)
            for i in cand[mask]:
                if done[i]:
                    continue
                g = tuple(int(c) for c in m.coords[i])
                members = span_indices(m, [x.coords for x in u.generators] + [g])
                done[_same_extension(m, u, g, members)] = True
                key = np.sort(members).tobytes()
                if key not in seen:
                    w = FqmSubgroup(m, [x.coords for x in u.generators] + [g], members)
                    seen[key] = w
                    nxt.append(w)
        frontier = nxt
    out = sorted(seen.values(), key=lambda s: (s.order, s.members.tolist()))
    if mode == "self_dual":
        out = [s for s in out if s.order ** 2 == m.order]
    return out


def _lattice_basis(cols: list[list[int]], r: int) -> list[list[int]]:
    """A basis (as columns of an r x r matrix) of the full-rank lattice spanned by cols."""
    g = [[c[i] for c in cols] for i in range(r)]
    d, p, _ = intlin.smith_normal_form(g)
    pinv = intlin.inverse(p)
    return [[int(pinv[i][j]) * d[j][j] for j in range(r)] for i in range(r)]


def subquotient(m: Fqm, u: FqmSubgroup) -> tuple[Fqm, list[tuple[int, ...]]]:
    """U*/U with its generators, given as elements of M (lifts of the new generators)."""
    if not u.is_isotropic():
        raise ValidationError("subquotient needs an isotropic subgroup")
    r = m.rank
    if r == 0:
        return m, []
    ud = u.dual()
    rel = [[m.orders[i] if k == i else 0 for k in range(r)] for i in range(r)]
    lstar = _lattice_basis([list(g.coords) for g in ud.generators] + rel, r)
    lsub = _lattice_basis([list(g.coords) for g in u.generators] + rel, r)
    # express the sublattice in the basis of the big one
    binv = intlin.inverse(lstar)
    a = [[int(x) for x in row] for row in intlin.mat_mul(binv, lsub)]
    d, p, _ = intlin.smith_normal_form(a)
    pinv = intlin.inverse(p)
    newgens = intlin.mat_mul(lstar, [[int(x) for x in row] for row in pinv])
    keep = [j for j in range(r) if d[j][j] != 1]
    gens = [tuple(int(newgens[i][j]) % m.orders[i] for i in range(r)) for j in keep]
    orders = [d[j][j] for j in keep]
    q = [m.Q(g) for g in gens]
    b = [[m.B(g, h) for h in gens] for g in gens]
    return Fqm(orders, q, b, name=f"{m.name}/U"), gens


# ---------------------------------------------------------------------------
# automorphisms and isomorphism


def _images_with_profile(n: Fqm, order: int, qv: Fraction):
    out = []
    for x in n.elements():
        if order % n.element_order(x) == 0 and n.Q(x) == qv:
            out.append(x.coords)
    return out


def isometries(m: Fqm, n: Fqm, limit: int | None = None) -> list[list[tuple[int, ...]]]:
    """Isometries M -> N, each given by the images of the generators of M."""
    if m.order != n.order:
        return []
    cands = [_images_with_profile(n, u, qv) for u, qv in zip(m.orders, m.q_diag)]
    found = []

    def rec(i, chosen):
        if limit is not None and len(found) >= limit:
            return
        if i == m.rank:
            if len(span_indices(n, chosen)) == n.order:
                found.append(list(chosen))
            return
        for c in cands[i]:
            if all(n.B(c, chosen[j]) == m.b_gram[i][j] for j in range(i)):
                rec(i + 1, chosen + [c])

    rec(0, [])
    return found


def is_isomorphic(m: Fqm, n: Fqm) -> bool:
    cap = get_config().iso_search_max
    if m.order > cap:
        raise BudgetExceeded(f"isomorphism search is capped at |M| <= {cap}")
    return bool(isometries(m, n, limit=1))


def dm_units(m: int) -> list[int]:
    """O(D_m) as multiplications: a mod 2m with a^2 = 1 mod 4m."""
    return [a for a in range(2 * m) if math.gcd(a, 2 * m) == 1 and (a * a) % (4 * m) == 1]


def orthogonal_group(m: Fqm, strategy: str = "brute_force", dm: int | None = None) -> list[list[tuple[int, ...]]]:
    """O(M): each automorphism given by the images of the generators."""
    if strategy == "dm_units":
        if dm is None:
            if m.rank != 1 or m.orders[0] % 2:
                raise ValidationError("dm_units needs a module D_m")
            dm = m.orders[0] // 2
        return [[(a,)] for a in dm_units(dm)]
    if strategy != "brute_force":
        raise ValidationError("strategy must be 'dm_units' or 'brute_force'")
    if m.order > get_config().max_module_order:
        raise BudgetExceeded("orthogonal group search budget exceeded")
    return isometries(m, m)


def apply_map(m: Fqm, images: Sequence[Sequence[int]]) -> np.ndarray:
    """Index permutation x -> alpha(x) for the homomorphism with given generator images."""
    img = np.array(images, dtype=np.int64).reshape(m.rank, m.rank)
    return m.indices(m.coords @ img)


def is_isometry(m: Fqm, images) -> bool:
    perm = apply_map(m, images)
    return len(np.unique(perm)) == m.order and bool((m.qnum[perm] == m.qnum).all())


# ---------------------------------------------------------------------------
# Witt equivalence


def _is_rational_square(r: Fraction) -> bool:
    return r > 0 and math.isqrt(r.numerator) ** 2 == r.numerator and math.isqrt(r.denominator) ** 2 == r.denominator


def anisotropic_kernel(m: Fqm) -> Fqm:
    """Quotient repeatedly by cyclic isotropic subgroups until none is left."""
    cur = m
    while True:
        iso = np.nonzero(cur.qnum == 0)[0]
        if len(iso) <= 1:
            return cur
        # a nonzero isotropic element of prime order keeps steps small
        pick = None
        for i in iso[1:]:
            x = cur.element(int(i))
            o = cur.element_order(x)
            if isprime(o):
                pick = x
                break
        if pick is None:
            x = cur.element(int(iso[1]))
            o = cur.element_order(x)
            p = min(factorint(o))
            pick = FqmElement(tuple(c * (o // p) for c in x.coords))
        u = FqmSubgroup(cur, [pick.coords])
        cur, _ = subquotient(cur, u)


def witt_equivalent(m: Fqm, n: Fqm, method: str = "invariants") -> bool:
    if method == "invariants":
        if not _is_rational_square(Fraction(m.order, n.order)):
            return False
        ps = set(m.primes()) | set(n.primes())
        return all(m.sigma(p) == n.sigma(p) for p in ps)
    if method == "reduction":
        if max(m.order, n.order) > get_config().max_module_order:
            raise BudgetExceeded("Witt reduction budget exceeded")
        return witt_kernels_isomorphic(m, n)
    raise ValidationError("method must be 'invariants' or 'reduction'")


def witt_kernels_isomorphic(m: Fqm, n: Fqm) -> bool:
    """Compare anisotropic kernels of M and N by brute-force isomorphism search."""
    a, b = anisotropic_kernel(m), anisotropic_kernel(n)
    if a.order != b.order:
        return False
    if a.order == 1:
        return True
    return is_isomorphic(a, b)
