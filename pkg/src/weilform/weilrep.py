"""Weil representations and their tensor / twist / induction calculus.

A representation is stored through its generators: T = (T, 1) is monomial,
T e_j = zeta^t_j e_{perm(j)}, and S = (S, w_S) is a scalar times a matrix whose
entries are integer multiples of roots of unity, produced lazily in blocks.
S^2 is monomial as well and is stored explicitly.  All exponents are integers
modulo the conductor N of the representation.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from sympy import factorint

from . import intlin
from ._modular import InvariantBasis, monomial_orbits, solve_invariants
from .config import get_config
from .errors import BudgetExceeded, ConsistencyError, ValidationError
from .exactnum import CyclotomicNumber, e_of, frac_mod1, gr_equal, gr_scale, lcm
from .fqm import Fqm, FqmSubgroup, apply_map, is_isometry, subquotient

Block = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _even(n: int) -> int:
    return n if n % 2 == 0 else 2 * n


class GenRep:
    """A finite-dimensional representation of Mp2(Z) given by (T, 1) and (S, w_S)."""

    def __init__(self, dim: int, conductor: int, t_perm, t_expo, s_scalar: CyclotomicNumber,
                 s2_perm, s2_expo, block: Block, labels=None, meta: dict | None = None, check: bool = True):
        self.dim = int(dim)
        self.conductor = int(conductor)
        self.t_perm = np.asarray(t_perm, dtype=np.int64)
        self.t_expo = np.asarray(t_expo, dtype=np.int64) % self.conductor
        self.s_scalar = s_scalar.embed(self.conductor)
        self.s2_perm = np.asarray(s2_perm, dtype=np.int64)
        self.s2_expo = np.asarray(s2_expo, dtype=np.int64) % self.conductor
        self._block = block
        self.labels = labels
        self.meta = dict(meta or {})
        if len(self.t_perm) != self.dim or len(self.s2_perm) != self.dim:
            raise ValidationError("generator data does not match the dimension")
        if check:
            self.verified = self._auto_check()

    # ------------------------------------------------------------------
    def s_block(self, rows, cols):
        """(mult, expo): S[rows, cols] = s_scalar * mult * zeta^expo."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        mult, expo = self._block(rows, cols)
        return mult, np.asarray(expo, dtype=np.int64) % self.conductor

    def __repr__(self):
        return f"GenRep(dim={self.dim}, conductor={self.conductor}, {self.meta.get('source', '')})"

    def _auto_check(self) -> str:
        if len(np.unique(self.t_perm)) != self.dim:
            raise ConsistencyError("T is not a monomial matrix")
        if self.dim <= get_config().verify_dim:
            rel = self.check_relations()
            bad = [k for k, v in rel.items() if v is False]
            if bad:
                raise ConsistencyError(f"relations failed: {bad}")
            return "exact"
        return "structural"

    # group-ring application -------------------------------------------------
    def s_apply_gr(self, x: np.ndarray) -> np.ndarray:
        """E x in the group ring, where S = s_scalar * E; x has shape (dim, m, N)."""
        n = self.conductor
        x = np.asarray(x)
        squeeze = x.ndim == 2
        if squeeze:
            x = x[:, None, :]
        d, m, _ = x.shape
        obj = x.dtype == object
        nz = np.nonzero(x)
        xs, cs, es = nz
        ws = x[nz]
        out = np.zeros((d, m, n), dtype=object if obj else np.int64)
        if len(xs) == 0:
            return out[:, 0, :] if squeeze else out
        chunk = max(1, 2_000_000 // max(1, d))
        rows = np.arange(d)
        use_float = not obj and float(np.abs(ws).astype(np.float64).sum()) * 64 < 2.0 ** 52
        flat = np.zeros(d * m * n, dtype=np.float64 if use_float else (object if obj else np.int64))
        for s in range(0, len(xs), chunk):
            xc, cc, ec, wc = xs[s:s + chunk], cs[s:s + chunk], es[s:s + chunk], ws[s:s + chunk]
            mult, expo = self.s_block(rows, xc)
            idx = ((rows[:, None] * m + cc[None, :]) * n + (expo + ec[None, :]) % n).ravel()
            w = (mult * (wc[None, :] if not obj else wc[None, :].astype(object))).ravel()
            if use_float:
                flat += np.bincount(idx, weights=w.astype(np.float64), minlength=d * m * n)
            else:
                np.add.at(flat, idx, w)
        res = np.rint(flat).astype(np.int64) if use_float else flat
        out = res.reshape(d, m, n)
        return out[:, 0, :] if squeeze else out

    def t_apply_gr(self, x: np.ndarray) -> np.ndarray:
        """T x for group-ring arrays of shape (dim, m, N) or (dim, N)."""
        n = self.conductor
        squeeze = x.ndim == 2
        if squeeze:
            x = x[:, None, :]
        idx = (np.arange(n)[None, :] - self.t_expo[:, None]) % n
        y = np.take_along_axis(x, np.broadcast_to(idx[:, None, :], x.shape), axis=2)
        out = np.empty_like(x)
        out[self.t_perm] = y
        return out[:, 0, :] if squeeze else out

    def e_matrix_gr(self) -> np.ndarray:
        """E as a one-hot group-ring array (dim, dim, N)."""
        d, n = self.dim, self.conductor
        mult, expo = self.s_block(np.arange(d), np.arange(d))
        out = np.zeros((d, d, n), dtype=np.int64)
        ii, jj = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
        np.add.at(out, (ii.ravel(), jj.ravel(), expo.ravel()), np.asarray(mult).ravel())
        return out

    def _monomial_gr(self, perm, expo) -> np.ndarray:
        d, n = self.dim, self.conductor
        out = np.zeros((d, d, n), dtype=np.int64)
        out[perm, np.arange(d), expo % n] = 1
        return out

    def check_relations(self) -> dict:
        """Exact verdicts for the defining relations and unitarity."""
        n, d = self.conductor, self.dim
        c = self.s_scalar
        e = self.e_matrix_gr()
        out = {}
        # S T S = T^-1 S T^-1, equivalent to (ST)^3 = S^2
        te = self.t_apply_gr(e)
        ete = self.s_apply_gr(te)
        lhs, dl = gr_scale(ete, c, n)
        rhs = _left_tinv(self, _right_tinv(self, e))
        out["(ST)^3 = S^2"] = gr_equal(lhs, dl, rhs, 1, n)
        # S^2 equals the stored monomial matrix
        ee = self.s_apply_gr(e)
        lhs, dl = gr_scale(ee, c * c, n)
        out["S^2 monomial"] = gr_equal(lhs, dl, self._monomial_gr(self.s2_perm, self.s2_expo), 1, n)
        perm2 = self.s2_perm[self.s2_perm]
        lam = (self.s2_expo + self.s2_expo[self.s2_perm]) % n
        scalar4 = bool((perm2 == np.arange(d)).all() and (lam == lam[0]).all())
        out["S^4 scalar"] = scalar4
        out["S^8 = I"] = scalar4 and (2 * int(lam[0])) % n == 0
        if "sigma" in self.meta:
            out["S^4 = sigma^4"] = scalar4 and Fraction(int(lam[0]), n) == frac_mod1(4 * self.meta["sigma"])
        # unitarity: S S^* = I
        estar = np.transpose(e, (1, 0, 2))[:, :, (-np.arange(n)) % n]
        prod = self.s_apply_gr(estar)
        lhs, dl = gr_scale(prod, c * c.conj(), n)
        out["S unitary"] = gr_equal(lhs, dl, self._monomial_gr(np.arange(d), np.zeros(d, dtype=np.int64)), 1, n)
        out["T monomial"] = len(np.unique(self.t_perm)) == d
        return out

    # dense view ---------------------------------------------------------
    def to_dense(self):
        d, n = self.dim, self.conductor
        if d > 4 * get_config().verify_dim:
            raise BudgetExceeded("dense materialisation budget exceeded")
        zero = CyclotomicNumber.zero(n)
        mt = [[zero] * d for _ in range(d)]
        for j in range(d):
            mt[int(self.t_perm[j])][j] = CyclotomicNumber.root(n, int(self.t_expo[j]))
        mult, expo = self.s_block(np.arange(d), np.arange(d))
        ms = [[(self.s_scalar * (int(mult[i, j]) * CyclotomicNumber.root(n, int(expo[i, j])))) if mult[i, j] else zero
               for j in range(d)] for i in range(d)]
        return mt, ms

    # transforms ---------------------------------------------------------
    def rescale(self, conductor: int) -> "GenRep":
        if conductor == self.conductor:
            return self
        if conductor % self.conductor:
            raise ValidationError("new conductor must be a multiple")
        f = conductor // self.conductor
        blk = self._block

        def block(rows, cols):
            mult, expo = blk(rows, cols)
            return mult, np.asarray(expo, dtype=np.int64) * f

        return GenRep(self.dim, conductor, self.t_perm, self.t_expo * f, self.s_scalar, self.s2_perm,
                      self.s2_expo * f, block, self.labels, self.meta, check=False)

    def tensor(self, other: "GenRep") -> "GenRep":
        return tensor(self, other)

    def char_twist(self, a: int) -> "GenRep":
        return char_twist(self, a)

    def conj(self) -> "GenRep":
        blk = self._block

        def block(rows, cols):
            mult, expo = blk(rows, cols)
            return mult, -np.asarray(expo, dtype=np.int64)

        meta = dict(self.meta, source=f"conj({self.meta.get('source', '')})")
        if "sigma" in meta:
            meta["sigma"] = frac_mod1(-meta["sigma"])
        return GenRep(self.dim, self.conductor, self.t_perm, -self.t_expo, self.s_scalar.conj(), self.s2_perm,
                      -self.s2_expo, block, self.labels, meta, check=False)

    def invariants(self, extra_ops=()) -> InvariantBasis:
        return invariants(self, extra_ops)


def _left_tinv(rep: GenRep, x: np.ndarray) -> np.ndarray:
    # (T^-1 X)[j, :, e] = X[perm(j), :, e + t_j]
    n = rep.conductor
    y = x[rep.t_perm]
    idx = (np.arange(n)[None, :] + rep.t_expo[:, None]) % n
    return np.take_along_axis(y, np.broadcast_to(idx[:, None, :], y.shape), axis=2)


def _right_tinv(rep: GenRep, x: np.ndarray) -> np.ndarray:
    # (X T^-1)[:, perm(j), e] = X[:, j, e + t_j]
    n = rep.conductor
    idx = (np.arange(n)[None, :] + rep.t_expo[:, None]) % n
    y = np.take_along_axis(x, np.broadcast_to(idx[None, :, :], x.shape), axis=2)
    out = np.empty_like(x)
    out[:, rep.t_perm] = y
    return out


# ---------------------------------------------------------------------------
# constructors


def weil_rep(m: Fqm) -> GenRep:
    """W(M): T d_x = e(Q(x)) d_x, S d_x = sigma |M|^(-1/2) sum_y e(-B(x,y)) d_y."""
    if m.order > get_config().max_rep_dim:
        raise BudgetExceeded(f"|M| = {m.order} exceeds the representation budget")
    if not m.is_nondegenerate():
        raise ValidationError("weil_rep needs a nondegenerate module")
    n = _even(m.level)
    f = n // m.level
    sig = m.sigma()
    s2 = frac_mod1(2 * sig) * n
    if s2.denominator != 1:
        raise ConsistencyError("sigma^2 does not lie in the coefficient field")
    coords = m.coords

    def block(rows, cols):
        b = m.b_int(coords[rows], coords[cols])
        return np.ones(b.shape, dtype=np.int64), -b * f

    return GenRep(m.order, n, np.arange(m.order), m.qnum * f, m.sigma_scalar(), m.neg_index(),
                  np.full(m.order, int(s2), dtype=np.int64), block, labels=m, meta={"source": m.name, "sigma": sig})


def tensor(a: GenRep, b: GenRep) -> GenRep:
    """Kronecker product; basis index i = i_a * dim_b + i_b."""
    n = lcm(a.conductor, b.conductor)
    a, b = a.rescale(n), b.rescale(n)
    db = b.dim
    ia, ib = np.divmod(np.arange(a.dim * db), db)

    def block(rows, cols):
        r1, r2 = np.divmod(rows, db)
        c1, c2 = np.divmod(cols, db)
        ur1, ir1 = np.unique(r1, return_inverse=True)
        uc1, ic1 = np.unique(c1, return_inverse=True)
        ur2, ir2 = np.unique(r2, return_inverse=True)
        uc2, ic2 = np.unique(c2, return_inverse=True)
        ma, ea = a.s_block(ur1, uc1)
        mb, eb = b.s_block(ur2, uc2)
        ma, ea = np.asarray(ma)[np.ix_(ir1, ic1)], ea[np.ix_(ir1, ic1)]
        mb, eb = np.asarray(mb)[np.ix_(ir2, ic2)], eb[np.ix_(ir2, ic2)]
        return ma * mb, ea + eb

    t_perm = a.t_perm[ia] * db + b.t_perm[ib]
    t_expo = a.t_expo[ia] + b.t_expo[ib]
    s2_perm = a.s2_perm[ia] * db + b.s2_perm[ib]
    s2_expo = a.s2_expo[ia] + b.s2_expo[ib]
    meta = {"source": f"({a.meta.get('source', '?')})x({b.meta.get('source', '?')})", "factors": (a, b)}
    if "sigma" in a.meta and "sigma" in b.meta:
        meta["sigma"] = frac_mod1(a.meta["sigma"] + b.meta["sigma"])
    return GenRep(a.dim * db, n, t_perm, t_expo, a.s_scalar * b.s_scalar, s2_perm, s2_expo, block, meta=meta)


def char_twist(r: GenRep, a: int) -> GenRep:
    """R (x) C(eps^a): T gains e(a/24), S gains e(-a/8)."""
    a %= 24
    n = lcm(r.conductor, Fraction(a, 24).denominator, Fraction(a, 8).denominator, 2)
    r = r.rescale(n)
    dt = Fraction(a, 24) * n
    ds2 = Fraction(-a, 4) * n
    meta = dict(r.meta, source=f"{r.meta.get('source', '?')}*eps^{a}", char=a)
    meta.pop("sigma", None)
    return GenRep(r.dim, n, r.t_perm, r.t_expo + int(dt), r.s_scalar * e_of(Fraction(-a, 8)), r.s2_perm,
                  r.s2_expo + int(ds2), r._block, r.labels, meta)


def trivial_rep() -> GenRep:
    return GenRep(1, 2, [0], [0], CyclotomicNumber.one(2), [0], [0],
                  lambda rows, cols: (np.ones((len(rows), len(cols)), dtype=np.int64),
                                      np.zeros((len(rows), len(cols)), dtype=np.int64)),
                  meta={"source": "1", "sigma": Fraction(0)})


def eps_char(a: int) -> GenRep:
    """The one-dimensional representation C(eps^a)."""
    return char_twist(trivial_rep(), a)


def dual_via_neg(m: Fqm) -> GenRep:
    """W(M)^c, realised as W(-M) in the same basis."""
    from .fqm import neg

    return weil_rep(neg(m))


def projective_line(l: int) -> list[tuple[int, int]]:
    """Canonical representatives of P^1(Z/l): lexicographically minimal unit multiples."""
    if l < 1:
        raise ValidationError("l must be positive")
    if l == 1:
        return [(0, 0)]
    units = [u for u in range(1, l) if math.gcd(u, l) == 1]
    pts = set()
    for c in range(l):
        for d in range(l):
            if math.gcd(math.gcd(c, d), l) == 1:
                pts.add(min(((u * c) % l, (u * d) % l) for u in units))
    return sorted(pts)


def ind_gamma0(l: int) -> GenRep:
    """Ind from Gamma_0(l) of the trivial character, on the cosets P^1(Z/l).

    g acts by d_P -> d_{P g^{-1}} on row vectors P = (c : d).
    """
    pts = projective_line(l)
    pos = {p: i for i, p in enumerate(pts)}
    units = [u for u in range(1, l) if math.gcd(u, l) == 1] if l > 1 else [1]

    def canon(c, d):
        if l == 1:
            return (0, 0)
        return min(((u * c) % l, (u * d) % l) for u in units)

    tperm = np.array([pos[canon(c, d - c)] for c, d in pts], dtype=np.int64)
    sperm = np.array([pos[canon(-d, c)] for c, d in pts], dtype=np.int64)
    dim = len(pts)
    expected = l
    for p in factorint(l):
        expected = expected * (p + 1) // p
    if dim != expected:
        raise ConsistencyError("projective line has the wrong size")

    def block(rows, cols):
        mult = (rows[:, None] == sperm[cols][None, :]).astype(np.int64)
        return mult, np.zeros(mult.shape, dtype=np.int64)

    return GenRep(dim, 2, tperm, np.zeros(dim, dtype=np.int64), CyclotomicNumber.one(2),
                  np.arange(dim), np.zeros(dim, dtype=np.int64), block, labels=pts,
                  meta={"source": f"Ind Gamma0({l})", "sigma": Fraction(0)})


# ---------------------------------------------------------------------------
# dense representations (restrictions to small invariant subspaces)


class DenseRep:
    """A representation given by explicit matrices over Q(zeta_N)."""

    def __init__(self, mat_t, mat_s, conductor: int, meta: dict | None = None):
        self.matT = mat_t
        self.matS = mat_s
        self.conductor = conductor
        self.dim = len(mat_t)
        self.meta = dict(meta or {})

    def check_relations(self) -> dict:
        t, s = self.matT, self.matS
        st = _mm(s, t)
        s2 = _mm(s, s)
        lhs = _mm(_mm(st, st), st)
        s4 = _mm(s2, s2)
        s8 = _mm(s4, s4)
        one = CyclotomicNumber.one(self.conductor)
        d = self.dim
        ident = [[one if i == j else CyclotomicNumber.zero(self.conductor) for j in range(d)] for i in range(d)]
        sc = s4[0][0] if d else one
        return {
            "(ST)^3 = S^2": _meq(lhs, s2),
            "S^8 = I": _meq(s8, ident),
            "S^4 scalar": _meq(s4, [[sc if i == j else CyclotomicNumber.zero(self.conductor) for j in range(d)] for i in range(d)]),
            "S unitary": _meq(_mm(s, _ct(s)), ident),
            "T unitary": _meq(_mm(t, _ct(t)), ident),
        }

    def invariants(self) -> list[list[CyclotomicNumber]]:
        n = self.conductor
        one = CyclotomicNumber.one(n)
        d = self.dim
        rows = [[self.matT[i][j] - (one if i == j else 0) for j in range(d)] for i in range(d)]
        rows += [[self.matS[i][j] - (one if i == j else 0) for j in range(d)] for i in range(d)]
        rows = [r for r in rows if any(r)]
        ker = intlin.kernel_field(rows, d, CyclotomicNumber.zero(n), one)
        if not ker:
            return []
        red, _ = intlin.rref_field(ker)
        return red

    def trace(self, mat) -> CyclotomicNumber:
        return sum((mat[i][i] for i in range(self.dim)), CyclotomicNumber.zero(self.conductor))


def _mm(a, b):
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col) if x and y), CyclotomicNumber.zero(1)) for col in bt] for row in a]


def _ct(a):
    return [[a[j][i].conj() for j in range(len(a))] for i in range(len(a[0]))]


def _meq(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def restrict(rep: GenRep, vectors: Sequence[Sequence[CyclotomicNumber]]) -> DenseRep:
    """The representation on span(vectors), which must be invariant."""
    mt, ms = rep.to_dense()
    basis, piv = intlin.rref_field([list(v) for v in vectors])
    k = len(basis)
    n = rep.conductor

    def coords(w):
        c = [w[p] for p in piv]
        recon = [sum((c[i] * basis[i][j] for i in range(k) if c[i]), CyclotomicNumber.zero(n)) for j in range(rep.dim)]
        if not all(x == y for x, y in zip(recon, w)):
            raise ValidationError("restrict: subspace is not invariant")
        return c

    def image(mat):
        cols = []
        for b in basis:
            w = [sum((mat[i][j] * b[j] for j in range(rep.dim) if b[j] and mat[i][j]), CyclotomicNumber.zero(n))
                 for i in range(rep.dim)]
            cols.append(coords(w))
        return [[cols[j][i] for j in range(k)] for i in range(k)]

    return DenseRep(image(mt), image(ms), n, meta={"source": f"restrict({rep.meta.get('source', '')})"})


def rep_transform(r: GenRep, op: str, arg=None):
    if op == "tensor":
        return tensor(r, arg)
    if op == "dual_via_neg":
        if isinstance(arg, Fqm):
            return dual_via_neg(arg)
        return r.conj()
    if op == "char_twist":
        return char_twist(r, int(arg))
    if op == "restrict":
        return restrict(r, arg)
    raise ValidationError(f"unknown transform {op!r}")


# ---------------------------------------------------------------------------
# symmetries, invariants, eigenspaces


def orth_action(m: Fqm, images) -> np.ndarray:
    """Permutation of basis indices induced by an automorphism alpha (d_x -> d_alpha(x))."""
    if not is_isometry(m, images):
        raise ValidationError("map is not an isometry of the module")
    return apply_map(m, images)


def check_intertwines(rep: GenRep, perm) -> bool:
    """Exact test that the permutation matrix P (d_j -> d_perm(j)) commutes with T and S."""
    perm = np.asarray(perm, dtype=np.int64)
    d = rep.dim
    if len(perm) != d or len(np.unique(perm)) != d:
        return False
    # P T = T P
    if not (np.array_equal(rep.t_perm[perm], perm[rep.t_perm]) and np.array_equal(rep.t_expo[perm], rep.t_expo)):
        return False
    # P S P^-1 = S  <=>  S[perm(i), perm(j)] = S[i, j]
    idx = np.arange(d)
    chunk = max(1, 2_000_000 // d)
    for s in range(0, d, chunk):
        cols = idx[s:s + chunk]
        m1, e1 = rep.s_block(idx, cols)
        m2, e2 = rep.s_block(perm, perm[cols])
        if not (np.array_equal(m1, m2) and np.array_equal(e1 % rep.conductor, e2 % rep.conductor)):
            return False
    return True


def neg_symmetry(rep_dims: Sequence[int], factor: int, neg_perm: np.ndarray, sign: int = 1):
    """The operator x -> -x on one tensor factor, as a monomial op on the full index."""
    total = math.prod(rep_dims)
    idx = np.arange(total)
    digits = []
    rest = idx
    for d in reversed(rep_dims):
        rest, r = np.divmod(rest, d)
        digits.append(r)
    digits = digits[::-1]
    digits[factor] = np.asarray(neg_perm)[digits[factor]]
    perm = np.zeros(total, dtype=np.int64)
    for d, dig in zip(rep_dims, digits):
        perm = perm * d + dig
    return perm, sign


def invariants(rep: GenRep, extra_ops=()) -> InvariantBasis:
    """Exact basis of {v : Tv = v, Sv = v} (further fixed by any extra monomial ops)."""
    if rep.dim > get_config().max_rep_dim:
        raise BudgetExceeded(f"dimension {rep.dim} exceeds the linear-algebra budget")
    return solve_invariants(rep, extra_ops)


def indicator_vector(m: Fqm, members) -> dict[int, CyclotomicNumber]:
    one = CyclotomicNumber.one(1)
    return {int(i): one for i in members}


def apply_s_exact(rep: GenRep, vec: dict[int, CyclotomicNumber]) -> tuple[np.ndarray, int]:
    """S v as a group-ring array and a denominator."""
    n = rep.conductor
    x, den = _sparse_to_gr(rep, vec)
    sx = rep.s_apply_gr(x)
    out, d = gr_scale(sx, rep.s_scalar, n)
    return out, d * den


def _sparse_to_gr(rep: GenRep, vec):
    n = rep.conductor
    items = [(i, c.embed(n)) for i, c in vec.items()]
    den = lcm(*[c.den for _, c in items]) if items else 1
    x = np.zeros((rep.dim, n), dtype=np.int64)
    for i, c in items:
        f = den // c.den
        x[i, : len(c.num)] += np.array(c.num, dtype=np.int64) * f
    return x, den


def is_invariant(rep: GenRep, vec: dict[int, CyclotomicNumber]) -> bool:
    n = rep.conductor
    x, den = _sparse_to_gr(rep, vec)
    tx = rep.t_apply_gr(x)
    if not gr_equal(tx, 1, x, 1, n):
        return False
    sx, d = apply_s_exact(rep, vec)
    return gr_equal(sx, d, x, den, n)


def invariants_from_selfdual(m: Fqm) -> tuple[list[list[Fraction]], list[FqmSubgroup]]:
    """Rational basis of span{I_U : U isotropic self-dual}, and the subgroups used."""
    from .fqm import isotropic_subgroups

    subs = isotropic_subgroups(m, "self_dual")
    vecs = []
    for u in subs:
        v = [Fraction(0)] * m.order
        for i in u.members:
            v[int(i)] = Fraction(1)
        vecs.append(v)
    if not vecs:
        return [], subs
    basis, _ = intlin.rref(vecs)
    return basis, subs


def embed_subquotient(m: Fqm, u: FqmSubgroup):
    """The map W(U*/U) -> W(M), d_{x+U} -> sum_{y in x+U} d_y, checked for equivariance.

    Returns (sub_module, cosets) where cosets[i] lists the M-indices of the
    coset attached to the i-th element of U*/U.
    """
    sub, gens = subquotient(m, u)
    cosets = []
    orders = np.array(m.orders, dtype=np.int64)
    ucoords = m.coords[u.members]
    for row in sub.coords:
        x = np.zeros(m.rank, dtype=np.int64)
        for a, g in zip(row.tolist(), gens):
            x = x + a * np.array(g, dtype=np.int64)
        cosets.append(np.sort(m.indices((ucoords + x) % orders)))
    if not _check_embedding(m, sub, cosets):
        raise ConsistencyError("subquotient embedding is not equivariant")
    return sub, cosets


def _check_embedding(m: Fqm, sub: Fqm, cosets) -> bool:
    rm, rs = weil_rep(m), weil_rep(sub)
    n = lcm(rm.conductor, rs.conductor)
    rm, rs = rm.rescale(n), rs.rescale(n)
    k = len(cosets)
    owner = np.full(m.order, -1, dtype=np.int64)
    for i, c in enumerate(cosets):
        owner[c] = i
    # T: constant e(Q) on each coset
    for i, c in enumerate(cosets):
        if not (rm.t_expo[c] == rs.t_expo[i]).all():
            return False
    x = np.zeros((m.order, k, n), dtype=np.int64)
    for i, c in enumerate(cosets):
        x[c, i, 0] = 1
    lhs, dl = gr_scale(rm.s_apply_gr(x), rm.s_scalar, n)
    # image of S_sub d_i: on y in coset j the coefficient S_sub[j, i]
    mult, expo = rs.s_block(np.arange(k), np.arange(k))
    rhs = np.zeros((m.order, k, n), dtype=np.int64)
    inside = np.nonzero(owner >= 0)[0]
    for i in range(k):
        rhs[inside, i, expo[owner[inside], i]] = mult[owner[inside], i]
    rhs, dr = gr_scale(rhs, rs.s_scalar, n)
    return gr_equal(lhs, dl, rhs, dr, n)


def eigenspace_Z(rep: GenRep, target) -> list[dict[int, CyclotomicNumber]]:
    """Basis of X = {v : S^2 v = e(target) v}, as sparse orbit vectors."""
    n = rep.conductor
    t = frac_mod1(Fraction(target)) * n
    if t.denominator != 1:
        raise ValidationError("eigenvalue does not lie in the coefficient field")
    perm2 = rep.s2_perm[rep.s2_perm]
    lam = (rep.s2_expo + rep.s2_expo[rep.s2_perm]) % n
    if not ((perm2 == np.arange(rep.dim)).all() and (lam == lam[0]).all()):
        raise ConsistencyError("Z^2 is not scalar")
    orbits = monomial_orbits(rep.dim, n, [(rep.s2_perm, rep.s2_expo - int(t))])
    out = []
    for o in orbits:
        out.append({int(j): CyclotomicNumber.root(n, int(ph)) for j, ph in zip(o.indices, o.phases)})
    return out, orbits


# ---------------------------------------------------------------------------
# rank-one decompositions


def _orth_group_dm(m: int) -> dict[int, int]:
    """Generators g_p of O(m), one per prime p | m: g = -1 mod 2p^a, 1 mod 2m/p^a."""
    from .fqm import dm_units

    out = {}
    units = dm_units(m)
    for p, e in factorint(m).items():
        pa = p ** e
        for a in units:
            if (a + 1) % (2 * pa) == 0 and (a - 1) % (2 * m // pa) == 0:
                out[p] = a
                break
        else:
            raise ConsistencyError(f"no generator g_{p} in O({m})")
    return out


def _squarefree_divisors(n: int) -> list[int]:
    ps = list(factorint(n))
    out = []
    for r in range(len(ps) + 1):
        for comb in itertools.combinations(ps, r):
            out.append(math.prod(comb))
    return sorted(out)


def _square_divisors(n: int) -> list[int]:
    return [d for d in range(1, math.isqrt(n) + 1) if n % (d * d) == 0]


def w1_piece(m: int, a: int, f: int) -> list[list[Fraction]]:
    """W_1^f(D_m(a)): orthogonal to all nontrivial subquotient images, chi_f-isotypic under O(m)."""
    size = 2 * m
    rows = []
    for d in _square_divisors(m):
        if d == 1:
            continue
        step = 2 * m // d  # U_d = (2m/d) D_m, U_d^* = d D_m
        for y in range(0, size, d):
            r = [Fraction(0)] * size
            for t in range(d):
                r[(y + t * step) % size] += 1
            rows.append(r)
    for p, g in _orth_group_dm(m).items():
        chi = -1 if f % p == 0 else 1
        # (g.l)(x) = l(g^{-1} x) = chi l(x); g is an involution
        for x in range(size):
            r = [Fraction(0)] * size
            r[(g * x) % size] += 1
            r[x] -= chi
            rows.append(r)
    ker = intlin.kernel(rows, size) if rows else intlin.kernel([], size)
    if not ker:
        return []
    basis, _ = intlin.rref(ker)
    return basis


def decompose_rank1(m: int, a: int = 1) -> list[dict]:
    """Pieces W_1^f(D_{m/d^2}(a)) embedded into W(D_m(a)) through U_d = (2m/d) D_m."""
    if 2 * m > get_config().max_module_order:
        raise BudgetExceeded("rank-one decomposition budget exceeded")
    if math.gcd(a, 2 * m) != 1:
        raise ValidationError("a must be coprime to 2m")
    size = 2 * m
    out = []
    for d in _square_divisors(m):
        mp = m // (d * d)
        step = 2 * m // d
        for f in _squarefree_divisors(mp):
            piece = w1_piece(mp, a, f)
            emb = []
            for v in piece:
                w = [Fraction(0)] * size
                for x, c in enumerate(v):
                    if c:
                        for t in range(d):
                            w[(d * x + t * step) % size] += c
                emb.append(w)
            out.append({"f": f, "d": d, "m": mp, "dim": len(piece), "basis": piece, "embedded": emb})
    return out


def decompose_rank1_L(q: int, a: int = 1) -> list[dict]:
    """W(L_q(a)) = sum over d^2 | q of W_1^+ and W_1^- of L_{q/d^2}, with U_d = (q/d) L_q."""
    out = []
    for d in _square_divisors(q):
        qp = q // (d * d)
        for sign in (1, -1):
            if qp == 1 and sign == -1:
                continue
            rows = []
            for d2 in _square_divisors(qp):
                if d2 == 1:
                    continue
                step = qp // d2
                for y in range(0, qp, d2):
                    r = [Fraction(0)] * qp
                    for t in range(d2):
                        r[(y + t * step) % qp] += 1
                    rows.append(r)
            for x in range(qp):
                r = [Fraction(0)] * qp
                r[(-x) % qp] += 1
                r[x] -= sign
                rows.append(r)
            ker = intlin.kernel(rows, qp)
            basis = intlin.rref(ker)[0] if ker else []
            emb = []
            step = q // d
            for v in basis:
                w = [Fraction(0)] * q
                for x, c in enumerate(v):
                    if c:
                        for t in range(d):
                            w[(d * x + t * step) % q] += c
                emb.append(w)
            out.append({"sign": sign, "d": d, "q": qp, "dim": len(basis), "basis": basis, "embedded": emb})
    return out
