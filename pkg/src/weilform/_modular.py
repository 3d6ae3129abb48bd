"""Certified multi-modular computation of fixed vectors of monomial/lazy reps.

The unknowns are restricted to orbit vectors of the monomial operators that an
invariant must be fixed by (T, S^2 and optional extra symmetries).  The
remaining system (S - 1) v = 0 is reduced modulo primes p = 1 mod N under the
embeddings zeta -> omega^a.  The kernel dimension modulo p bounds the true
dimension from above; candidate vectors are lifted by CRT and rational
reconstruction and then verified exactly in the group ring.  The result is
certified when the number of verified independent vectors meets the bound.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy import isprime

from . import intlin
from .exactnum import CyclotomicNumber, gr_equal, gr_scale, phi

log = logging.getLogger(__name__)

_SLACK = 8
_R_BOUND = 1 << 10
_CACHE_LIMIT = 40_000_000


@dataclass
class Orbit:
    indices: np.ndarray
    phases: np.ndarray  # exponents of zeta_N


def monomial_orbits(dim: int, conductor: int, ops: Sequence[tuple[np.ndarray, np.ndarray]],
                    candidates: np.ndarray | None = None) -> list[Orbit]:
    """Orbits carrying a vector fixed by every monomial operator in ops.

    An operator (perm, expo) maps e_j to zeta^expo[j] e_perm[j]; a fixed
    vector c satisfies c[perm[j]] = zeta^expo[j] c[j].  Orbits on which these
    constraints are inconsistent carry no fixed vector and are dropped.
    """
    n = conductor
    perms = [np.asarray(p, dtype=np.int64) for p, _ in ops]
    expos = [np.asarray(e, dtype=np.int64) % n for _, e in ops]
    # a cheap necessary condition from the first operator: fixed points must have phase 0
    alive = np.ones(dim, dtype=bool)
    for p, e in zip(perms, expos):
        fixed = p == np.arange(dim)
        alive &= ~(fixed & (e != 0))
    if candidates is not None:
        mask = np.zeros(dim, dtype=bool)
        mask[np.asarray(candidates, dtype=np.int64)] = True
        alive &= mask
    pl = [p.tolist() for p in perms]
    el = [e.tolist() for e in expos]
    phase = [-1] * dim
    seen = np.zeros(dim, dtype=bool)
    out = []
    for root in np.nonzero(alive)[0].tolist():
        if seen[root]:
            continue
        stack = [root]
        phase[root] = 0
        seen[root] = True
        members = [root]
        ok = True
        while stack:
            j = stack.pop()
            pj = phase[j]
            for p, e in zip(pl, el):
                k = p[j]
                ph = (pj + e[j]) % n
                if seen[k]:
                    if phase[k] != ph:
                        ok = False
                else:
                    seen[k] = True
                    phase[k] = ph
                    members.append(k)
                    stack.append(k)
        if ok and all(alive[m] for m in members):
            idx = np.array(sorted(members), dtype=np.int64)
            out.append(Orbit(idx, np.array([phase[i] for i in idx], dtype=np.int64)))
    out.sort(key=lambda o: int(o.indices[0]))
    return out


# ---------------------------------------------------------------------------
# modular helpers


def primes_1_mod(n: int, count: int, start: int = 1 << 25):
    k = start // n
    out = []
    while len(out) < count:
        p = k * n + 1
        if p >= (1 << 26):
            raise RuntimeError("ran out of primes below 2^26")
        if isprime(p):
            out.append(p)
        k += 1
    return out


def primitive_root_of_unity(n: int, p: int) -> int:
    """An element of exact order n in F_p (requires n | p - 1)."""
    fac = _prime_factors(n)
    for g in range(2, p):
        w = pow(g, (p - 1) // n, p)
        if all(pow(w, n // q, p) != 1 for q in fac):
            return w
    raise RuntimeError("no primitive root found")


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def cyclo_mod_p(x: CyclotomicNumber, conductor: int, omega_pows: np.ndarray, p: int) -> int:
    x = x.embed(conductor)
    if x.den % p == 0:
        raise ZeroDivisionError("denominator divisible by the chosen prime")
    s = 0
    for j, c in enumerate(x.num):
        if c:
            s = (s + c * int(omega_pows[j])) % p
    return s * pow(x.den, -1, p) % p


def rref_mod_p(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    a = a.copy() % p
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = a[r] * inv % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if len(nzr):
            a[nzr] = (a[nzr] - np.outer(col[nzr], a[r]) % p) % p
        piv.append(c)
        r += 1
    return a[:r], piv


def kernel_mod_p(a: np.ndarray, p: int, ncols: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Kernel basis with identity on the free columns; returns (basis, free)."""
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64), tuple(range(ncols))
    r, piv = rref_mod_p(a, p)
    free = tuple(c for c in range(ncols) if c not in set(piv))
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        basis[i, piv] = (-r[:, f]) % p
    return basis, free


def rational_reconstruct(a: int, m: int):
    """n/d with n = a d mod m, |n|, d <= sqrt(m/2); None if none exists."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    f = Fraction(r1, s1)
    if (f.numerator - a * f.denominator) % m:
        return None
    return f


def crt_pair(r1: np.ndarray, m1: int, r2: np.ndarray, p: int):
    """Combine residues mod m1 (object array) with residues mod p."""
    inv = pow(m1 % p, -1, p)
    r1o = r1.astype(object)
    t = ((r2.astype(object) - r1o) % p) * inv % p
    return r1o + m1 * t, m1 * p


# ---------------------------------------------------------------------------


@dataclass
class InvariantBasis:
    """Basis of fixed vectors; vectors are sparse maps index -> CyclotomicNumber."""

    dim: int
    conductor: int
    vectors: list[dict[int, CyclotomicNumber]]
    certified: bool = True
    upper_bound: int | None = None
    orbit_count: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vectors)

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def dense(self) -> list[list[CyclotomicNumber]]:
        zero = CyclotomicNumber.zero(self.conductor)
        out = []
        for v in self.vectors:
            row = [zero] * self.dim
            for i, c in v.items():
                row[i] = c
            out.append(row)
        return out

    def to_json(self) -> dict:
        return {
            "dim": self.dimension,
            "certified": self.certified,
            "basis": [{str(i): c.to_json() for i, c in sorted(v.items())} for v in self.vectors],
        }


class _System:
    """Lazily evaluated (S - 1) restricted to orbit vectors, reduced mod p."""

    def __init__(self, rep, orbits: list[Orbit]):
        self.rep = rep
        self.orbits = orbits
        self.n = rep.conductor
        self.cols = np.concatenate([o.indices for o in orbits])
        self.phases = np.concatenate([o.phases for o in orbits])
        self.owner = np.concatenate([np.full(len(o.indices), k, dtype=np.int64) for k, o in enumerate(orbits)])
        self.starts = np.cumsum([0] + [len(o.indices) for o in orbits[:-1]])
        self.k = len(orbits)
        self.dim = rep.dim
        width = max(1, len(self.cols))
        self.chunk = max(1, min(self.dim, 4_000_000 // width, 1 << 15))
        self._cache = None
        if self.dim * width <= _CACHE_LIMIT:
            self._cache = [self._block(r0) for r0 in range(0, self.dim, self.chunk)]
        self.pos = np.full(self.dim, -1, dtype=np.int64)
        self.pos[self.cols] = np.arange(len(self.cols))

    def _block(self, r0: int):
        rows = np.arange(r0, min(self.dim, r0 + self.chunk))
        mult, expo = self.rep.s_block(rows, self.cols)
        return rows, np.asarray(mult, dtype=np.int64), (np.asarray(expo, dtype=np.int64) + self.phases[None, :]) % self.n

    def blocks(self):
        if self._cache is not None:
            yield from self._cache
        else:
            for r0 in range(0, self.dim, self.chunk):
                yield self._block(r0)

    def compressed(self, p: int, a: int, seed: int) -> np.ndarray:
        """R (S - 1) V mod p for a random small-entry R, or the full matrix if short."""
        n = self.n
        omega = primitive_root_of_unity(n, p)
        w = pow(omega, a, p)
        pows = np.array([pow(w, e, p) for e in range(n)], dtype=np.int64)
        cp = cyclo_mod_p(self.rep.s_scalar, n, pows, p)
        full = self.dim <= self.k + _SLACK
        rng = np.random.default_rng(seed)
        out_rows = self.dim if full else self.k + _SLACK
        acc = np.zeros((out_rows, self.k), dtype=np.float64 if not full else np.int64)
        for rows, mult, expo in self.blocks():
            vals = pows[expo] * (mult % p) % p
            a_blk = np.add.reduceat(vals, self.starts, axis=1) % p if vals.shape[1] else np.zeros((len(rows), 0), dtype=np.int64)
            a_blk = a_blk * cp % p
            hit = self.pos[rows]
            sel = np.nonzero(hit >= 0)[0]
            if len(sel):
                js = hit[sel]
                a_blk[sel, self.owner[js]] = (a_blk[sel, self.owner[js]] - pows[self.phases[js]]) % p
            if full:
                acc[rows] = a_blk
            else:
                r = rng.integers(0, _R_BOUND, size=(out_rows, len(rows))).astype(np.float64)
                acc = np.fmod(acc + r @ a_blk.astype(np.float64), float(p))
        return acc.astype(np.int64) % p


def _verify(rep, orbits: list[Orbit], vecs: list[list]) -> list[bool]:
    """Exact check of S v = v for orbit-coordinate vectors over Q(zeta_N)."""
    n = rep.conductor
    m = len(vecs)
    if m == 0:
        return []
    entries = []
    big = 0
    for t, c in enumerate(vecs):
        cy = [(ci if isinstance(ci, CyclotomicNumber) else CyclotomicNumber.from_rational(ci, n)).embed(n) for ci in c]
        den = math.lcm(*[ci.den for ci in cy]) if cy else 1
        for o, ci in zip(orbits, cy):
            if ci.is_zero():
                continue
            nums = [v * (den // ci.den) for v in ci.num]
            big = max(big, max(abs(v) for v in nums))
            entries.append((t, o, nums))
    dtype = np.int64 if big < 2 ** 40 else object
    x = np.zeros((rep.dim, m, n), dtype=dtype)
    for t, o, nums in entries:
        for i, v in enumerate(nums):
            if v:
                x[o.indices, t, (o.phases + i) % n] += v
    sx = rep.s_apply_gr(x)
    lhs, dl = gr_scale(sx, rep.s_scalar, n)
    return [gr_equal(lhs[:, t, :], dl, x[:, t, :], 1, n) for t in range(m)]


def solve_invariants(rep, extra_ops: Sequence[tuple[np.ndarray, np.ndarray]] = (), max_primes: int = 6) -> InvariantBasis:
    n = rep.conductor
    ops = [(rep.t_perm, rep.t_expo), (rep.s2_perm, rep.s2_expo)] + list(extra_ops)
    orbits = monomial_orbits(rep.dim, n, ops)
    k = len(orbits)
    log.debug("invariant solve: dim=%d conductor=%d orbits=%d", rep.dim, n, k)
    if k == 0:
        return InvariantBasis(rep.dim, n, [], True, 0, 0)
    system = _System(rep, orbits)
    primes = primes_1_mod(n, max_primes + 2)
    units = [a for a in range(1, n) if math.gcd(a, n) == 1] or [1]

    # rational attempt: one embedding per prime
    bound = None
    residues = None
    modulus = 1
    free_ref = None
    for idx, p in enumerate(primes[:max_primes]):
        c = system.compressed(p, 1, seed=1000 + idx)
        basis, free = kernel_mod_p(c, p, k)
        dim_p = len(free)
        if bound is None or dim_p < bound:
            bound, free_ref, residues, modulus = dim_p, free, None, 1
        if bound == 0:
            return InvariantBasis(rep.dim, n, [], True, 0, k)
        if dim_p != bound or free != free_ref:
            continue
        if residues is None:
            residues, modulus = basis.astype(object), p
        else:
            residues, modulus = crt_pair(residues, modulus, basis, p)
        if modulus.bit_length() < 40:
            continue
        cand = _reconstruct_rational(residues, modulus)
        if cand is not None and all(_verify(rep, orbits, cand)):
            return _finish(rep, orbits, cand, bound, k)
    # field attempt: all embeddings, interpolated
    res = _solve_field(rep, system, orbits, primes, units, bound)
    if res is not None:
        return res
    log.warning("invariant solve not certified (bound %s)", bound)
    return InvariantBasis(rep.dim, n, [], False, bound, k)


def _reconstruct_rational(residues: np.ndarray, modulus: int):
    out = []
    for row in residues:
        vec = []
        for v in row:
            f = rational_reconstruct(int(v), modulus)
            if f is None:
                return None
            vec.append(f)
        out.append(vec)
    return out


def _solve_field(rep, system: _System, orbits, primes, units, bound):
    n = rep.conductor
    k = len(orbits)
    ph = phi(n)
    residues = None
    modulus = 1
    free_ref = None
    for idx, p in enumerate(primes):
        omega = primitive_root_of_unity(n, p)
        per_embedding = []
        consistent = True
        for a in units:
            c = system.compressed(p, a, seed=5000 + 97 * idx + a)
            basis, free = kernel_mod_p(c, p, k)
            if len(free) != bound or (free_ref is not None and free != free_ref):
                consistent = False
                break
            free_ref = free
            per_embedding.append(basis)
        if not consistent:
            continue
        # Vandermonde: value_a = sum_i coeff_i omega^(a i), i < phi(n)
        vmat = np.array([[pow(omega, a * i, p) for i in range(ph)] for a in units], dtype=object)
        vinv = _inverse_mod_p(vmat, p)
        stack = np.stack(per_embedding).astype(object)  # (units, bound, k)
        coeffs = np.tensordot(vinv, stack, axes=([1], [0])) % p  # (phi, bound, k)
        if residues is None:
            residues, modulus = coeffs, p
        else:
            residues, modulus = crt_pair(residues, modulus, coeffs.astype(np.int64), p)
        if modulus.bit_length() < 40:
            continue
        cand = []
        fail = False
        for b in range(bound):
            vec = []
            for j in range(k):
                cs = [rational_reconstruct(int(residues[i, b, j]), modulus) for i in range(ph)]
                if any(c is None for c in cs):
                    fail = True
                    break
                den = math.lcm(*[c.denominator for c in cs])
                vec.append(CyclotomicNumber(n, [int(c * den) for c in cs], den))
            if fail:
                break
            cand.append(vec)
        if fail:
            continue
        if all(_verify(rep, orbits, cand)):
            return _finish(rep, orbits, cand, bound, k)
    return None


def _inverse_mod_p(m: np.ndarray, p: int) -> np.ndarray:
    size = m.shape[0]
    aug = np.concatenate([m.astype(np.int64) % p, np.eye(size, dtype=np.int64)], axis=1)
    r, piv = rref_mod_p(aug, p)
    if piv[:size] != list(range(size)):
        raise ZeroDivisionError("singular Vandermonde matrix")
    return r[:, size:].astype(object)


def _finish(rep, orbits, cand, bound, k) -> InvariantBasis:
    n = rep.conductor
    rows = [[c if isinstance(c, CyclotomicNumber) else CyclotomicNumber.from_rational(c, n) for c in v] for v in cand]
    rref, _ = intlin.rref_field(rows)
    vectors = []
    for v in rref:
        sparse = {}
        for o, c in zip(orbits, v):
            if c.is_zero():
                continue
            for j, ph in zip(o.indices.tolist(), o.phases.tolist()):
                sparse[j] = c * CyclotomicNumber.root(n, ph) if ph else c
        vectors.append(sparse)
    return InvariantBasis(rep.dim, n, vectors, len(vectors) == bound, bound, k)
