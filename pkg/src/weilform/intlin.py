"""Small exact linear algebra over Z and Q on lists of lists.

Smith normal form with transforms is needed for determinant groups and
subquotients; the rational routines serve the dense low-dimensional cases.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a: Matrix, v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def smith_normal_form(a: Matrix):
    """Return (D, U, V) with U*A*V = D diagonal, U and V unimodular.

    The diagonal entries are non-negative and each divides the next.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(map(int, r)) for r in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, c):  # row_dst += c * row_src
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, c):
        for r in d:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    if d[i][j] and (piv is None or abs(d[i][j]) < abs(d[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return d, u, v
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            p = d[t][t]
            done = True
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(i, t, -(d[i][t] // p))
                    if d[i][t]:
                        done = False
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(j, t, -(d[t][j] // p))
                    if d[t][j]:
                        done = False
            if not done:
                continue
            # divisibility of the remaining block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if d[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return d, u, v


def elementary_divisors(a: Matrix) -> list[int]:
    d, _, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def to_fraction_matrix(a: Matrix) -> Matrix:
    return [[Fraction(x) for x in r] for r in a]


def rref(a: Matrix):
    """Reduced row echelon form over Q; returns (R, pivot_columns)."""
    r = [[Fraction(x) for x in row] for row in a]
    rows = len(r)
    cols = len(r[0]) if rows else 0
    pivots = []
    i = 0
    for c in range(cols):
        p = next((k for k in range(i, rows) if r[k][c] != 0), None)
        if p is None:
            continue
        r[i], r[p] = r[p], r[i]
        inv = 1 / r[i][c]
        r[i] = [x * inv for x in r[i]]
        for k in range(rows):
            if k != i and r[k][c] != 0:
                f = r[k][c]
                r[k] = [x - f * y for x, y in zip(r[k], r[i])]
        pivots.append(c)
        i += 1
        if i == rows:
            break
    return r[:i], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1]) if a else 0


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    r, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(r) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in r]


def det(a: Matrix) -> Fraction:
    n = len(a)
    m = [[Fraction(x) for x in r] for r in a]
    out = Fraction(1)
    for c in range(n):
        p = next((k for k in range(c, n) if m[k][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            out = -out
        out *= m[c][c]
        for k in range(c + 1, n):
            if m[k][c]:
                f = m[k][c] / m[c][c]
                m[k] = [x - f * y for x, y in zip(m[k], m[c])]
    return out


def solve(a: Matrix, b: Sequence):
    """One rational solution of a x = b, or None if inconsistent."""
    cols = len(a[0]) if a else 0
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    r, piv = rref(aug)
    if cols in piv:
        return None
    x = [Fraction(0)] * cols
    for row, c in zip(r, piv):
        x[c] = row[cols]
    return x


def kernel(a: Matrix, ncols: int | None = None) -> Matrix:
    """Basis of the right kernel over Q (list of vectors)."""
    cols = ncols if ncols is not None else (len(a[0]) if a else 0)
    if not a:
        return [[Fraction(int(i == j)) for j in range(cols)] for i in range(cols)]
    r, piv = rref(a)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for row, c in zip(r, piv):
            v[c] = -row[f]
        basis.append(v)
    return basis


def rref_field(a: Matrix):
    """RREF over an arbitrary exact field (entries support + - * / and bool)."""
    r = [list(row) for row in a]
    rows = len(r)
    cols = len(r[0]) if rows else 0
    pivots = []
    i = 0
    for c in range(cols):
        p = next((k for k in range(i, rows) if r[k][c]), None)
        if p is None:
            continue
        r[i], r[p] = r[p], r[i]
        inv = 1 / r[i][c]
        r[i] = [x * inv if x else x for x in r[i]]
        for k in range(rows):
            if k != i and r[k][c]:
                f = r[k][c]
                r[k] = [x - f * y if y else x for x, y in zip(r[k], r[i])]
        pivots.append(c)
        i += 1
        if i == rows:
            break
    return r[:i], pivots


def kernel_field(a: Matrix, ncols: int, zero, one) -> Matrix:
    if not a:
        return [[one if i == j else zero for j in range(ncols)] for i in range(ncols)]
    r, piv = rref_field(a)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, c in zip(r, piv):
            v[c] = -row[f]
        basis.append(v)
    return basis
