"""Exact dense linear algebra over :class:`~hfkit.scalars.Scalar` entries.

Matrices are lists of rows.  Ranks use fraction-free (Bareiss) elimination;
reduced echelon forms, kernels and solves use Gauss-Jordan with exact
division.  Zero tests are decided by the canonical scalar normal form.
"""

from __future__ import annotations

from typing import Sequence

from .scalars import ONE, ZERO, Scalar, ScalarError

Matrix = list  # list[list[Scalar]]


def _invertible(x: Scalar) -> bool:
    return bool(x) and len(x.terms) == 1


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence[Scalar]]) -> Matrix:
    return [list(r) for r in zip(*m)] if m else []


def matmul(a: Sequence[Sequence[Scalar]], b: Sequence[Sequence[Scalar]]) -> Matrix:
    bt = transpose(b)
    out = []
    for row in a:
        out_row = []
        for col in bt:
            s = ZERO
            for x, y in zip(row, col):
                if x and y:
                    s = s + x * y
            out_row.append(s)
        out.append(out_row)
    return out


def matvec(a: Sequence[Sequence[Scalar]], v: Sequence[Scalar]) -> list[Scalar]:
    out = []
    for row in a:
        s = ZERO
        for x, y in zip(row, v):
            if x and y:
                s = s + x * y
        out.append(s)
    return out


def is_zero_matrix(m: Sequence[Sequence[Scalar]]) -> bool:
    return all(not x for row in m for x in row)


def scale(m: Sequence[Sequence[Scalar]], s) -> Matrix:
    return [[x * s for x in row] for row in m]


def sub(a, b) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def bareiss(m: Sequence[Sequence[Scalar]]) -> tuple[int, Scalar]:
    """Rank and (for square input) determinant by fraction-free elimination.

    Every division is exact: the divisor is the previous pivot.
    """
    a = [list(r) for r in m]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    prev = ONE
    rank = 0
    sign = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = None
        for r in range(rank, nrows):
            if a[r][col]:
                if piv is None or (_invertible(a[r][col]) and not _invertible(a[piv][col])):
                    piv = r
        if piv is None:
            continue
        if piv != rank:
            a[rank], a[piv] = a[piv], a[rank]
            sign = -sign
        p = a[rank][col]
        for r in range(rank + 1, nrows):
            arc = a[r][col]
            for c in range(col + 1, ncols):
                v = p * a[r][c] - arc * a[rank][c]
                a[r][c] = v / prev if v else ZERO
            a[r][col] = ZERO
        prev = p
        rank += 1
    det = ZERO
    if nrows == ncols and rank == nrows:
        det = a[-1][-1] if sign > 0 else -a[-1][-1]
    return rank, det


def berkowitz_det(m: Sequence[Sequence[Scalar]]) -> Scalar:
    """Division-free determinant (Berkowitz); works over any commutative ring."""
    n = len(m)
    if n == 0:
        return ONE
    # characteristic polynomial coefficients, built on leading principal blocks
    poly = [ONE, -m[0][0]]
    for k in range(1, n):
        row = m[k][:k]
        col = [m[i][k] for i in range(k)]
        a_kk = m[k][k]
        block = [r[:k] for r in m[:k]]
        # Toeplitz column: 1, -a_kk, -R C, -R A C, -R A^2 C, ...
        t = [ONE, -a_kk]
        vec = col
        for _ in range(k):
            s = ZERO
            for x, y in zip(row, vec):
                if x and y:
                    s = s + x * y
            t.append(-s)
            vec = matvec(block, vec)
        new = []
        for i in range(k + 2):
            s = ZERO
            for j in range(min(i, k) + 1):
                if i - j < len(t) and poly[j] and t[i - j]:
                    s = s + t[i - j] * poly[j]
            new.append(s)
        poly = new
    det = poly[n]
    return det if n % 2 == 0 else -det


def det(m: Sequence[Sequence[Scalar]]) -> Scalar:
    n = len(m)
    if n == 0:
        return ONE
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        a, b, c = m
        return (
            a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0])
        )
    if any(x.has_exponentials() for row in m for x in row):
        return berkowitz_det(m)
    return bareiss(m)[1]


def rank(m: Sequence[Sequence[Scalar]]) -> int:
    if not m or not m[0]:
        return 0
    if any(x.has_exponentials() for row in m for x in row):
        # exact rank over the exponential ring: Gram determinant criterion per subset
        # is too costly; Bareiss still works when pivots stay invertible.
        try:
            return bareiss(m)[0]
        except ScalarError:
            return rank_by_gram(m)
    return bareiss(m)[0]


def rank_by_gram(m: Sequence[Sequence[Scalar]]) -> int:
    """Column rank via the largest nonsingular leading Gram block (real entries)."""
    mt = transpose(m)
    gram = matmul(mt, m)
    chosen: list[int] = []
    for j in range(len(gram)):
        trial = chosen + [j]
        sub_g = [[gram[a][b] for b in trial] for a in trial]
        if berkowitz_det(sub_g):
            chosen = trial
    return len(chosen)


def rref(m: Sequence[Sequence[Scalar]], col_order: Sequence[int] | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form.  ``col_order`` permutes pivot search order."""
    a = [list(r) for r in m]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    order = list(col_order) if col_order is not None else list(range(ncols))
    pivots: list[int] = []
    r = 0
    for col in order:
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][col].inverse()
        a[r] = [x * inv if x else ZERO for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y if y else x for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    return a[:r], pivots


def nullspace(m: Sequence[Sequence[Scalar]], ncols: int | None = None) -> list[list[Scalar]]:
    """Basis of ``{x : m x = 0}``, one vector per free column."""
    if ncols is None:
        ncols = len(m[0]) if m else 0
    if not m:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    r, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for row, p in zip(r, pivots):
            if row[f]:
                v[p] = -row[f]
        basis.append(v)
    return basis


def solve(m: Sequence[Sequence[Scalar]], b: Sequence[Scalar]) -> list[Scalar] | None:
    """One solution of ``m x = b`` (free variables zero), or ``None``."""
    ncols = len(m[0]) if m else 0
    aug = [list(row) + [rhs] for row, rhs in zip(m, b)]
    r, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [ZERO] * ncols
    for row, p in zip(r, pivots):
        x[p] = row[ncols]
    return x


def inverse(m: Sequence[Sequence[Scalar]]) -> Matrix:
    n = len(m)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(m)]
    r, pivots = rref(aug, col_order=range(n))
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in r]


def span_rank(vectors: Sequence[Sequence[Scalar]]) -> int:
    return rank(list(vectors)) if vectors else 0
