"""Dense linear algebra over either scalar backend.

Matrices are lists of row lists.  Exact elimination pivots on the first
nonzero entry; approximate elimination pivots on the largest entry and
treats anything below ``tol * max(1, scale)`` as zero, where ``scale`` is
the largest magnitude in the input matrix.
"""

from __future__ import annotations

from .errors import BispectralError


def _matrix_scale(rows, field):
    s = 0.0
    for row in rows:
        for v in row:
            a = field.abs(v)
            if a > s:
                s = a
    return max(1.0, s)


def _is_zero(v, field, scale):
    if field.exact:
        return not v
    return field.abs(v) <= field.tol * scale


def rref(rows, field):
    """Reduced row echelon form.  Returns ``(new_rows, pivot_columns)``."""
    rows = [list(r) for r in rows]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    scale = None if field.exact else _matrix_scale(rows, field)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= len(rows):
            break
        if field.exact:
            pick = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        else:
            pick = max(range(r, len(rows)), key=lambda i: field.abs(rows[i][c]))
            if field.abs(rows[pick][c]) <= field.tol * scale:
                pick = None
        if pick is None:
            continue
        rows[r], rows[pick] = rows[pick], rows[r]
        inv = field.one / rows[r][c]
        rows[r] = [inv * v for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not _is_zero(rows[i][c], field, scale or 1.0):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(rows, field):
    return len(rref(rows, field)[1])


def pivot_orders(rows, field):
    """Pivot column indices of the row space, scanning columns left to right.

    Same as the pivot list of :func:`rref` but without back-substitution;
    used where only the column positions matter (exponent sequences).
    """
    return rref(rows, field)[1]


def nullspace(rows, field):
    """Basis of the right kernel of the matrix (list of vectors)."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows, field)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [field.zero] * ncols
        vec[fc] = field.one
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        basis.append(vec)
    return basis


def solve(a_rows, b, field):
    """Solve ``A x = b``; returns one solution or None if inconsistent."""
    if not a_rows:
        return [] if all(not v for v in b) else None
    ncols = len(a_rows[0])
    aug = [list(row) + [bv] for row, bv in zip(a_rows, b)]
    red, pivots = rref(aug, field)
    scale = None if field.exact else _matrix_scale(aug, field)
    if ncols in pivots:
        return None
    x = [field.zero] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][ncols]
    # verify when approximate: rref may have discarded a tiny inconsistency
    if not field.exact:
        for row, bv in zip(a_rows, b):
            s = sum((rv * xv for rv, xv in zip(row, x)), field.zero)
            if field.abs(s - bv) > 1e3 * field.tol * (scale or 1.0):
                return None
    return x


def mat_mul(a, b, field):
    n, k = len(a), len(b)
    if n and len(a[0]) != k:
        raise BispectralError("matrix shape mismatch")
    m = len(b[0]) if k else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = field.zero
            for t in range(k):
                s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def commutator(a, b, field):
    return mat_sub(mat_mul(a, b, field), mat_mul(b, a, field))


def mat_is_zero(a, field, scale=1.0):
    return all(_is_zero(v, field, scale) for row in a for v in row)


def identity(n, field):
    return [
        [field.one if i == j else field.zero for j in range(n)] for i in range(n)
    ]
