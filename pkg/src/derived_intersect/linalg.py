"""Dense exact linear algebra over Q (Fractions) or F_p (ints)."""

from __future__ import annotations

from fractions import Fraction


def _norm(x, p):
    return x % p if p else Fraction(x)


def rref(rows, p=0):
    """Reduced row echelon form.  Returns ``(matrix, pivot_columns)``."""
    m = [[_norm(x, p) for x in row] for row in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p) if p else 1 / m[r][c]
        m[r] = [_norm(x * inv, p) for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [_norm(a - f * b, p) for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows, p=0) -> int:
    if not rows or not rows[0]:
        return 0
    return len(rref(rows, p)[1])


def nullspace(rows, ncols: int, p=0):
    """Basis of ``{v : rows * v = 0}`` as a list of vectors."""
    if not rows:
        return [[_norm(int(i == j), p) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [_norm(0, p)] * ncols
        v[f] = _norm(1, p)
        for r, pc in enumerate(pivots):
            v[pc] = _norm(-red[r][f], p)
        basis.append(v)
    return basis


def solve(rows, rhs, p=0):
    """Solve ``rows * x = rhs``.

    Returns ``(x, None)`` for a particular solution, or ``(None, y)`` where
    ``y`` is a left certificate: ``y * rows = 0`` and ``y * rhs = 1``.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    aug = [list(rows[i]) + [rhs[i]] + [int(i == j) for j in range(nrows)] for i in range(nrows)]
    red, pivots = rref(aug, p)
    for r, pc in enumerate(pivots):
        if pc == ncols:
            y = red[r][ncols + 1:]
            return None, y
        if pc > ncols:
            break
    x = [_norm(0, p)] * ncols
    for r, pc in enumerate(pivots):
        if pc < ncols:
            x[pc] = red[r][ncols]
    return x, None
