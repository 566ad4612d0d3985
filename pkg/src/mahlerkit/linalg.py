"""Dense linear algebra over Q with Fraction entries."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def rref(rows: Sequence[Sequence[Fraction]], width: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns (zero rows dropped)."""
    m = [list(r) for r in rows]
    if width is None:
        width = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(width):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        pivot_row = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], pivot_row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], width: int) -> list[list[Fraction]]:
    """Basis of {v : rows * v = 0}, one vector per free column."""
    red, pivots = rref(rows, width)
    pivot_set = set(pivots)
    basis = []
    for fc in range(width):
        if fc in pivot_set:
            continue
        v = [Fraction(0)] * width
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][fc]
        basis.append(v)
    return basis


def rank(rows: Sequence[Sequence[Fraction]], width: int | None = None) -> int:
    return len(rref(rows, width)[1])


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """One solution of rows * v = rhs (free variables set to 0), or None."""
    width = len(rows[0]) if rows else 0
    aug = [list(r) + [Fraction(b)] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, width + 1)
    if pivots and pivots[-1] == width:
        return None
    v = [Fraction(0)] * width
    for i, pc in enumerate(pivots):
        v[pc] = red[i][width]
    return v


def mat_mul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    return [[sum((x * b[t][j] for t, x in enumerate(row) if x), Fraction(0)) for j in range(len(b[0]))]
            for row in a]


def vec_mat(v: Sequence[Fraction], m: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    cols = len(m[0]) if m else 0
    return [sum((x * m[t][j] for t, x in enumerate(v) if x), Fraction(0)) for j in range(cols)]


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v) if x), Fraction(0)) for row in m]
