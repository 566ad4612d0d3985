"""Matrices over Q[x] and rational-function matrices with a common denominator.

The reduction routines work by Euclid-style row operations: the entry of
least degree in a column becomes the pivot and the other rows are reduced
modulo it until only the gcd survives.  Every transform is tracked together
with its inverse, so identities can be re-verified exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import Polynomial, poly_gcd, to_rational
from .errors import Defect, InputError, RankError, SingularityError, UnimodularityError

_ZERO = Polynomial.zero()
_ONE = Polynomial.one()


class PolyMatrix:
    """Dense immutable matrix with Polynomial entries (row-major)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable], rows: int | None = None, cols: int | None = None):
        grid = tuple(tuple(Polynomial.coerce(e) for e in row) for row in entries)
        self.rows = len(grid) if rows is None else rows
        self.cols = (len(grid[0]) if grid else 0) if cols is None else cols
        if len(grid) != self.rows or any(len(r) != self.cols for r in grid):
            raise InputError("ragged polynomial matrix")
        self.entries: tuple[tuple[Polynomial, ...], ...] = grid

    @classmethod
    def _raw(cls, grid: list[list[Polynomial]], rows: int, cols: int) -> "PolyMatrix":
        obj = cls.__new__(cls)
        obj.rows, obj.cols = rows, cols
        obj.entries = tuple(tuple(r) for r in grid)
        return obj

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls._raw([[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PolyMatrix":
        return cls._raw([[_ZERO] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def diagonal(cls, diag: Sequence) -> "PolyMatrix":
        n = len(diag)
        return cls._raw([[Polynomial.coerce(diag[i]) if i == j else _ZERO for j in range(n)]
                         for i in range(n)], n, n)

    def __getitem__(self, idx: tuple[int, int]) -> Polynomial:
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Polynomial, ...]:
        return self.entries[i]

    def col(self, j: int) -> tuple[Polynomial, ...]:
        return tuple(r[j] for r in self.entries)

    def to_lists(self) -> list[list[Polynomial]]:
        return [list(r) for r in self.entries]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self.entries)
        return f"PolyMatrix({self.rows}x{self.cols}: {body})"

    def max_degree(self) -> float | int:
        """Largest entry degree (``-inf`` for the zero matrix)."""
        return max((e.degree for r in self.entries for e in r), default=-math.inf)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix._raw([list(self.col(j)) for j in range(self.cols)], self.cols, self.rows)

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        _same_shape(self, other)
        return PolyMatrix._raw([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
                               self.rows, self.cols)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        _same_shape(self, other)
        return PolyMatrix._raw([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
                               self.rows, self.cols)

    def __neg__(self) -> "PolyMatrix":
        return self.scale(-1)

    def scale(self, c) -> "PolyMatrix":
        c = Polynomial.coerce(c)
        return PolyMatrix._raw([[e * c for e in r] for r in self.entries], self.rows, self.cols)

    def __mul__(self, other) -> "PolyMatrix":
        if isinstance(other, PolyMatrix):
            if self.cols != other.rows:
                raise InputError(f"shape mismatch {self.rows}x{self.cols} * {other.rows}x{other.cols}")
            out = []
            for r in self.entries:
                new_row = []
                for j in range(other.cols):
                    acc = _ZERO
                    for t, a in enumerate(r):
                        if a:
                            b = other.entries[t][j]
                            if b:
                                acc = acc + a * b
                    new_row.append(acc)
                out.append(new_row)
            return PolyMatrix._raw(out, self.rows, other.cols)
        if isinstance(other, (int, Fraction, Polynomial)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other) -> "PolyMatrix":
        if isinstance(other, (int, Fraction, Polynomial)):
            return self.scale(other)
        return NotImplemented

    def substitute_power(self, k: int) -> "PolyMatrix":
        return PolyMatrix._raw([[e.substitute_power(k) for e in r] for r in self.entries], self.rows, self.cols)

    def derivative(self) -> "PolyMatrix":
        return PolyMatrix._raw([[e.derivative() for e in r] for r in self.entries], self.rows, self.cols)

    def evaluate(self, t) -> list[list[Fraction]]:
        t = to_rational(t)
        return [[e(t) for e in r] for r in self.entries]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix._raw([[self.entries[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def hstack(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.rows != other.rows:
            raise InputError("hstack needs equal row counts")
        return PolyMatrix._raw([list(a) + list(b) for a, b in zip(self.entries, other.entries)],
                               self.rows, self.cols + other.cols)

    def vstack(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.cols:
            raise InputError("vstack needs equal column counts")
        return PolyMatrix._raw([list(r) for r in self.entries + other.entries], self.rows + other.rows, self.cols)

    def to_strings(self) -> list[list[list[str]]]:
        return [[e.to_strings() for e in r] for r in self.entries]

    def rank(self) -> int:
        return rank(self)


def _same_shape(a: PolyMatrix, b: PolyMatrix) -> None:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise InputError("shape mismatch")


def as_polymatrix(value) -> PolyMatrix:
    return value if isinstance(value, PolyMatrix) else PolyMatrix(value)


# ---------------------------------------------------------------------------
# fraction-free elimination


def _bareiss(grid: list[list[Polynomial]], nrows: int, ncols: int) -> tuple[int, int, Polynomial]:
    """Fraction-free elimination in place.  Returns (rank, sign, last pivot)."""
    sign = 1
    prev = _ONE
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if grid[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            grid[r], grid[piv] = grid[piv], grid[r]
            sign = -sign
        p = grid[r][c]
        for i in range(r + 1, nrows):
            lead = grid[i][c]
            for j in range(c + 1, ncols):
                num = grid[i][j] * p - lead * grid[r][j]
                grid[i][j] = num.exact_div(prev) if not prev == _ONE else num
            grid[i][c] = _ZERO
        prev = p
        r += 1
    return r, sign, prev


def determinant(m: PolyMatrix) -> Polynomial:
    """Exact determinant by Bareiss fraction-free elimination."""
    if m.rows != m.cols:
        raise InputError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return _ONE
    grid = m.to_lists()
    rk, sign, _ = _bareiss(grid, n, n)
    if rk < n:
        return _ZERO
    return grid[n - 1][n - 1].scale(sign)


def _rank_at_point(m: PolyMatrix, t: Fraction) -> int:
    grid = m.evaluate(t)
    rows, cols = m.rows, m.cols
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if grid[i][c] != 0), None)
        if piv is None:
            continue
        grid[r], grid[piv] = grid[piv], grid[r]
        for i in range(r + 1, rows):
            f = grid[i][c] / grid[r][c]
            if f:
                for j in range(c, cols):
                    grid[i][j] -= f * grid[r][j]
        r += 1
        if r == rows:
            break
    return r


def rank(m: PolyMatrix) -> int:
    """Rank over Q(x).

    Full rank at a rational sample point proves full rank; otherwise the
    fraction-free elimination decides.
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    full = min(m.rows, m.cols)
    if _rank_at_point(m, Fraction(7, 13)) == full:
        return full
    grid = m.to_lists()
    rk, _, _ = _bareiss(grid, m.rows, m.cols)
    return rk


# ---------------------------------------------------------------------------
# rational-function matrices


class RatMatrix:
    """Matrix numerator / denominator with a common polynomial denominator."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: PolyMatrix, denominator=1):
        den = Polynomial.coerce(denominator)
        if den.is_zero():
            raise InputError("RatMatrix denominator must be nonzero")
        self.numerator = as_polymatrix(numerator)
        self.denominator = den

    @property
    def rows(self) -> int:
        return self.numerator.rows

    @property
    def cols(self) -> int:
        return self.numerator.cols

    def __repr__(self) -> str:
        return f"RatMatrix({self.numerator!r} / ({self.denominator}))"

    def entry(self, i: int, j: int) -> tuple[Polynomial, Polynomial]:
        return self.numerator[i, j], self.denominator

    def equals(self, other: "RatMatrix") -> bool:
        """Equality as rational-function matrices (cross-multiplied)."""
        return self.numerator * other.denominator == other.numerator * self.denominator

    def reduce(self) -> "RatMatrix":
        """Cancel the gcd of all numerator entries with the denominator."""
        g = self.denominator
        for r in self.numerator.entries:
            for e in r:
                g = poly_gcd(g, e)
                if g.is_constant():
                    break
        if g.is_constant():
            g = _ONE
        num = PolyMatrix._raw([[e.exact_div(g) for e in r] for r in self.numerator.entries], self.rows, self.cols)
        den = self.denominator.exact_div(g)
        lead = den.leading
        return RatMatrix(num.scale(1 / lead), den.scale(1 / lead))

    def integer_normalized(self) -> "RatMatrix":
        """Same matrix with integer coefficients, joint content 1 and a
        positive denominator constant term (or lead if it vanishes at 0)."""
        polys = [e for r in self.numerator.entries for e in r] + [self.denominator]
        den_l = 1
        for p in polys:
            for c in p.coeffs:
                den_l = den_l * c.denominator // math.gcd(den_l, c.denominator)
        g = 0
        for p in polys:
            for c in p.coeffs:
                g = math.gcd(g, int(c * den_l))
        scale = Fraction(den_l, g)
        ref = self.denominator[0] if self.denominator[0] != 0 else self.denominator.leading
        if ref < 0:
            scale = -scale
        return RatMatrix(self.numerator.scale(scale), self.denominator.scale(scale))

    def scale_rows(self, factors: Sequence) -> "RatMatrix":
        return RatMatrix(PolyMatrix._raw([[e * Polynomial.coerce(f) for e in r]
                                          for r, f in zip(self.numerator.entries, factors)],
                                         self.rows, self.cols), self.denominator)

    def __mul__(self, other) -> "RatMatrix":
        if isinstance(other, RatMatrix):
            return RatMatrix(self.numerator * other.numerator, self.denominator * other.denominator)
        if isinstance(other, PolyMatrix):
            return RatMatrix(self.numerator * other, self.denominator)
        return NotImplemented

    def __rmul__(self, other) -> "RatMatrix":
        if isinstance(other, PolyMatrix):
            return RatMatrix(other * self.numerator, self.denominator)
        return NotImplemented

    def substitute_power(self, k: int) -> "RatMatrix":
        return RatMatrix(self.numerator.substitute_power(k), self.denominator.substitute_power(k))

    def evaluate(self, t) -> list[list[Fraction]]:
        t = to_rational(t)
        den = self.denominator(t)
        if den == 0:
            raise SingularityError(f"denominator vanishes at {t}")
        return [[v / den for v in r] for r in self.numerator.evaluate(t)]

    def max_degree(self) -> int:
        return int(max(self.numerator.max_degree(), self.denominator.degree, 0))

    def to_polymatrix(self) -> PolyMatrix:
        """Exact conversion when the denominator divides every entry."""
        return PolyMatrix._raw([[e.exact_div(self.denominator) for e in r] for r in self.numerator.entries],
                               self.rows, self.cols)


def adjugate(m: PolyMatrix) -> PolyMatrix:
    if m.rows != m.cols:
        raise InputError("adjugate of a non-square matrix")
    n = m.rows
    if n == 1:
        return PolyMatrix.identity(1)
    out = [[_ZERO] * n for _ in range(n)]
    idx = list(range(n))
    for i in range(n):
        for j in range(n):
            minor = m.submatrix([r for r in idx if r != j], [c for c in idx if c != i])
            cof = determinant(minor)
            out[i][j] = cof if (i + j) % 2 == 0 else -cof
    return PolyMatrix._raw(out, n, n)


def adjugate_inverse(m: PolyMatrix) -> RatMatrix:
    """Inverse as adjugate / determinant (not reduced)."""
    det = determinant(m)
    if det.is_zero():
        raise SingularityError("matrix is singular")
    return RatMatrix(adjugate(m), det)


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class RowTransform:
    """Square polynomial matrix with constant nonzero determinant, plus its inverse."""

    matrix: PolyMatrix
    inverse: PolyMatrix

    def determinant(self) -> Fraction:
        det = determinant(self.matrix)
        if not det.is_constant() or det.is_zero():
            raise Defect("transform determinant is not a nonzero constant")
        return det[0]

    def check(self) -> bool:
        n = self.matrix.rows
        return self.matrix * self.inverse == PolyMatrix.identity(n)


class _Tracker:
    """Elementary row operations applied to a working grid, recorded as
    T (left multiplier) and its inverse."""

    def __init__(self, grid: list[list[Polynomial]], n: int):
        self.grid = grid
        self.n = n
        self.t = [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]
        self.tinv = [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]

    def swap(self, i: int, j: int) -> None:
        if i == j:
            return
        self.grid[i], self.grid[j] = self.grid[j], self.grid[i]
        self.t[i], self.t[j] = self.t[j], self.t[i]
        for r in self.tinv:
            r[i], r[j] = r[j], r[i]

    def add_multiple(self, target: int, source: int, q: Polynomial) -> None:
        """row[target] -= q * row[source]."""
        if q.is_zero():
            return
        self.grid[target] = [a - q * b for a, b in zip(self.grid[target], self.grid[source])]
        self.t[target] = [a - q * b for a, b in zip(self.t[target], self.t[source])]
        for r in self.tinv:
            r[source] = r[source] + q * r[target]

    def scale(self, i: int, c: Fraction) -> None:
        self.grid[i] = [e.scale(c) for e in self.grid[i]]
        self.t[i] = [e.scale(c) for e in self.t[i]]
        inv = 1 / c
        for r in self.tinv:
            r[i] = r[i].scale(inv)

    def transform(self) -> RowTransform:
        return RowTransform(PolyMatrix._raw(self.t, self.n, self.n), PolyMatrix._raw(self.tinv, self.n, self.n))


def _euclid_column(tr: _Tracker, active: list[int], col: int) -> int | None:
    """Reduce column ``col`` over the rows ``active`` to a single monic gcd.

    Returns the row holding the gcd (moved to ``active[0]``) or None when
    the column vanishes on those rows.  Pivot: least degree, then lowest row.
    """
    grid = tr.grid
    top = active[0]
    while True:
        live = [i for i in active if grid[i][col]]
        if not live:
            return None
        piv = min(live, key=lambda i: (grid[i][col].deg(), i))
        tr.swap(top, piv)
        p = grid[top][col]
        others = [i for i in active[1:] if grid[i][col]]
        if not others:
            lead = p.leading
            if lead != 1:
                tr.scale(top, 1 / lead)
            return top
        for i in others:
            q = grid[i][col] // p
            tr.add_multiple(i, top, q)


def reduce_first_column(m: PolyMatrix) -> tuple[Polynomial, PolyMatrix, RowTransform]:
    """Row-reduce so the first column becomes (a, 0, ..., 0) with a its monic gcd.

    Returns (a, rest, t) where t.matrix * m = [[a, *], [0, rest]].
    """
    grid = m.to_lists()
    tr = _Tracker(grid, m.rows)
    if m.rows == 0 or m.cols == 0:
        return _ZERO, PolyMatrix.zeros(max(m.rows - 1, 0), max(m.cols - 1, 0)), tr.transform()
    _euclid_column(tr, list(range(m.rows)), 0)
    a = grid[0][0]
    rest = PolyMatrix._raw([r[1:] for r in grid[1:]], m.rows - 1, m.cols - 1)
    h = max(int(m.max_degree()), 0) if not m.is_zero() else 0
    assert a.is_zero() or a.deg() <= h, "gcd degree exceeds the column degree"
    assert rest.is_zero() or rest.max_degree() <= 2 * h, "reduced block exceeds degree 2H"
    return a, rest, tr.transform()


def left_kernel_basis(m: PolyMatrix) -> list[PolyMatrix]:
    """Q[x]-module basis of {v : v*m = 0}, as 1 x rows matrices."""
    nrows, ncols = m.rows, m.cols
    aug = [list(r) + [_ONE if i == j else _ZERO for j in range(nrows)] for i, r in enumerate(m.to_lists())]
    tr = _Tracker(aug, nrows)
    active = list(range(nrows))
    rk = 0
    for c in range(ncols):
        if not active:
            break
        if _euclid_column(tr, active, c) is not None:
            active = active[1:]
            rk += 1
    basis = [PolyMatrix._raw([aug[i][ncols:]], 1, nrows) for i in active]
    h = max(int(m.max_degree()), 0) if not m.is_zero() else 0
    for v in basis:
        assert v.max_degree() <= (2 ** rk) * h, "kernel vector exceeds the 2^rank H degree bound"
    return basis


def right_kernel_basis(m: PolyMatrix) -> list[PolyMatrix]:
    """Column vectors (cols x 1) spanning {w : m*w = 0} as a Q[x]-module."""
    return [v.transpose() for v in left_kernel_basis(m.transpose())]


def triangularize(basis_rows: PolyMatrix) -> tuple[PolyMatrix, RowTransform]:
    """Column transform g with basis_rows * g lower triangular (monic diagonal).

    Raises RankError (with a left-kernel certificate) for dependent rows.
    """
    m, d = basis_rows.rows, basis_rows.cols
    if m > d:
        raise InputError("more rows than columns")
    work = basis_rows.transpose().to_lists()
    tr = _Tracker(work, d)
    for s in range(m):
        if _euclid_column(tr, list(range(s, d)), s) is None:
            cert = left_kernel_basis(basis_rows)
            raise RankError("rows are linearly dependent over Q(x)", certificate=cert[0] if cert else None)
    t = tr.transform()
    g = RowTransform(t.matrix.transpose(), t.inverse.transpose())
    lower = PolyMatrix._raw(work, d, m).transpose()
    h = max(int(basis_rows.max_degree()), 0)
    assert g.matrix.max_degree() <= (m + 1) * h * 2 ** m, "transform exceeds (m+1)H2^m"
    assert g.inverse.max_degree() <= (2 * m + 1) * h * 2 ** m, "inverse exceeds (2m+1)H2^m"
    return lower, g


def _unitriangular_inverse(lower: PolyMatrix) -> PolyMatrix:
    n = lower.rows
    inv = [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            acc = _ZERO
            for t in range(j, i):
                acc = acc + lower[i, t] * inv[t][j]
            inv[i][j] = -acc
    return PolyMatrix._raw(inv, n, n)


def _block_diag(a: PolyMatrix, n: int) -> PolyMatrix:
    size = a.rows + n
    grid = [[_ZERO] * size for _ in range(size)]
    for i in range(a.rows):
        for j in range(a.cols):
            grid[i][j] = a[i, j]
    for i in range(a.rows, size):
        grid[i][i] = _ONE
    return PolyMatrix._raw(grid, size, size)


def unimodular_complete(t: PolyMatrix) -> RowTransform:
    """U with t * U = [I | 0] for a unimodular m x d matrix t."""
    m, d = t.rows, t.cols
    try:
        lower, g = triangularize(t)
    except RankError as exc:
        raise UnimodularityError("rows are dependent, so the matrix is not unimodular") from exc
    for i in range(m):
        if not lower[i, i] == _ONE:
            raise UnimodularityError(f"non-unit diagonal gcd {lower[i, i]} at row {i}", gcd=lower[i, i])
    square = lower.submatrix(range(m), range(m))
    linv = _unitriangular_inverse(square)
    u = g.matrix * _block_diag(linv, d - m)
    u_inv = _block_diag(square, d - m) * g.inverse
    h = max(int(t.max_degree()), 0)
    assert u.max_degree() <= (m + 1) * h * 2 ** m, "completion exceeds (m+1)H2^m"
    assert u_inv.max_degree() <= (2 * m + 1) * h * 2 ** m, "completion inverse exceeds (2m+1)H2^m"
    return RowTransform(u, u_inv)


def is_unimodular(t: PolyMatrix) -> bool:
    try:
        lower, _ = triangularize(t)
    except RankError:
        return False
    return all(lower[i, i] == _ONE for i in range(t.rows))
