"""k-regular sequences: from a linear representation to a reduced Mahler system.

Pipeline:

1. ``kernel_basis``: a basis f_1 = f, ..., f_L of the span of the k-kernel,
   with f_i(kn + j) expanded in that basis.
2. ``build_recurrence_matrix``: F(x) = A(x) F(x^k), deg A <= k - 1.
3. ``syzygy_basis``: the module W of polynomial relations w(x).F(x) = 0.
4. ``reduce_to_independent``: a unimodular change of basis killing W,
   leaving an S-dimensional system with independent coordinates.
5. ``regular_to_convergents``: integer convergents for F(a/b).

Digit convention: term(n) = u M_{d_1} ... M_{d_r} v with d_1 the most
significant base-k digit of n; ``from_lsd_first`` converts the other one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import GrowthBound, Polynomial, RealInterval, TruncatedSeries, eval_series_real, to_rational
from .errors import BudgetError, Defect, HypothesisError, InputError
from .linalg import mat_vec, nullspace, rank as q_rank, rref, solve, vec_mat
from .mahler import MahlerSystem
from .polymat import (
    PolyMatrix,
    RatMatrix,
    RowTransform,
    determinant,
    is_unimodular,
    left_kernel_basis,
    rank as poly_rank,
    right_kernel_basis,
    unimodular_complete,
)

_ZERO = Polynomial.zero()
_ONE = Polynomial.one()

Matrix = tuple[tuple[Fraction, ...], ...]


def _as_matrix(rows) -> Matrix:
    return tuple(tuple(to_rational(v) for v in r) for r in rows)


def _digits_msd(n: int, k: int) -> list[int]:
    out = []
    while n:
        n, r = divmod(n, k)
        out.append(r)
    return out[::-1]


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class LinearRepresentation:
    """term(n) = u M_{d_1} ... M_{d_r} v, digits most significant first."""

    k: int
    u: tuple[Fraction, ...]
    M: tuple[Matrix, ...]
    v: tuple[Fraction, ...]
    check_terms: tuple[Fraction, ...] = ()
    empirical: bool = False

    def __post_init__(self):
        u = tuple(to_rational(x) for x in self.u)
        v = tuple(to_rational(x) for x in self.v)
        M = tuple(_as_matrix(m) for m in self.M)
        L = len(u)
        if self.k < 2 or len(M) != self.k:
            raise InputError("need k >= 2 and one matrix per digit")
        if len(v) != L or any(len(m) != L or any(len(r) != L for r in m) for m in M):
            raise InputError("representation dimensions disagree")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "check_terms", tuple(to_rational(x) for x in self.check_terms))
        if list(vec_mat(u, M[0])) != list(u):
            raise InputError("u M_0 != u: leading zero digits would change the terms")
        for n, want in enumerate(self.check_terms):
            if self.term(n) != want:
                raise InputError(f"term({n}) = {self.term(n)} disagrees with check_terms ({want})")

    @property
    def dim(self) -> int:
        return len(self.u)

    def left_state(self, n: int) -> list[Fraction]:
        row = list(self.u)
        for dgt in _digits_msd(n, self.k):
            row = vec_mat(row, self.M[dgt])
        return row

    def term(self, n: int, w: Sequence[Fraction] | None = None) -> Fraction:
        w = self.v if w is None else w
        return sum((a * b for a, b in zip(self.left_state(n), w)), Fraction(0))

    def terms(self, count: int, w: Sequence[Fraction] | None = None) -> list[Fraction]:
        """term(0..count-1) using the digit recursion on left states."""
        w = list(self.v if w is None else w)
        states = [list(self.u)]
        out = [sum((a * b for a, b in zip(states[0], w)), Fraction(0))]
        for n in range(1, count):
            q, r = divmod(n, self.k)
            st = vec_mat(states[q], self.M[r]) if q else vec_mat(self.u, self.M[r])
            states.append(st)
            out.append(sum((a * b for a, b in zip(st, w)), Fraction(0)))
        return out

    def series(self, n: int) -> TruncatedSeries:
        return TruncatedSeries._raw(self.terms(n + 1), n)

    def growth_bound(self, w: Sequence[Fraction] | None = None) -> GrowthBound:
        """|term(n)| <= c max(n,1)^r with c = |u|_1 |w|_inf max(mu,1),
        mu the largest row-sum norm of the M_j and r least with k^r >= mu."""
        w = self.v if w is None else w
        mu = max(max(sum(abs(x) for x in row) for row in m) for m in self.M)
        r = 0
        while self.k ** r < mu:
            r += 1
        c = sum(abs(x) for x in self.u) * max((abs(x) for x in w), default=Fraction(0)) * max(mu, Fraction(1))
        return GrowthBound(max(c, Fraction(1)), r, Fraction(1), True, "derived from the representation norms")

    def to_dict(self) -> dict:
        s = lambda q: f"{q.numerator}/{q.denominator}"  # noqa: E731
        out = {"k": self.k, "dim": self.dim, "u": [s(x) for x in self.u], "v": [s(x) for x in self.v],
               "M": [[[s(x) for x in r] for r in m] for m in self.M]}
        if self.check_terms:
            out["check_terms"] = [s(x) for x in self.check_terms]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LinearRepresentation":
        rep = cls(int(data["k"]), tuple(data["u"]), tuple(tuple(tuple(r) for r in m) for m in data["M"]),
                  tuple(data["v"]), tuple(data.get("check_terms", ())))
        if "dim" in data and int(data["dim"]) != rep.dim:
            raise InputError("dim does not match the vector lengths")
        return rep


def from_lsd_first(k: int, u, M, v, check_terms=()) -> LinearRepresentation:
    """Convert term(n) = u M_{d_r} ... M_{d_1} v (least significant digit
    last in the product, i.e. read first) to the MSD-first convention."""
    ut = tuple(v)
    vt = tuple(u)
    Mt = tuple(tuple(tuple(m[j][i] for j in range(len(m))) for i in range(len(m))) for m in M)
    return LinearRepresentation(k, ut, Mt, vt, tuple(check_terms))


# ---------------------------------------------------------------------------
# kernel basis


@dataclass(frozen=True)
class KernelBasis:
    k: int
    L: int
    vectors: tuple[tuple[Fraction, ...], ...]
    expansions: tuple[tuple[tuple[Fraction, ...], ...], ...]
    series: tuple[TruncatedSeries, ...]
    note: str = ""


def _independent_extend(basis: list[list[Fraction]], vec: list[Fraction]) -> bool:
    width = len(vec)
    return q_rank(basis + [vec], width) > len(basis)


def kernel_basis(rep: LinearRepresentation, budget: int = 256) -> KernelBasis:
    """Basis f_{w_1} = f, f_{w_2}, ... of the k-kernel span, f_w(n) = u M_{(n)} w.

    f_w(kn + j) = f_{M_j w}(n), and f_w = f_{w'} exactly when w - w' pairs to
    zero with every reachable left state, so the span is handled through the
    pairing of the forward closure of v against the left closure of u.
    """
    k, dim = rep.k, rep.dim
    left = [list(rep.u)]
    queue = [list(rep.u)]
    while queue:
        row = queue.pop(0)
        for m in rep.M:
            nxt = vec_mat(row, m)
            if _independent_extend(left, nxt):
                left.append(nxt)
                queue.append(nxt)

    def pairing(w: Sequence[Fraction]) -> list[Fraction]:
        return [sum((a * b for a, b in zip(row, w)), Fraction(0)) for row in left]

    chosen: list[list[Fraction]] = []
    pair_rows: list[list[Fraction]] = []
    queue = [list(rep.v)]
    seen_forward: list[list[Fraction]] = []
    while queue:
        w = queue.pop(0)
        if not _independent_extend(seen_forward, w):
            continue
        seen_forward.append(w)
        pw = pairing(w)
        if not chosen or _independent_extend(pair_rows, pw):
            if any(pw) or not chosen:
                chosen.append(w)
                pair_rows.append(pw)
        for m in rep.M:
            queue.append(mat_vec(m, w))
    L = q_rank(pair_rows, len(left)) if any(any(r) for r in pair_rows) else 0
    if L == 0:
        raise InputError("the sequence is identically zero")
    note = "" if L == dim else f"representation of dimension {dim} is not minimal; kernel span has L = {L}"
    # coordinates: f_{M_j w_i} = sum_l c_{ijl} f_{w_l}, solved on pairing vectors
    cols = [[pair_rows[l][r] for l in range(L)] for r in range(len(left))]
    expansions = []
    for w in chosen:
        per_digit = []
        for m in rep.M:
            target = pairing(mat_vec(m, w))
            sol = solve(cols, target)
            if sol is None:
                raise Defect("kernel image not in the span of the chosen basis")
            per_digit.append(tuple(sol))
        expansions.append(tuple(per_digit))
    series = tuple(TruncatedSeries._raw(rep.terms(budget + 1, w), budget) for w in chosen)
    return KernelBasis(k, L, tuple(tuple(w) for w in chosen), tuple(expansions), series, note)


def build_recurrence_matrix(kb: KernelBasis) -> PolyMatrix:
    """A with F_i(x) = sum_l p_{il}(x) F_l(x^k), p_{il} = sum_j c_{ijl} x^j."""
    k, L = kb.k, kb.L
    grid = [[Polynomial([kb.expansions[i][j][l] for j in range(k)]) for l in range(L)] for i in range(L)]
    A = PolyMatrix(grid)
    system = MahlerSystem(k, RatMatrix(A, 1), kb.series, note="kernel recurrence")
    try:
        system.verify()
    except Defect as exc:
        raise Defect(f"kernel expansions inconsistent with the series: {exc}") from exc
    return A


def kernel_system(rep: LinearRepresentation, budget: int = 256) -> tuple[KernelBasis, MahlerSystem]:
    kb = kernel_basis(rep, budget)
    A = build_recurrence_matrix(kb)
    return kb, MahlerSystem(rep.k, RatMatrix(A, 1), kb.series, note="kernel recurrence")


def fit_representation(terms: Sequence, k: int, depth: int = 4, max_dim: int = 8) -> LinearRepresentation:
    """Candidate representation from terms alone (flagged empirical).

    Kernel sections f(k^e n + r), e <= depth, are compared on a common
    window of n; a basis is chosen greedily and each f_i(kn + j) is
    expressed in it by exact linear algebra.
    """
    f = [to_rational(t) for t in terms]
    window = len(f) // k ** (depth + 1)
    if window < 2 * max_dim:
        raise BudgetError("not enough terms for the requested depth", required=2 * max_dim * k ** (depth + 1))

    def section(e: int, r: int, n_count: int) -> list[Fraction]:
        return [f[k ** e * n + r] for n in range(n_count)]

    basis: list[tuple[int, int]] = [(0, 0)]
    vecs = [section(0, 0, window)]
    frontier = [(0, 0)]
    while frontier:
        e, r = frontier.pop(0)
        if e >= depth:
            continue
        for j in range(k):
            cand = (e + 1, r + j * k ** e)
            vec = section(*cand, window)
            if _independent_extend(vecs, vec):
                if len(basis) >= max_dim:
                    raise InputError("kernel span looks larger than max_dim")
                basis.append(cand)
                vecs.append(vec)
                frontier.append(cand)
    L = len(basis)
    cols = [[vecs[l][n] for l in range(L)] for n in range(window)]
    C = [[[Fraction(0)] * L for _ in range(L)] for _ in range(k)]
    half = window // k
    cols_half = [[vecs[l][n] for l in range(L)] for n in range(half)]
    for i, (e, r) in enumerate(basis):
        for j in range(k):
            target = [f[k ** (e + 1) * n + r + j * k ** e] for n in range(half)]
            sol = solve(cols_half, target)
            if sol is None:
                raise InputError("terms are not consistent with a small kernel span")
            for l in range(L):
                C[j][i][l] = sol[l]
    del cols
    s0 = [vecs[l][0] for l in range(L)]
    e1 = [Fraction(1 if i == 0 else 0) for i in range(L)]
    Mt = tuple(tuple(tuple(C[j][c][r] for c in range(L)) for r in range(L)) for j in range(k))
    rep = LinearRepresentation(k, tuple(s0), Mt, tuple(e1))
    object.__setattr__(rep, "empirical", True)
    for n, want in enumerate(f):
        if rep.term(n) != want:
            raise InputError(f"fitted representation disagrees with term {n}")
    return rep


# ---------------------------------------------------------------------------
# syzygies


@dataclass(frozen=True)
class SyzygyResult:
    basis: tuple[PolyMatrix, ...]
    T: PolyMatrix | None
    rank: int
    S: int
    search_bound: int
    degree_needed: int | None
    kernel_relations: int
    certified_order: int
    degree_bound: int

    @property
    def is_zero(self) -> bool:
        return not self.basis


def _relation_space(series: Sequence[TruncatedSeries], D: int, n_eq: int) -> list[list[Fraction]]:
    """Vectors (v_{l,e}) with sum_l sum_e v_{l,e} x^e F_l = 0 through order n_eq.

    Columns are ordered by descending degree e, then by l.
    """
    L = len(series)
    cols = [(l, e) for e in range(D, -1, -1) for l in range(L)]
    rows = []
    for n in range(n_eq + 1):
        rows.append([series[l].coeffs[n - e] if n >= e else Fraction(0) for l, e in cols])
    return nullspace(rows, len(cols))


def _vector_to_row(vec: Sequence[Fraction], L: int, D: int) -> list[Polynomial]:
    coeffs = [[Fraction(0)] * (D + 1) for _ in range(L)]
    pos = 0
    for e in range(D, -1, -1):
        for l in range(L):
            coeffs[l][e] = vec[pos]
            pos += 1
    return [Polynomial(c) for c in coeffs]


def _row_to_vector(row: Sequence[Polynomial], L: int, D: int) -> list[Fraction] | None:
    if any(p.deg() > D for p in row):
        return None
    return [row[l][e] for e in range(D, -1, -1) for l in range(L)]


def _closure_certified(basis_rows: list[list[Polynomial]], A: PolyMatrix, k: int, D: int,
                       series: Sequence[TruncatedSeries]) -> bool:
    """The candidate space is closed under v -> Lambda_j(v A) and every
    candidate has zero constant term against F(0); together these force
    v.F = 0 exactly (a minimal-valuation element would otherwise satisfy
    nu >= k nu)."""
    L = A.rows
    if not basis_rows:
        return True
    vecs = [_row_to_vector(r, L, D) for r in basis_rows]
    red, pivots = rref(vecs, L * (D + 1))
    for row in basis_rows:
        if sum((p[0] * s.coeffs[0] for p, s in zip(row, series)), Fraction(0)) != 0:
            return False
        va = [sum((row[t] * A[t, j] for t in range(L) if row[t] and A[t, j]), _ZERO) for j in range(L)]
        for j in range(k):
            img = [p.cartier(k, j) for p in va]
            vec = _row_to_vector(img, L, D)
            if vec is None:
                return False
            if any(vec) and q_rank(red + [vec], L * (D + 1)) > len(pivots):
                return False
    return True


def syzygy_search_bound(L: int, k: int) -> int:
    """Degree up to which spanning relations exist: 2^L (k^L - 1)."""
    return 2 ** L * (k ** L - 1)


def syzygy_basis(sys: MahlerSystem, search_bound: int | None = None) -> SyzygyResult:
    """Module basis of W = {w in Q[x]^L : w.F = 0} for F = A F(x^k), A polynomial.

    Exact relations come from the left kernel of A(x)A(x^k)...A(x^{k^{L-1}});
    further ones are found by linear algebra on series coefficients up to
    ``search_bound`` and certified by an invariant-subspace argument.  The
    module is then saturated (left kernel of a right kernel).
    """
    if not sys.B.is_constant():
        raise InputError("syzygy_basis needs a polynomial recurrence matrix")
    k, L = sys.k, sys.dim
    A = sys.numerator.scale(1 / sys.B[0])
    D = syzygy_search_bound(L, k) if search_bound is None else search_bound
    big = PolyMatrix.identity(L)
    for i in range(L):
        big = big * A.substitute_power(k ** i)
    kb_rows = [list(v.row(0)) for v in left_kernel_basis(big)]
    n_eq = L * (D + 1) + 16
    while True:
        if n_eq > sys.budget:
            raise BudgetError(f"need {n_eq} series coefficients to certify relations", required=n_eq)
        space = _relation_space(sys.series, D, n_eq)
        rows = [_vector_to_row(v, L, D) for v in space]
        if _closure_certified(rows, A, k, D, sys.series):
            break
        n_eq *= 2
    all_rows = kb_rows + rows
    if all_rows:
        rel = PolyMatrix(all_rows)
        r = poly_rank(rel)
    else:
        rel, r = None, 0
    degree_needed = None
    if rows:
        red, pivots = rref(space, L * (D + 1)) if space else ([], [])
        for deg in range(D + 1):
            low = [v for v, p in zip(red, pivots) if p >= (D - deg) * L]
            low_rows = [_vector_to_row(v, L, D) for v in low] + kb_rows
            if low_rows and poly_rank(PolyMatrix(low_rows)) == r:
                degree_needed = deg
                break
    elif kb_rows:
        degree_needed = int(max(p.deg() for row in kb_rows for p in row))
    S = L - r
    if r == 0:
        return SyzygyResult((), None, 0, S, D, degree_needed, len(kb_rows), n_eq, 0)
    if S == 0:
        basis = [PolyMatrix([[_ONE if i == j else _ZERO for j in range(L)]]) for i in range(L)]
    else:
        kmat_cols = right_kernel_basis(rel)
        kmat = kmat_cols[0]
        for c in kmat_cols[1:]:
            kmat = kmat.hstack(c)
        basis = left_kernel_basis(kmat)
    T = basis[0]
    for b in basis[1:]:
        T = T.vstack(b)
    bound = 2 ** (2 * L - S) * (k ** L - 1)
    for b in basis:
        prod = sum((p * s for p, s in zip(b.row(0), sys.series)), TruncatedSeries._raw([], sys.budget))
        if not prod.is_zero_to_budget():
            raise Defect("saturated basis vector does not annihilate F")
    if not is_unimodular(T):
        raise Defect("stacked syzygy basis is not unimodular")
    return SyzygyResult(tuple(basis), T, r, S, D, degree_needed, len(kb_rows), n_eq, bound)


# ---------------------------------------------------------------------------
# reduction


@dataclass(frozen=True)
class RegularReduction:
    k: int
    L: int
    S: int
    A: PolyMatrix
    series: tuple[TruncatedSeries, ...]
    syzygies: SyzygyResult
    U: RowTransform | None
    Y: PolyMatrix
    C22: RatMatrix
    R: tuple[tuple[Fraction, ...], ...]
    r: tuple[Fraction, ...]
    permutation: tuple[int, ...]
    combination: PolyMatrix
    system: MahlerSystem
    degree_bound: int
    point: Fraction | None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def target_index(self) -> int:
        """Coordinate of the reduced system whose value at the point is F(a/b)."""
        return self.S


def important_bound(L: int, k: int) -> Fraction:
    """1/2 L^2 2^{3L} k^L."""
    return Fraction(L * L * 2 ** (3 * L) * k ** L, 2)


def _inverse_rational(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)):
        raise Defect("combination matrix is singular")
    return [r[n:] for r in red]


def reduce_to_independent(sys: MahlerSystem, syz: SyzygyResult, point=None,
                          r: Sequence | None = None) -> RegularReduction:
    """Change coordinates so the relations in W become zero coordinates.

    U completes the syzygy basis T (T U = [I | 0]), Y = U^{-1} with det 1,
    Z = Y F has Z_1 = ... = Z_{L-S} = 0 and the rest satisfy
    Z_2(x) = C_22(x) Z_2(x^k).  The constants r_j express F_1 at the point,
    and R = [[I, 0], [r]] turns the last coordinate into H with H(a/b) = F(a/b).
    """
    k, L = sys.k, sys.dim
    A = sys.numerator.scale(1 / sys.B[0])
    S = syz.S
    m = L - S
    notes = []
    if S == 0:
        raise InputError("all basis series are relations (S = 0)")
    if syz.T is None:
        U = None
        u_mat = PolyMatrix.identity(L)
        Y = PolyMatrix.identity(L)
    else:
        U = unimodular_complete(syz.T)
        det = determinant(U.matrix)
        if not det.is_constant() or det.is_zero():
            raise Defect("completion is not unimodular")
        c = det[0]
        # scale the last column of U (last row of Y) so that det Y = 1
        u_rows = U.matrix.to_lists()
        for row in u_rows:
            row[L - 1] = row[L - 1].scale(1 / c)
        y_rows = U.inverse.to_lists()
        y_rows[L - 1] = [e.scale(c) for e in y_rows[L - 1]]
        u_mat, Y = PolyMatrix(u_rows), PolyMatrix(y_rows)
        if (syz.T * u_mat).submatrix(range(m), range(m)) != PolyMatrix.identity(m):
            raise Defect("T U != [I | 0]")
        if determinant(Y) != _ONE:
            raise Defect("det Y != 1 after scaling")
    C = Y * A * u_mat.substitute_power(k)
    c12 = C.submatrix(range(m), range(m, L))
    if not c12.is_zero():
        raise Defect("upper-right block of Y A U(x^k) is not zero")
    C22 = C.submatrix(range(m, L), range(m, L))
    if r is None:
        if point is None:
            raise InputError("need an evaluation point or an explicit combination r")
        t = to_rational(point)
        r = [u_mat[0, m + j](t) for j in range(S)]
    else:
        r = [to_rational(x) for x in r]
        t = None if point is None else to_rational(point)
    if len(r) != S:
        raise InputError(f"combination must have S = {S} entries")
    if all(x == 0 for x in r):
        raise InputError("all r_j vanish; F(a/b) is not expressed by the reduced coordinates")
    # move a nonzero r_j to the last place
    last = max(j for j in range(S) if r[j] != 0)
    perm = list(range(S))
    perm[last], perm[S - 1] = perm[S - 1], perm[last]
    if last != S - 1:
        notes.append(f"swapped reduced coordinates {last} and {S - 1} so that r_S != 0")
    P = [[Fraction(int(perm[i] == j)) for j in range(S)] for i in range(S)]
    r_perm = [r[perm[j]] for j in range(S)]
    Rm = [[Fraction(int(i == j)) for j in range(S)] for i in range(S - 1)] + [r_perm]
    RP = [[sum((Rm[i][t] * P[t][j] for t in range(S)), Fraction(0)) for j in range(S)] for i in range(S)]
    RP_inv = _inverse_rational(RP)
    RPm = PolyMatrix([[Polynomial.constant(x) for x in row] for row in RP])
    RPinvm = PolyMatrix([[Polynomial.constant(x) for x in row] for row in RP_inv])
    Cred = RPm * C22 * RPinvm
    q = 1
    for row in Cred.entries:
        for e in row:
            for coef in e.coeffs:
                q = q * coef.denominator // math.gcd(q, coef.denominator)
    C22_rat = RatMatrix(Cred.scale(q), q)
    bound = important_bound(L, k)
    if not C22_rat.numerator.max_degree() < bound:
        raise Defect(f"C22 numerator degree exceeds {bound}")
    # reduced coordinates: V = (R P) Y_2 F
    y2 = Y.submatrix(range(m, L), range(L))
    comb = RPm * y2
    vseries = []
    for i in range(S):
        acc = TruncatedSeries._raw([], sys.budget)
        for l in range(L):
            e = comb[i, l]
            if e:
                acc = acc + sys.series[l] * e
        vseries.append(acc)
    size = S + 1
    grid = [[_ZERO] * size for _ in range(size)]
    grid[0][0] = Polynomial.constant(q)
    for i in range(S):
        for j in range(S):
            grid[i + 1][j + 1] = C22_rat.numerator[i, j]
    one = TruncatedSeries._raw([Fraction(1)], sys.budget)
    reduced = MahlerSystem(k, RatMatrix(PolyMatrix(grid), q), (one, *vseries), note="reduced regular system")
    reduced.verify()
    # independence of the reduced coordinates: no polynomial relation of bounded degree
    check_deg = max(1, min(syz.search_bound, 16))
    n_eq = min(sys.budget, S * (check_deg + 1) + 32)
    if S > 1 and _relation_space(vseries, check_deg, n_eq):
        raise Defect("reduced coordinates are dependent")
    if S == 1 and vseries[0].is_zero_to_budget():
        raise Defect("reduced coordinate vanishes")
    return RegularReduction(k, L, S, A, sys.series, syz, U, Y, C22_rat, tuple(tuple(x) for x in RP),
                            tuple(r_perm), tuple(perm), comb, reduced, int(math.ceil(bound)), t, tuple(notes))


def reduce_sequence(rep: LinearRepresentation, point, budget: int = 256) -> tuple[KernelBasis, RegularReduction]:
    kb, sys = kernel_system(rep, budget)
    syz = syzygy_basis(sys)
    return kb, reduce_to_independent(sys, syz, point)


# ---------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True)
class RegularConvergents:
    table: object
    reduction: RegularReduction
    kernel: KernelBasis
    pade: object
    convergents: tuple
    representation: LinearRepresentation

    def values(self, digits: int) -> list[RealInterval]:
        """Intervals for the reduced coordinates (1, V_1, ..., V_S) at a/b."""
        red, kb, rep = self.reduction, self.kernel, self.representation
        t = red.point
        base = [eval_series_real(_BasisSource(rep, w), t, digits + 10, rep.growth_bound(w)) for w in kb.vectors]
        out = [RealInterval.exact(1)]
        for i in range(red.S):
            acc = RealInterval.exact(0)
            for l in range(red.L):
                coef = red.combination[i, l](t)
                if coef:
                    acc = acc + base[l] * coef
            out.append(acc)
        return out


@dataclass(frozen=True)
class _BasisSource:
    rep: LinearRepresentation
    w: tuple

    def series(self, n: int) -> TruncatedSeries:
        return TruncatedSeries._raw(self.rep.terms(n + 1, self.w), n)


def rho_below(a: int, b: int, L: int) -> bool:
    """log|a|/log b < 1/(L+2), decided as |a|^{L+2} < b."""
    return a == 0 or abs(a) ** (L + 2) < b


def regular_to_convergents(rep: LinearRepresentation, a: int, b: int, n_max: int, budget: int = 256,
                           term_cap: int = 4096) -> RegularConvergents:
    from .approx import hermite_pade, integer_convergents, iterate_convergents

    if b < 2 or math.gcd(a, b) != 1:
        raise InputError("need b >= 2 and gcd(a, b) = 1")
    kb, sys = kernel_system(rep, budget)
    if not rho_below(a, b, kb.L):
        raise HypothesisError(f"log|a|/log b must be < 1/(L+2) = 1/{kb.L + 2}, i.e. |a|^{kb.L + 2} < b")
    syz = syzygy_basis(sys)
    red = reduce_to_independent(sys, syz, Fraction(a, b))
    reduced = red.system
    pade = hermite_pade(reduced)
    convs = iterate_convergents(reduced, pade, n_max, term_cap)
    table = integer_convergents(convs, a, b, reduced.k, reduced.dim, reduced.H)
    return RegularConvergents(table, red, kb, pade, tuple(convs), rep)
