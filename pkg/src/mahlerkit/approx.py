"""Simultaneous Pade approximants, iterated rational approximations and
integer convergents to the values of a Mahler system.

Starting from Q, P_i with Q(0) = 1 and high order of contact
nu(Q F_i - P_i), the relation F(x) = A(x)/B(x) F(x^k) is iterated:
P_n = N(x) P_{n-1}(x^k), Q_n = B(x) Q_{n-1}(x^k), N the numerator of A.
Evaluating at a/b and clearing denominators gives integer pairs (p, q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .algebra import AtLeast, Polynomial, RealInterval, TruncatedSeries
from .errors import BudgetError, Defect, InputError, PrecisionError
from .linalg import nullspace, rref
from .mahler import MahlerSystem
from .parallel import ordered_map
from .polymat import PolyMatrix, rank

_ONE = Polynomial.one()


# ---------------------------------------------------------------------------
# Hermite-Pade


@dataclass(frozen=True)
class PadeSystem:
    Q: Polynomial
    P: tuple[Polynomial, ...]
    order: tuple[int | AtLeast, ...]
    degree_bound: int
    target_order: int
    note: str = ""

    @property
    def min_order(self) -> int | AtLeast:
        ints = [o for o in self.order if isinstance(o, int)]
        return min(ints) if ints else min(self.order, key=lambda o: o.bound)


def pade_parameters(d: int, H: int) -> tuple[int, int]:
    """(degree bound (d-1)(d+2)H, order target d(d+2)H)."""
    return (d - 1) * (d + 2) * H, d * (d + 2) * H


def hermite_pade_series(series: Sequence[TruncatedSeries], H: int) -> PadeSystem:
    """Q (deg <= D, Q(0) = 1) and P_i = Q F_i truncated at degree D with
    nu(Q F_i - P_i) >= d(d+2)H, d = len(series), D = (d-1)(d+2)H.

    Among all solutions the reduced echelon kernel representative with
    columns ordered (q_0, q_D, ..., q_1) is taken, which keeps Q small at
    the top.
    """
    d = len(series)
    if d < 1:
        raise InputError("need at least one series")
    D, omega = pade_parameters(d, H)
    need = omega + D
    budget = min(s.budget for s in series)
    if budget < need:
        raise BudgetError(f"series budget {budget} below the required {need}", required=need)
    order_cols = [0] + list(range(D, 0, -1))
    rows = []
    for s in series:
        for n in range(D + 1, omega):
            # coefficient of x^n in Q*F = sum_j q_j f(n-j)
            rows.append([s.coeffs[n - j] for j in order_cols])
    note = ""
    if D == 0:
        Q = _ONE
    else:
        basis = nullspace(rows, D + 1)
        red, pivots = rref(basis, D + 1)
        if pivots and pivots[0] == 0:
            vec = red[0]
        else:
            vec = red[0]
            lead = next(v for v in vec if v)
            vec = [v / lead for v in vec]
            note = "no kernel vector with Q(0) != 0; scaled by the first nonzero coefficient"
        coeffs = [Fraction(0)] * (D + 1)
        for pos, j in enumerate(order_cols):
            coeffs[j] = vec[pos]
        Q = Polynomial(coeffs)
    P = tuple((s * Q).to_polynomial().truncate(D + 1) for s in series)
    orders = tuple((s * Q - P_i).valuation() for s, P_i in zip(series, P))
    for o in orders:
        if isinstance(o, int) and o < omega:
            raise Defect(f"Pade order {o} below the target {omega}")
    assert Q.deg() <= D and all(p.deg() <= D for p in P)
    return PadeSystem(Q, P, orders, D, omega, note)


def hermite_pade(sys: MahlerSystem) -> PadeSystem:
    """Simultaneous Pade approximant for the series vector of ``sys``."""
    return hermite_pade_series(sys.series, sys.H)


# ---------------------------------------------------------------------------
# iterated approximations


@dataclass(frozen=True)
class Convergent:
    """Phi_n = (P_{1,n}, ..., P_{d,n}) / Q_n."""

    n: int
    P: tuple[Polynomial, ...]
    Q: Polynomial


def iterate_convergents(sys: MahlerSystem, pade: PadeSystem, n_max: int, term_cap: int = 4096) -> list[Convergent]:
    """Phi_0 .. Phi_{n_max} with Phi_n(x) = A(x) Phi_{n-1}(x^k).

    The recursion stops early once k^n d(d+2)H exceeds ``term_cap``.
    Each step re-checks Q_n = B(x)B(x^k)...B(x^{k^{n-1}}) Q_0(x^{k^n}) and
    the degree bound ((d+2)(d-1)+1) H k^n.
    """
    k, d, H = sys.k, sys.dim, sys.H
    N, B = sys.numerator, sys.B
    deg_factor = ((d + 2) * (d - 1) + 1) * H
    out = [Convergent(0, pade.P, pade.Q)]
    prod_b = _ONE
    for n in range(1, n_max + 1):
        if k ** n * d * (d + 2) * H > term_cap:
            break
        prev = out[-1]
        shifted = [p.substitute_power(k) for p in prev.P]
        P = tuple(_row_dot(N.row(i), shifted) for i in range(d))
        Q = B * prev.Q.substitute_power(k)
        prod_b = prod_b * B.substitute_power(k ** (n - 1))
        if Q != prod_b * pade.Q.substitute_power(k ** n):
            raise Defect(f"Q_{n} product identity failed")
        bound = deg_factor * k ** n
        if Q.deg() > bound or any(p.deg() > bound for p in P):
            raise Defect(f"degree bound {bound} exceeded at n = {n}")
        out.append(Convergent(n, P, Q))
    return out


def _row_dot(row: Sequence[Polynomial], vec: Sequence[Polynomial]) -> Polynomial:
    acc = Polynomial.zero()
    for a, v in zip(row, vec):
        if a and v:
            acc = acc + a * v
    return acc


def contact_orders(sys: MahlerSystem, convs: Sequence[Convergent]) -> list[tuple[int, list]]:
    """nu(F_i Q_n - P_{i,n}) per n, as far as the series budget allows."""
    out = []
    for c in convs:
        row = []
        for s, p in zip(sys.series, c.P):
            row.append((s * c.Q - p).valuation())
        out.append((c.n, row))
    return out


# ---------------------------------------------------------------------------
# integer convergents


@dataclass(frozen=True)
class ConvergentRow:
    n: int
    q: int
    p: tuple[int, ...]
    skipped: bool
    exponent: int


@dataclass(frozen=True)
class ConvergentTable:
    a: int
    b: int
    k: int
    d: int
    H: int
    delta: Fraction
    m: int
    scale: int
    rows: tuple[ConvergentRow, ...]
    errors: tuple = ()

    @property
    def rho(self) -> float:
        """log|a| / log b (display only; decisions use integer powers)."""
        return 0.0 if abs(self.a) <= 1 else math.log(abs(self.a)) / math.log(self.b)

    def ratio(self, n: int, i: int) -> Fraction:
        row = self.rows[n]
        return Fraction(row.p[i], row.q)


def difference_spacing(k: int, d: int, H: int) -> int:
    """Least m with k^m >= 2^{Hd} k^{2d+3}."""
    target = 2 ** (H * d) * k ** (2 * d + 3)
    m = 0
    while k ** m < target:
        m += 1
    return m


def integer_convergents(convs: Sequence[Convergent], a: int, b: int, k: int, d: int, H: int) -> ConvergentTable:
    """q_n = b^{e_n} c |Q_n(a/b)|, p_{i,n} = b^{e_n} c P_{i,n}(a/b) sgn Q_n(a/b)
    with e_n = ((d+2)(d-1)+1) H k^n and c the lcm of the denominators of
    the coefficients of Q_0, P_{i,0}.  Rows with Q_n(a/b) = 0 become (1, 1)."""
    if b < 1 or (a != 0 and math.gcd(a, b) != 1):
        raise InputError("need b >= 1 and gcd(a, b) = 1")
    t = Fraction(a, b)
    first = convs[0]
    c = 1
    for poly in (first.Q, *first.P):
        for coef in poly.coeffs:
            c = c * coef.denominator // math.gcd(c, coef.denominator)
    factor = ((d + 2) * (d - 1) + 1) * H

    def make_row(conv: Convergent) -> ConvergentRow:
        e = factor * k ** conv.n
        scale = Fraction(b) ** e * c
        qv = conv.Q(t)
        if qv == 0:
            return ConvergentRow(conv.n, 1, tuple(1 for _ in conv.P), True, e)
        sign = 1 if qv > 0 else -1
        q = scale * abs(qv)
        ps = [scale * pp(t) * sign for pp in conv.P]
        if q.denominator != 1 or any(p.denominator != 1 for p in ps):
            raise Defect(f"integer scaling failed to clear denominators at n = {conv.n}")
        return ConvergentRow(conv.n, int(q), tuple(int(p) for p in ps), False, e)

    rows = tuple(ordered_map(make_row, convs))
    return ConvergentTable(a, b, k, d, H, Fraction(1, 3 * d ** 3), difference_spacing(k, d, H), c, rows)


# ---------------------------------------------------------------------------
# quality checks


ValueSource = Callable[[int], Sequence[RealInterval]]


@dataclass
class QualityRow:
    n: int
    skipped: bool
    upper_pass: list
    log10_error: list
    lower_flag: list


@dataclass
class QualityReport:
    delta: Fraction
    digits: int
    rows: list[QualityRow]
    growth: list[float]
    lower_gaps: list
    syndetic_bound: int
    rational_looking: list[bool]
    errors: list = field(default_factory=list)

    def upper_holds(self, n_values: Sequence[int], index: int) -> bool:
        by_n = {r.n: r for r in self.rows}
        return all(by_n[n].upper_pass[index] is True for n in n_values)


def _log10(v: Fraction) -> float:
    if v <= 0:
        return -math.inf
    return (math.log10(v.numerator) if v.numerator < 10 ** 300 else _big_log10(v.numerator)) - \
        (math.log10(v.denominator) if v.denominator < 10 ** 300 else _big_log10(v.denominator))


def _big_log10(n: int) -> float:
    return float(mpmath.log10(mpmath.mpf(n)))


def _upper_verdict(err: RealInterval, q: int, delta: Fraction) -> bool | None:
    """Decide |F - p/q| < q^{-(1+delta)}, i.e. err^den * q^(den+num) < 1."""
    num, den = delta.numerator, delta.denominator
    qpow = Fraction(q) ** (den + num)
    if err.upper ** den * qpow < 1:
        return True
    if err.lower > 0 and err.lower ** den * qpow >= 1:
        return False
    return None


def _lower_verdict(err: RealInterval, a: int, b: int, exponent: int) -> bool | None:
    """Decide |F - p/q| >= (|a|/b)^exponent; None if undecidable or too large."""
    if exponent > 2_000_000:
        return None
    if a == 0:
        return err.lower >= 0 if exponent == 0 else err.lower > 0 or None
    threshold = Fraction(abs(a), b) ** exponent
    if err.lower >= threshold:
        return True
    if err.upper < threshold:
        return False
    return None


def quality_report(table: ConvergentTable, values: ValueSource | Sequence[RealInterval],
                   digits: int = 100, max_digits: int = 20000) -> QualityReport:
    """Check |F_i(a/b) - p_{i,n}/q_n| < q_n^{-(1+delta)} for every row.

    ``values`` is either a list of intervals or a callable digits -> list
    of intervals; with a callable the precision doubles until every upper
    comparison is decided (PrecisionError past ``max_digits``).
    """
    provider = values if callable(values) else (lambda _d, v=list(values): v)
    d = table.d
    while True:
        vals = list(provider(digits))
        if len(vals) != d:
            raise InputError(f"need {d} values, got {len(vals)}")
        rows, undecided = [], False
        all_errors = []
        for row in table.rows:
            if row.skipped:
                rows.append(QualityRow(row.n, True, [None] * d, [None] * d, [None] * d))
                all_errors.append([None] * d)
                continue
            ups, logs, lows, errs = [], [], [], []
            lower_exp = d ** 3 * table.H * table.k ** (table.m * (d - 1)) * table.k ** row.n
            for i in range(d):
                err = (vals[i] - Fraction(row.p[i], row.q)).abs()
                errs.append(err)
                verdict = _upper_verdict(err, row.q, table.delta)
                if verdict is None and err.upper > 0:
                    undecided = True
                if verdict is None and err.upper == 0:
                    verdict = True
                ups.append(verdict)
                logs.append(_log10(err.upper) if err.upper > 0 else -math.inf)
                lows.append(_lower_verdict(err, table.a, table.b, lower_exp))
            rows.append(QualityRow(row.n, False, ups, logs, lows))
            all_errors.append(errs)
        if not undecided or not callable(values):
            break
        if digits * 2 > max_digits:
            raise PrecisionError(f"comparisons undecided at {digits} digits; raise max_digits")
        digits *= 2
    growth = []
    live = [r for r in table.rows if not r.skipped and r.q > 1]
    for r0, r1 in zip(live, live[1:]):
        growth.append(_big_ln(r1.q) / _big_ln(r0.q))
    gaps = []
    for i in range(d):
        flagged = [r.n for r in rows if r.lower_flag[i] is True]
        gaps.append(max((b - a for a, b in zip(flagged, flagged[1:])), default=None))
    rational = []
    for i in range(d):
        tail = [(row, errs) for row, errs in zip(table.rows, all_errors) if not row.skipped][-3:]
        same = len(tail) >= 2 and len({Fraction(r.p[i], r.q) for r, _ in tail}) == 1
        rational.append(bool(same and tail[-1][1][i].lower == 0))
    return QualityReport(table.delta, digits, rows, growth, gaps, (d - 1) * table.m, rational, all_errors)


def _big_ln(n: int) -> float:
    if n < 10 ** 300:
        return math.log(n)
    return float(mpmath.log(mpmath.mpf(n)))


# ---------------------------------------------------------------------------
# difference matrices


@dataclass(frozen=True)
class DifferenceMatrix:
    n: int
    m: int
    numerators: PolyMatrix
    denominators: tuple[Polynomial, ...]
    top_row_zero: bool
    rank: int
    expected_rank: int

    @property
    def defect(self) -> bool:
        return self.rank < self.expected_rank

    def reduced_block(self) -> PolyMatrix:
        """The matrix with its (zero) top row deleted."""
        rows = list(range(1, self.numerators.rows))
        return self.numerators.submatrix(rows, range(self.numerators.cols))


def difference_matrix(convs: Sequence[Convergent], n: int, m: int) -> DifferenceMatrix:
    """d x (d-1) matrix with column j equal to Phi_n - Phi_{n+jm}.

    Column j is stored over its denominator Q_n Q_{n+jm}; the rank over
    Q(x) does not see those nonzero column scalings.
    """
    d = len(convs[0].P)
    last = n + m * (d - 1)
    by_n = {c.n: c for c in convs}
    if last not in by_n or n not in by_n:
        raise InputError(f"need convergents up to n = {last}")
    base = by_n[n]
    cols, dens = [], []
    for j in range(1, d):
        other = by_n[n + j * m]
        cols.append([bp * other.Q - op * base.Q for bp, op in zip(base.P, other.P)])
        dens.append(base.Q * other.Q)
    grid = [[cols[j][i] for j in range(d - 1)] for i in range(d)]
    mat = PolyMatrix(grid) if d > 1 else PolyMatrix.zeros(d, 0)
    top_zero = all(e.is_zero() for e in mat.row(0)) if d > 1 else True
    r = rank(mat)
    return DifferenceMatrix(n, m, mat, tuple(dens), top_zero, r, d - 1)


# ---------------------------------------------------------------------------
# valuation bound


@dataclass(frozen=True)
class ValuationCheck:
    observed: int | AtLeast
    bound: int
    passed: bool
    relation_found: bool


def valuation_bound(k: int, d: int, H: int, N: int) -> int:
    """2^{Hd} max(1, N) k^{2d+3}."""
    return 2 ** (H * d) * max(1, N) * k ** (2 * d + 3)


def valuation_bound_check(sys: MahlerSystem, coeffs: Sequence[Polynomial]) -> ValuationCheck:
    """Compare nu(sum c_i F_i) with the bound for combinations of degree <= N."""
    coeffs = [Polynomial.coerce(c) for c in coeffs]
    if len(coeffs) != sys.dim:
        raise InputError(f"need {sys.dim} coefficients")
    if all(c.is_zero() for c in coeffs):
        raise InputError("all coefficients are zero")
    N = max(c.deg() for c in coeffs)
    bound = valuation_bound(sys.k, sys.dim, sys.H, N)
    if sys.budget <= bound:
        raise BudgetError(f"series budget {sys.budget} must exceed the bound {bound}", required=bound + 1)
    total = None
    for c, s in zip(coeffs, sys.series):
        if c:
            term = s * c
            total = term if total is None else total + term
    nu = total.valuation()
    relation = isinstance(nu, AtLeast)
    return ValuationCheck(nu, bound, relation or nu <= bound, relation)


# ---------------------------------------------------------------------------
# export


def table_to_tsv(table: ConvergentTable, report: QualityReport | None = None) -> str:
    d = table.d
    head = ["n", "q_n"] + [f"p_{i + 1}" for i in range(d)]
    if report is not None:
        head += [f"log10_err_{i + 1}" for i in range(d)] + [f"upper_{i + 1}" for i in range(d)]
    lines = ["\t".join(head)]
    by_n = {r.n: r for r in report.rows} if report else {}
    for row in table.rows:
        cells = [str(row.n), str(row.q)] + [str(p) for p in row.p]
        if report is not None:
            qr = by_n[row.n]
            cells += ["skipped" if v is None else ("-inf" if v == -math.inf else f"{v:.3f}") for v in qr.log10_error]
            cells += ["skipped" if row.skipped else ("pass" if v is True else "fail" if v is False else "undecided")
                      for v in qr.upper_pass]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def table_to_dict(table: ConvergentTable, report: QualityReport | None = None) -> dict:
    out = {
        "a": table.a, "b": table.b, "k": table.k, "d": table.d, "H": table.H,
        "delta": f"{table.delta.numerator}/{table.delta.denominator}", "m": table.m,
        "rows": [],
    }
    by_n = {r.n: r for r in report.rows} if report else {}
    for row in table.rows:
        item = {"n": row.n, "q": str(row.q), "p": [str(p) for p in row.p], "skipped": row.skipped}
        if report is not None:
            qr = by_n[row.n]
            item["upper_pass"] = qr.upper_pass
            item["log10_error"] = [None if v is None else ("-inf" if v == -math.inf else f"{v:.6f}")
                                   for v in qr.log10_error]
        out["rows"].append(item)
    if report is not None:
        out["growth"] = [f"{g:.6f}" for g in report.growth]
        out["rational_looking"] = report.rational_looking
        out["digits"] = report.digits
    return out


def companion_values(eq, t, growth=None) -> ValueSource:
    """Interval values of (1, F(t), F(t^k), ..., F(t^{k^{d-1}})) at a requested precision.

    ``growth`` is a (c, r, gamma) coefficient bound; without it the tails
    use a fitted bound and the intervals are marked non-rigorous.
    """
    from .algebra import eval_series_real

    t = Fraction(t)

    def provider(digits: int) -> list[RealInterval]:
        out = [RealInterval.exact(1)]
        for i in range(eq.d):
            out.append(eval_series_real(eq, t ** (eq.k ** i), digits + 5, growth))
        return out

    return provider
